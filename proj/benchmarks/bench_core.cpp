#include <benchmark/benchmark.h>

#include "twistor/connectivity.hpp"
#include "twistor/lattice_genericity.hpp"
#include "twistor/lattice_reduction.hpp"
#include "twistor/period_charts.hpp"

using namespace twistor;

static void BM_CentralizerBasis(benchmark::State& state) {
  const ComplexStructure i = random_complex_structure(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(centralizer_basis(i));
}
BENCHMARK(BM_CentralizerBasis)->Arg(1)->Arg(2)->Arg(3);

static void BM_PhiDifferentialRank(benchmark::State& state) {
  const TwistorSphere s = canonical_sphere(static_cast<int>(state.range(0)));
  const PhiProblem p(s.I(), s.J(), s.K());
  for (auto _ : state) benchmark::DoNotOptimize(phi_differential_rank(p));
}
BENCHMARK(BM_PhiDifferentialRank)->Arg(1)->Arg(2)->Arg(3);

static void BM_SolvePhi(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TwistorSphere s = canonical_sphere(n);
  const PhiProblem p(s.I(), s.J(), s.K());
  Rng rng(2);
  Mat x = Mat::Zero(4 * n, 4 * n), y = Mat::Zero(4 * n, 4 * n);
  for (const auto& b : p.j_basis()) x += rng.gaussian() * b;
  for (const auto& b : p.k_basis()) y += rng.gaussian() * b;
  const ComplexStructure target =
      phi(p, GroupElement::exp(1e-2 * x / x.norm()), GroupElement::exp(1e-2 * y / y.norm()));
  for (auto _ : state) benchmark::DoNotOptimize(solve_phi(p, target));
}
BENCHMARK(BM_SolvePhi)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_ThreeSpherePath(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ComplexStructure i1 = random_complex_structure(n, 3);
  Rng rng(4);
  const ComplexStructure i2 = nearby_structure(i1, 0.05, rng);
  for (auto _ : state) benchmark::DoNotOptimize(three_sphere_path(i1, i2));
}
BENCHMARK(BM_ThreeSpherePath)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_VerifyConic(benchmark::State& state) {
  const TwistorSphere s = canonical_sphere(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(verify_conic(s, 40));
}
BENCHMARK(BM_VerifyConic)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_NsRankExact(benchmark::State& state) {
  const ComplexStructure i = canonical_structure(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ns_rank(i));
}
BENCHMARK(BM_NsRankExact)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_NsRankHeightBounded(benchmark::State& state) {
  const ComplexStructure i = random_complex_structure(static_cast<int>(state.range(0)), 5);
  NSOptions opts;
  opts.method = NSMethod::kHeightBounded;
  for (auto _ : state) benchmark::DoNotOptimize(ns_rank(i, opts));
}
BENCHMARK(BM_NsRankHeightBounded)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_Lll(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  std::vector<IntVector> basis(dim, IntVector(dim));
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) basis[r][c] = (r == c ? 1000 : 0) + rng.integer(-500, 500);
  for (auto _ : state) {
    auto b = basis;
    lll_reduce(b);
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_Lll)->Arg(6)->Arg(12)->Arg(28)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
