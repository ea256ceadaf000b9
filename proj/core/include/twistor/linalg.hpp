#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace twistor {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Frobenius tolerance for algebraic identities (I^2 = -1, IJ = -JI, ...).
inline constexpr double kTolStruct = 1e-9;
/// Relative singular-value cutoff for every rank decision.
inline constexpr double kRankCutoff = 1e-7;
/// Distance threshold for "matrix lies on sphere" tests.
inline constexpr double kMembershipTol = 1e-8;

/// Column-major flattening of a matrix into a vector.
Vec vec(const Mat& m);
Mat unvec(const Vec& v, Eigen::Index rows);

Mat commutator(const Mat& a, const Mat& b);

/// Matrix of X -> XA - AX acting on vec(X).
Mat commutator_operator(const Mat& a);
/// Matrix of X -> XA + AX acting on vec(X).
Mat anticommutator_operator(const Mat& a);

/// Singular values and an orthonormal kernel basis of `a`, with the rank
/// decided by `rel_cutoff` times the largest singular value.
struct KernelDecomposition {
  Vec singular_values;
  Mat kernel;      // columns span the numerical kernel
  Mat cokernel;    // columns span the orthogonal complement of the kernel
  int rank = 0;
  // Largest singular value below the cutoff and smallest above it, relative
  // to the largest. A small gap between them means the decision is fragile.
  double below_cutoff = 0.0;
  double above_cutoff = 0.0;
};

KernelDecomposition kernel_decomposition(const Mat& a, double rel_cutoff = kRankCutoff);
Mat numerical_kernel(const Mat& a, double rel_cutoff = kRankCutoff);
int numerical_rank(const Mat& a, double rel_cutoff = kRankCutoff);
int numerical_rank(const CMat& a, double rel_cutoff = kRankCutoff);

/// Moore-Penrose pseudoinverse with singular values below
/// `rel_cutoff * sigma_max` treated as zero.
Mat pseudo_inverse(const Mat& a, double rel_cutoff);

/// Matrix exponential (scaling and squaring, Padé approximant).
Mat expm(const Mat& a);

/// Real principal logarithm; empty when `a` has a real eigenvalue that is
/// not positive, in which case no real logarithm is returned.
std::optional<Mat> real_logm(const Mat& a);

/// Basis of span{ mats } stacked as vectorized columns.
Mat stack_columns(std::span<const Mat> mats);

/// Seeded generator shared by all random constructions. The sequence is
/// fully determined by the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  Mat gaussian_matrix(Eigen::Index rows, Eigen::Index cols);
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Seed resolution shared by tools: explicit value, else $TWISTOR_KIT_SEED,
/// else the given fallback.
std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed,
                           std::uint64_t fallback);

}  // namespace twistor
