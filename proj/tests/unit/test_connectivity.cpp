#include <cmath>

#include <gtest/gtest.h>

#include "oracles/oracles.hpp"
#include "twistor/connectivity.hpp"
#include "twistor/error.hpp"

using namespace twistor;

namespace {

Eigen::Vector3d random_unit(Rng& rng) {
  Eigen::Vector3d v(rng.gaussian(), rng.gaussian(), rng.gaussian());
  return v.normalized();
}

ComplexStructure at(const TwistorSphere& s, const Eigen::Vector3d& p) {
  return sphere_point(s, p(0), p(1), p(2));
}

// Kernel of a Kronecker commutator operator via full-pivot LU.
Mat lu_kernel(const Mat& a) {
  Eigen::FullPivLU<Mat> lu(a);
  lu.setThreshold(1e-9);
  return lu.kernel();
}

// Rank of (X, Y) -> [X + Y, I] on g_J x g_K, assembled from Kronecker operators.
int oracle_phi_rank(const Mat& i, const Mat& j, const Mat& k) {
  const Mat gj = lu_kernel(oracle::kron_commutator(j));
  const Mat gk = lu_kernel(oracle::kron_commutator(k));
  Mat both(gj.rows(), gj.cols() + gk.cols());
  both << gj, gk;
  return oracle::lu_rank(oracle::kron_commutator(i) * both);
}

TwistorPath conjugate_path(const GroupElement& g, const TwistorPath& p) {
  TwistorPath out;
  for (const auto& s : p.spheres) out.spheres.push_back(conjugate(g, s));
  for (const auto& j : p.joints) out.joints.push_back(conjugate(g, j));
  for (const auto& e : p.endpoints) out.endpoints.push_back(conjugate(g, e));
  return out;
}

}  // namespace

TEST(PhiProblem, RankCriterionMatchesIndependence) {
  Rng rng(1);
  for (int n = 1; n <= 2; ++n) {
    for (int trial = 0; trial < 12; ++trial) {
      const TwistorSphere s = conjugate(random_gl_plus(4 * n, rng), canonical_sphere(n));
      const Eigen::Vector3d p1 = random_unit(rng), p2 = random_unit(rng);
      const bool dependent = trial % 2 == 1;
      const Eigen::Vector3d p3 =
          dependent ? Eigen::Vector3d((rng.gaussian() * p1 + rng.gaussian() * p2).normalized())
                    : random_unit(rng);
      const PhiProblem prob(at(s, p1), at(s, p2), at(s, p3));
      EXPECT_EQ(prob.independent(), !dependent);
      const int rank = phi_differential_rank(prob);
      if (dependent) {
        EXPECT_LT(rank, 8 * n * n);
      } else {
        EXPECT_EQ(rank, 8 * n * n);
      }
    }
  }
}

TEST(PhiProblem, DifferentialRankAgreesWithKroneckerOracle) {
  for (int n = 1; n <= 2; ++n) {
    const TwistorSphere s = canonical_sphere(n);
    const PhiProblem indep(s.I(), s.J(), s.K());
    EXPECT_EQ(phi_differential_rank(indep), oracle_phi_rank(s.I().mat(), s.J().mat(), s.K().mat()));
    const double h = 1.0 / std::sqrt(2.0);
    const ComplexStructure third = sphere_point(s, h, h, 0.0);
    const PhiProblem dep(s.I(), s.J(), third);
    EXPECT_EQ(phi_differential_rank(dep), oracle_phi_rank(s.I().mat(), s.J().mat(), third.mat()));
    EXPECT_LT(phi_differential_rank(dep), 8 * n * n);
  }
}

TEST(PhiProblem, RejectsOffSphereTriple) {
  const TwistorSphere s = canonical_sphere(1);
  try {
    PhiProblem p(s.I(), s.J(), random_complex_structure(1, 9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotCospherical);
  }
}

TEST(Phi, WrongSubgroupRejected) {
  const TwistorSphere s = canonical_sphere(1);
  const PhiProblem p(s.I(), s.J(), s.K());
  Rng rng(2);
  const GroupElement g = random_gl_plus(4, rng);
  try {
    phi(p, g, GroupElement::identity(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWrongSubgroup);
  }
}

TEST(Phi, JacobianMatchesFiniteDifferences) {
  const TwistorSphere s = canonical_sphere(1);
  const PhiProblem p(s.I(), s.J(), s.K());
  const GroupElement e = GroupElement::identity(4);
  const Mat jac = phi_jacobian(p, e, e);
  const double h = 1e-6;
  for (std::size_t k = 0; k < p.j_basis().size(); ++k) {
    const GroupElement g = GroupElement::exp(h * p.j_basis()[k]);
    const Mat diff = (phi(p, g, e).mat() - s.I().mat()) / h;
    const Eigen::Map<const Vec> col(diff.data(), diff.size());
    EXPECT_LT((jac.col(static_cast<Eigen::Index>(k)) - col).norm(), 1e-5);
  }
}

TEST(SolvePhi, ReachesForwardGeneratedTargets) {
  Rng rng(3);
  for (int n = 1; n <= 2; ++n) {
    const TwistorSphere s = canonical_sphere(n);
    const PhiProblem p(s.I(), s.J(), s.K());
    for (int trial = 0; trial < 5; ++trial) {
      Mat x = Mat::Zero(4 * n, 4 * n), y = Mat::Zero(4 * n, 4 * n);
      for (const auto& b : p.j_basis()) x += 0.01 * rng.gaussian() * b;
      for (const auto& b : p.k_basis()) y += 0.01 * rng.gaussian() * b;
      const ComplexStructure target = phi(p, GroupElement::exp(x), GroupElement::exp(y));
      const PhiSolution sol = solve_phi(p, target);
      EXPECT_LT(sol.residual, 1e-10);
      EXPECT_LT((phi(p, sol.g1, sol.g2).mat() - target.mat()).norm(), 1e-9);
      EXPECT_LT((sol.g1.mat() * s.J().mat() - s.J().mat() * sol.g1.mat()).norm(), 1e-9);
      EXPECT_LT((sol.g2.mat() * s.K().mat() - s.K().mat() * sol.g2.mat()).norm(), 1e-9);
    }
  }
}

TEST(SolvePhi, FarTargetReportsNoConvergence) {
  const TwistorSphere s = canonical_sphere(1);
  const PhiProblem p(s.I(), s.J(), s.K());
  SolverOptions opts;
  opts.max_iter = 2;
  opts.max_retries = 0;
  try {
    solve_phi(p, random_complex_structure(1, 77), opts);
    FAIL();
  } catch (const NoConvergence& e) {
    EXPECT_GT(e.last_residual(), 0.0);
  } catch (const Error& e) {
    // Leaving the local radius is reported as a failed solve as well.
    EXPECT_EQ(e.code(), ErrorCode::kNoConvergence);
  }
}

TEST(Fiber, QuaternionicPerturbationsStayInFiber) {
  Rng rng(4);
  for (int n = 1; n <= 2; ++n) {
    const TwistorSphere s = canonical_sphere(n);
    const PhiProblem p(s.I(), s.J(), s.K());
    const auto quat = quaternionic_centralizer_basis(s);
    Mat x = Mat::Zero(4 * n, 4 * n), y = Mat::Zero(4 * n, 4 * n);
    for (const auto& b : p.j_basis()) x += 0.01 * rng.gaussian() * b;
    for (const auto& b : p.k_basis()) y += 0.01 * rng.gaussian() * b;
    const ComplexStructure target = phi(p, GroupElement::exp(x), GroupElement::exp(y));
    const PhiSolution sol = solve_phi(p, target);
    for (int trial = 0; trial < 10; ++trial) {
      Mat a = Mat::Zero(4 * n, 4 * n), b = Mat::Zero(4 * n, 4 * n);
      for (const auto& q : quat) {
        a += 0.2 * rng.gaussian() * q;
        b += 0.2 * rng.gaussian() * q;
      }
      const GroupElement h1 = GroupElement::exp(a), h2 = GroupElement::exp(b);
      const ComplexStructure moved = phi(p, sol.g1 * h1, h1.inverse() * sol.g2 * h2);
      EXPECT_LT((moved.mat() - target.mat()).norm(), 1e-8);
      const int nullity = fiber_dimension(p, sol.g1 * h1, h1.inverse() * sol.g2 * h2);
      const int rank = static_cast<int>(phi_jacobian(p, sol.g1 * h1, h1.inverse() * sol.g2 * h2).cols()) - nullity;
      EXPECT_EQ(rank + nullity, 16 * n * n);
      EXPECT_EQ(nullity, 8 * n * n);
    }
  }
}

TEST(ThreeSpherePath, NearbyPairsValidate) {
  for (int n = 1; n <= 2; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const ComplexStructure i1 = random_complex_structure(n, 200 + seed);
      Rng rng(300 + seed);
      const ComplexStructure i2 = nearby_structure(i1, 0.05, rng);
      PathOptions opts;
      opts.seed = seed;
      const TwistorPath path = three_sphere_path(i1, i2, opts);
      ASSERT_EQ(path.spheres.size(), 3u);
      ASSERT_EQ(path.joints.size(), 2u);
      const PathValidation v = validate_path(path);
      EXPECT_TRUE(v.ok) << v.message;
      EXPECT_LT(v.max_joint_distance, 1e-8);
      // Independent membership check of the endpoints.
      const auto frame = [](const TwistorSphere& s) {
        return std::vector<Mat>{s.I().mat(), s.J().mat(), s.K().mat()};
      };
      EXPECT_LT(oracle::span_distance(frame(path.spheres.front()), i1.mat()), 1e-8 * std::max(1.0, i1.mat().norm()));
      EXPECT_LT(oracle::span_distance(frame(path.spheres.back()), i2.mat()), 1e-8 * std::max(1.0, i2.mat().norm()));
    }
  }
}

TEST(ThreeSpherePath, EquivariantUnderConjugation) {
  const ComplexStructure i1 = random_complex_structure(1, 5);
  Rng rng(6);
  const ComplexStructure i2 = nearby_structure(i1, 0.05, rng);
  const TwistorPath path = three_sphere_path(i1, i2);
  for (int k = 0; k < 3; ++k) {
    const GroupElement g = random_gl_plus(4, rng);
    const TwistorPath moved = conjugate_path(g, path);
    const PathValidation v = validate_path(moved);
    EXPECT_TRUE(v.ok) << v.message;
    EXPECT_LT((moved.endpoints.front().mat() - conjugate(g, i1).mat()).norm(), 1e-8 * std::max(1.0, moved.endpoints.front().mat().norm()));
  }
}

TEST(ValidatePath, DetectsBrokenJoint) {
  const ComplexStructure i1 = random_complex_structure(1, 7);
  Rng rng(8);
  const ComplexStructure i2 = nearby_structure(i1, 0.05, rng);
  TwistorPath path = three_sphere_path(i1, i2);
  path.joints[0] = random_complex_structure(1, 99);
  EXPECT_FALSE(validate_path(path).ok);
}

TEST(NearbyStructure, HitsRequestedDistance) {
  Rng rng(9);
  for (int n = 1; n <= 2; ++n) {
    const ComplexStructure i = random_complex_structure(n, 10);
    for (double d : {1e-2, 0.05, 0.1}) {
      const ComplexStructure j = nearby_structure(i, d, rng);
      EXPECT_NEAR((j.mat() - i.mat()).norm(), d, 1e-9);
    }
  }
}

TEST(Intertwiner, ConjugatesAndHasLogarithm) {
  for (int n = 1; n <= 2; ++n) {
    const ComplexStructure i1 = random_complex_structure(n, 11);
    const ComplexStructure i2 = random_complex_structure(n, 12);
    const Intertwiner w = find_intertwiner(i1, i2);
    const double scale = std::max(1.0, i1.mat().norm() * i2.mat().norm());
    EXPECT_LT((w.g.mat() * i1.mat() - i2.mat() * w.g.mat()).norm(), 1e-8 * scale * w.g.mat().norm());
    const Mat e = oracle::taylor_expm(w.log);
    EXPECT_LT((e - w.g.mat()).norm(), 1e-8 * std::max(1.0, w.g.mat().norm()));
  }
}

TEST(Subdivide, ConsecutivePointsWithinHalfRadius) {
  const ComplexStructure i1 = random_complex_structure(1, 13);
  const ComplexStructure i2 = random_complex_structure(1, 14);
  const Intertwiner w = find_intertwiner(i1, i2);
  const double radius = 0.3;
  const auto times = subdivide(i1, w.log, radius);
  ASSERT_GE(times.size(), 2u);
  EXPECT_EQ(times.front(), 0.0);
  EXPECT_EQ(times.back(), 1.0);
  const auto point = [&](double t) {
    const Mat g = oracle::taylor_expm(t * w.log);
    return Mat(g * i1.mat() * g.inverse());
  };
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    EXPECT_LT(times[k], times[k + 1]);
    EXPECT_LT((point(times[k + 1]) - point(times[k])).norm(), radius / 2 + 1e-9);
  }
}

TEST(GlobalPath, FarPairN1Validates) {
  const ComplexStructure i1 = random_complex_structure(1, 15);
  const ComplexStructure i2 = random_complex_structure(1, 16);
  const TwistorPath path = global_path(i1, i2);
  const PathValidation v = validate_path(path);
  EXPECT_TRUE(v.ok) << v.message;
  EXPECT_EQ(path.spheres.size(), path.joints.size() + 1);
  EXPECT_LT((path.endpoints.front().mat() - i1.mat()).norm(), 1e-12);
  EXPECT_LT((path.endpoints.back().mat() - i2.mat()).norm(), 1e-12);
}

TEST(GlobalPath, WithoutRetriesStillValidates) {
  // With no random candidates the polar factors take over whenever the
  // direct intertwiner has a negative eigenvalue.
  PathOptions opts;
  opts.max_retries = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ComplexStructure i1 = random_complex_structure(1, 700 + 2 * seed);
    const ComplexStructure i2 = random_complex_structure(1, 701 + 2 * seed);
    const PathValidation v = validate_path(global_path(i1, i2, opts));
    EXPECT_TRUE(v.ok) << "seed " << seed << ": " << v.message;
  }
}

TEST(Ranks, DimensionCertificates) {
  for (int n = 1; n <= 2; ++n) {
    const TwistorSphere s = canonical_sphere(n);
    const RankReport ni = n_i_tangent_rank(s.I(), s.J());
    EXPECT_EQ(ni.rank, 4 * n * n);
    EXPECT_EQ(ni.expected, 4 * n * n);
    const RankReport mi = m_i_rank(s.I(), s.J());
    EXPECT_EQ(mi.rank, 4 * n * n - 1);
    const RankReport cone = cone_parametrization_rank(s.I(), s.J(), s.K());
    EXPECT_TRUE(cone.precondition_ok);
    EXPECT_EQ(cone.rank, 4 * n * n + 1);
    EXPECT_EQ(phi_differential_rank(PhiProblem(s.I(), s.J(), s.K())), 8 * n * n);
  }
}

TEST(Ranks, AnticommutingOrbitTangentByOracle) {
  // Tangent space at J of {^g J : g I = I g} is [g_I, J]; dimension by LU.
  for (int n = 1; n <= 2; ++n) {
    const TwistorSphere s = canonical_sphere(n);
    const Mat gi = lu_kernel(oracle::kron_commutator(s.I().mat()));
    EXPECT_EQ(oracle::lu_rank(oracle::kron_commutator(s.J().mat()) * gi), n_i_tangent_rank(s.I(), s.J()).rank);
  }
}

TEST(Ranks, ConeFlagsDependentThird) {
  const TwistorSphere s = canonical_sphere(1);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_FALSE(cone_parametrization_rank(s.I(), s.J(), sphere_point(s, h, h, 0.0)).precondition_ok);
}

TEST(Psi, RoundTripReturnsToStart) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexStructure i1 = random_complex_structure(1, 400 + seed);
    Rng rng(500 + seed);
    const ComplexStructure i2 = nearby_structure(i1, 1e-2, rng);
    const ComplexStructure j = default_partner(i1, seed);
    const ComplexStructure k(i1.mat() * j.mat(), kTolStruct * std::max(1.0, i1.mat().squaredNorm() * j.mat().squaredNorm()));
    EXPECT_LT(psi_roundtrip_residual(i1, i2, j, k), 1e-6);
    const PsiImage img = psi_forward(i1, i2, j, k);
    EXPECT_LT(img.sphere.distance_to_span(img.first.mat()), 1e-8 * std::max(1.0, img.first.mat().norm()));
    EXPECT_LT(img.sphere.distance_to_span(img.second.mat()), 1e-8 * std::max(1.0, img.second.mat().norm()));
  }
}
