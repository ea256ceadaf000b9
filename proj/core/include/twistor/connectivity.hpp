#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "twistor/linalg.hpp"
#include "twistor/quaternionic.hpp"

namespace twistor {

struct SolverOptions {
  int max_iter = 50;
  double tol_solve = 1e-10;
  /// Frobenius radius of the region where local solves are attempted.
  double radius = 0.3;
  int max_retries = 5;
  std::uint64_t seed = 0;
};

/// Extra knobs for path construction.
struct PathOptions : SolverOptions {
  /// When set, every joint of a three-sphere segment must pass this filter;
  /// the partner J is redrawn up to max_resample times otherwise.
  std::function<bool(const ComplexStructure&)> joint_filter;
  int max_resample = 20;
};

/// The map (g1, g2) -> g1 g2 I (g1 g2)^{-1} on G_J x G_K for a co-spherical
/// triple (I, J, K). Centralizer bases are computed once.
class PhiProblem {
 public:
  PhiProblem(ComplexStructure i, ComplexStructure j, ComplexStructure k);

  const ComplexStructure& I() const noexcept { return i_; }
  const ComplexStructure& J() const noexcept { return j_; }
  const ComplexStructure& K() const noexcept { return k_; }
  const std::vector<Mat>& j_basis() const noexcept { return j_basis_; }
  const std::vector<Mat>& k_basis() const noexcept { return k_basis_; }
  /// True iff I, J, K span a 3-dimensional space.
  bool independent() const noexcept { return independent_; }

 private:
  ComplexStructure i_, j_, k_;
  std::vector<Mat> j_basis_, k_basis_;
  bool independent_;
};

/// g1 g2 I (g1 g2)^{-1}; wrong-subgroup error unless g1 commutes with J and
/// g2 with K.
ComplexStructure phi(const PhiProblem& p, const GroupElement& g1, const GroupElement& g2);

/// Jacobian of phi at (g1, g2) in right-translated coordinates
/// (g1 e^X, g2 e^Y), columns indexed by the J- then K-centralizer bases.
Mat phi_jacobian(const PhiProblem& p, const GroupElement& g1, const GroupElement& g2);

int phi_differential_rank(const PhiProblem& p);
int fiber_dimension(const PhiProblem& p, const GroupElement& g1, const GroupElement& g2);

struct PhiSolution {
  GroupElement g1;
  GroupElement g2;
  double residual;
  int iterations;
};

/// Gauss-Newton with minimum-norm steps from (e, e), or from `seed` when
/// given.
PhiSolution solve_phi(const PhiProblem& p, const ComplexStructure& target,
                      const SolverOptions& opts = {},
                      const std::pair<GroupElement, GroupElement>* seed = nullptr);

struct TwistorPath {
  std::vector<TwistorSphere> spheres;
  /// joints[i] lies on spheres[i] and spheres[i + 1].
  std::vector<ComplexStructure> joints;
  /// {start, end}
  std::vector<ComplexStructure> endpoints;
};

struct PathValidation {
  bool ok = false;
  double max_joint_distance = 0.0;
  double max_endpoint_distance = 0.0;
  double max_frame_residual = 0.0;
  double max_joint_square_residual = 0.0;
  std::string message;
};

PathValidation validate_path(const TwistorPath& path, double tol = kMembershipTol);

/// Seeded partner J of I with the metric (1 + I^T I)/2.
ComplexStructure default_partner(const ComplexStructure& i, std::uint64_t seed);

/// Three spheres S(I1,J,K), ^{g1}S, ^{g1 g2}S joined at J and ^{g1}K, where
/// (g1, g2) solves phi = I2.
TwistorPath three_sphere_path(const ComplexStructure& i1, const ComplexStructure& i2,
                              const PathOptions& opts = {});
/// Same, with the partner J supplied (K = I1 J).
TwistorPath three_sphere_path(const ComplexStructure& i1, const ComplexStructure& i2,
                              const ComplexStructure& j, const SolverOptions& opts = {});

/// An element g of GL^+ with g I1 g^{-1} = I2 and a real logarithm.
struct Intertwiner {
  GroupElement g;
  Mat log;
};
Intertwiner find_intertwiner(const ComplexStructure& i1, const ComplexStructure& i2,
                             const SolverOptions& opts = {});

/// Interpolation times 0 = t0 < ... < tm = 1 of exp(t L) I1 exp(-t L) with
/// consecutive points closer than radius / 2.
std::vector<double> subdivide(const ComplexStructure& i1, const Mat& log, double radius);

/// ^{exp(eX)}I for a seeded unit Frobenius direction X, with e found by
/// bisection so that the result sits at Frobenius distance `distance`.
ComplexStructure nearby_structure(const ComplexStructure& i, double distance, Rng& rng);

/// Chains three-sphere segments along exp(t log g). When no candidate g has a
/// real logarithm, interpolates along the polar factors of g instead: first
/// exp(t log P), then exp(t log Q).
TwistorPath global_path(const ComplexStructure& i1, const ComplexStructure& i2,
                        const PathOptions& opts = {});

struct RankReport {
  int rank = 0;
  int expected = 0;
  bool precondition_ok = true;
};

/// Rank at (0, 0) of (X, t) -> e^X e^{tK} J e^{-tK} e^{-X}, X commuting
/// with I. precondition_ok is false when K lies in span(I, J).
RankReport cone_parametrization_rank(const ComplexStructure& i, const ComplexStructure& j,
                                     const ComplexStructure& k);

/// Tangent rank at J of the orbit of I-centralizer conjugations (the set of
/// structures anticommuting with I).
RankReport n_i_tangent_rank(const ComplexStructure& i, const ComplexStructure& j);
/// The same with the rotation direction [I, J] removed.
RankReport m_i_rank(const ComplexStructure& i, const ComplexStructure& j);

struct PsiImage {
  TwistorSphere sphere;
  ComplexStructure first;   // ^{f1 f2} K
  ComplexStructure second;  // ^{f1 f2} J
  GroupElement f1;
  GroupElement f2;
};

/// (S(J,K), J, K) -> (^{f1f2}S(J,K), ^{f1f2}K, ^{f1f2}J) for the minimum-norm
/// solution of phi_{I1,J,K} = I2.
PsiImage psi_forward(const ComplexStructure& i1, const ComplexStructure& i2,
                     const ComplexStructure& j, const ComplexStructure& k,
                     const SolverOptions& opts = {});

/// Max of ||J_back - J||_F and ||K_back - K||_F after applying psi from I1 to
/// I2 and back, with the backward solve seeded at
/// (f1 f2^{-1} f1^{-1}, f1 f2 f1^{-1} f2^{-1} f1^{-1}).
double psi_roundtrip_residual(const ComplexStructure& i1, const ComplexStructure& i2,
                              const ComplexStructure& j, const ComplexStructure& k,
                              const SolverOptions& opts = {});

}  // namespace twistor
