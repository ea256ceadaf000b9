#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistor/linalg.hpp"
#include "twistor/period_charts.hpp"
#include "twistor/quaternionic.hpp"
#include "twistor/rational.hpp"

namespace twistor {

enum class NSMethod { kExactRational, kHeightBounded };

std::string_view to_string(NSMethod m);

struct NSOptions {
  NSMethod method = NSMethod::kExactRational;
  long height = 1000;
  /// Admissible distance to the real kernel is epsilon_factor * height.
  double epsilon_factor = 1e-9;
};

struct NSReport {
  int rank = 0;
  std::vector<RationalMatrix> basis;
  NSMethod method = NSMethod::kExactRational;
  std::optional<long> height_bound;
  /// Largest distance of an accepted vector to the real kernel
  /// (height-bounded mode only).
  double max_kernel_distance = 0.0;
};

/// Index pairs (i, j), i < j, in lexicographic order; coordinates of the
/// alternating forms sum_x x_ij (E_ij - E_ji).
std::vector<std::pair<int, int>> alternating_pairs(int dim);
Mat alternating_from_coords(const Vec& x, int dim);
Vec alternating_coords(const Mat& omega);

/// Matrix of omega -> I^T omega I - omega on alternating coordinates.
Mat invariance_operator(const Mat& i);
RationalMatrix invariance_operator(const RationalMatrix& i);

/// Rank of the group of integral alternating forms with I^T omega I = omega.
/// Exact mode needs rational I (mode error otherwise); height-bounded mode
/// reports forms of sup-norm at most `height` only.
NSReport ns_rank(const ComplexStructure& i, const NSOptions& opts = {});
NSReport ns_rank_exact(const RationalMatrix& i);

/// omega^I = I^T omega I.
Mat i_conjugate_form(const ComplexStructure& i, const Mat& omega);

struct LocusReport {
  int dim = 0;
  int codim = 0;
  int bound = 0;          // 4n - 3
  bool bound_holds = false;
  bool j_invariant = false;
  int dim_invariant_part = 0;
  int dim_anti_invariant_part = 0;
  /// Largest residual of the returned basis against the three conditions.
  double basis_residual = 0.0;
  std::vector<Mat> basis;
};

/// Solutions of Y I = I Y, Y J = -J Y, Y^T omega + omega Y = 0 inside the
/// 4n^2-dimensional space of the first two conditions.
LocusReport locus_solution_dimension(const ComplexStructure& i, const ComplexStructure& j,
                                     const Mat& omega);

/// Random nonzero J-invariant form, projected to its I-invariant part when
/// `invariant` and to the anti-invariant part otherwise.
Mat random_locus_form(const ComplexStructure& i, const ComplexStructure& j, bool invariant,
                      Rng& rng);

enum class LocusDecision { kContained, kFiniteIntersection };
std::string_view to_string(LocusDecision d);

struct SphereLocusReport {
  LocusDecision decision = LocusDecision::kContained;
  double max_residual = 0.0;
  int samples = 0;
};

SphereLocusReport sphere_locus_decision(const TwistorSphere& s, const Mat& omega, int m = 20,
                                        std::uint64_t seed = 0);

/// The three-parameter form family
///   Q = [[0,-b,c,-d],[b,0,d,c],[-c,-d,0,b],[d,-c,-b,0]].
Mat q_form(double b, double c, double d);
/// (b, c, d) of a matrix of that shape.
std::array<double, 3> q_form_params(const Mat& q);

struct FormFamily {
  std::vector<Mat> basis;
  bool exact = false;
};

/// Skew forms with Q(I.,I.) = Q(J.,J.) = Q on a sphere at n = 1.
FormFamily invariant_form_family(const TwistorSphere& s);

struct RiemannCertificate {
  double first_relation_residual = 0.0;
  CMat hermitian;  // i Omega Q conj(Omega)^T
  double determinant = 0.0;
  double closed_form = 0.0;
  double determinant_mismatch = 0.0;  // relative
  bool positive_definite = false;
};

/// Period (1 0 u v; 0 1 v -u) with u^2 + v^2 = -1 against Q from the family.
RiemannCertificate riemann_certificate(std::complex<double> u, std::complex<double> v,
                                       const Mat& q);

/// Closed-form det of i Omega Q conj(Omega)^T.
double riemann_closed_form(std::complex<double> u, std::complex<double> v, double b, double c,
                           double d);

/// Random (u, v) with u^2 + v^2 = -1: X = (u1, v1) Gaussian, Y = (u2, v2)
/// orthogonal to X with |Y|^2 = |X|^2 + 1.
std::pair<std::complex<double>, std::complex<double>> sample_uv(Rng& rng);

/// 4|X|^2|Y|^2 - (|X|^2 + |Y|^2)^2 + 1 for the (u, v) above.
double riemann_identity_residual(std::complex<double> u, std::complex<double> v);

}  // namespace twistor
