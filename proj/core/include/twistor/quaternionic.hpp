#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "twistor/linalg.hpp"

namespace twistor {

/// A complex structure on R^{4n}: a real 4n x 4n matrix squaring to -1.
class ComplexStructure {
 public:
  /// Validates mat^2 = -1 within `tol` (Frobenius) and det > 0.
  explicit ComplexStructure(Mat mat, double tol = kTolStruct);

  int n() const noexcept { return n_; }
  Eigen::Index dim() const noexcept { return mat_.rows(); }
  const Mat& mat() const noexcept { return mat_; }

  ComplexStructure operator-() const { return ComplexStructure(-mat_); }

 private:
  Mat mat_;
  int n_;
};

/// An element of GL^+(4n, R) with its inverse cached.
class GroupElement {
 public:
  explicit GroupElement(Mat mat, double tol = kTolStruct);
  GroupElement(Mat mat, Mat inv);

  static GroupElement identity(Eigen::Index dim);
  /// exp(X) with the inverse taken as exp(-X).
  static GroupElement exp(const Mat& generator);

  const Mat& mat() const noexcept { return mat_; }
  const Mat& inv() const noexcept { return inv_; }
  Eigen::Index dim() const noexcept { return mat_.rows(); }

  GroupElement inverse() const { return GroupElement(inv_, mat_); }
  GroupElement operator*(const GroupElement& other) const {
    return GroupElement(mat_ * other.mat_, other.inv_ * inv_);
  }

 private:
  Mat mat_;
  Mat inv_;
};

/// The 2-sphere {aI + bJ + cK : a^2 + b^2 + c^2 = 1} of an ordered
/// quaternionic frame.
class TwistorSphere {
 public:
  /// Validates the quaternionic relations I^2 = J^2 = K^2 = -1, IJ = K = -JI.
  TwistorSphere(ComplexStructure i, ComplexStructure j, ComplexStructure k,
                double tol = kTolStruct);

  const ComplexStructure& I() const noexcept { return frame_[0]; }
  const ComplexStructure& J() const noexcept { return frame_[1]; }
  const ComplexStructure& K() const noexcept { return frame_[2]; }
  const std::array<ComplexStructure, 3>& frame() const noexcept { return frame_; }
  int n() const noexcept { return frame_[0].n(); }
  Eigen::Index dim() const noexcept { return frame_[0].dim(); }

  /// Frobenius distance from `m` to its orthogonal projection onto span{I,J,K}.
  double distance_to_span(const Mat& m) const;
  bool contains(const Mat& m, double tol = kMembershipTol) const {
    return distance_to_span(m) <= tol;
  }

 private:
  std::array<ComplexStructure, 3> frame_;
};

struct SpherePoint {
  TwistorSphere sphere;
  std::array<double, 3> coords;

  ComplexStructure structure() const;
};

/// Inner product on the 3-span of a quaternionic frame, normalized so that
/// every complex structure on the sphere has unit length: <u,v> = -tr(uv)/4n.
/// On orthogonal frames this equals the Frobenius product scaled by 1/4n.
double frame_inner(const Mat& u, const Mat& v);

/// Frobenius residual of ||M^2 + 1||; dimension error unless M is square of
/// even size.
double structure_residual(const Mat& m);
bool is_complex_structure(const Mat& m, double tol = kTolStruct);

/// Block matrix [[0, -1], [1, 0]] with 2n x 2n blocks; the origin Z = i1 of
/// the period chart.
ComplexStructure standard_structure(int n);

/// Quaternionic frame whose n = 1 block is
///   I = diag(e, e), e = [[0,-1],[1,0]],   J = [[0,-D],[D,0]], D = diag(1,-1),
/// with copies interleaved so that every 2n x 2n block of I, J, K is block
/// diagonal. The chart block C of aI + bJ + cK is then invertible iff
/// b^2 + c^2 != 0.
TwistorSphere canonical_sphere(int n);
ComplexStructure canonical_structure(int n);

/// Random element of GL^+ with Gaussian entries, rejecting draws whose
/// Hadamard ratio |det g| / prod ||g_j|| falls below 1e-3.
GroupElement random_gl_plus(Eigen::Index dim, Rng& rng);

/// g I0 g^{-1} for the canonical I0 and a seeded random g in GL^+.
ComplexStructure random_complex_structure(int n, std::uint64_t seed);

/// Symmetric positive-definite metric compatible with I: (1 + I^T I) / 2.
/// Equals the identity when I is orthogonal.
Mat compatible_metric(const ComplexStructure& i);

/// Random skew form sigma with I^T sigma I = -sigma (real part of a
/// (2,0)-form).
Mat random_anti_invariant_form(const ComplexStructure& i, Rng& rng);

/// Solves h J = sigma, then rescales J on each eigenspace of J^2 by
/// 1/sqrt(-lambda). The result squares to -1 and anticommutes with I.
ComplexStructure anticommuting_partner(const ComplexStructure& i, const Mat& h,
                                       const Mat& sigma);

/// The unique sphere through two non-proportional co-spherical structures.
/// Returns the frame (u, v, uv) where u = I1 and v is I2 orthonormalized
/// against I1.
TwistorSphere sphere_from_pair(const ComplexStructure& i1, const ComplexStructure& i2);

ComplexStructure sphere_point(const TwistorSphere& s, double a, double b, double c);

ComplexStructure conjugate(const GroupElement& g, const ComplexStructure& x);
TwistorSphere conjugate(const GroupElement& g, const TwistorSphere& s);

/// True when both frames span the same 3-dimensional subspace of End(R^{4n}).
bool same_sphere(const TwistorSphere& a, const TwistorSphere& b, double tol = kMembershipTol);

/// e^{tI} = cos t 1 + sin t I.
GroupElement rotation(const ComplexStructure& i, double t);

/// Frobenius-orthonormal basis of {X : XJ = JX}; always 8n^2 elements.
std::vector<Mat> centralizer_basis(const ComplexStructure& j);

/// Frobenius-orthonormal basis of {X : XI = IX, XJ = JX}; always 4n^2
/// elements.
std::vector<Mat> quaternionic_centralizer_basis(const TwistorSphere& s);

}  // namespace twistor
