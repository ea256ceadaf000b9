#include "twistor/quaternionic.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "twistor/error.hpp"

namespace twistor {
namespace {

void require_square_even(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0) {
    std::ostringstream os;
    os << "expected a non-empty square matrix of even size, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::kDimension, os.str());
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": size mismatch " << a << " vs " << b;
    throw Error(ErrorCode::kDimension, os.str());
  }
}

// Scale for residuals of products u*v: 1 for orthogonal frames, larger for
// badly conditioned conjugates.
double product_scale(const Mat& u, const Mat& v) {
  return std::max(1.0, u.norm() * v.norm() / static_cast<double>(u.rows()));
}

std::vector<Mat> checked_kernel(const Mat& op, Eigen::Index dim, Eigen::Index expected,
                                const char* what) {
  const KernelDecomposition kd = kernel_decomposition(op);
  const bool fragile = kd.below_cutoff > 1e-3 * kRankCutoff || kd.above_cutoff < 10 * kRankCutoff;
  if (kd.kernel.cols() != expected || fragile) {
    std::ostringstream os;
    os << what << ": kernel dimension " << kd.kernel.cols() << " (expected " << expected
       << "), largest dropped singular value " << kd.below_cutoff
       << ", smallest kept singular value " << kd.above_cutoff << " (relative)";
    throw Error(ErrorCode::kTolerance, os.str());
  }
  std::vector<Mat> basis;
  basis.reserve(static_cast<std::size_t>(expected));
  for (Eigen::Index k = 0; k < kd.kernel.cols(); ++k) basis.push_back(unvec(kd.kernel.col(k), dim));
  return basis;
}

}  // namespace

ComplexStructure::ComplexStructure(Mat mat, double tol) : mat_(std::move(mat)), n_(0) {
  require_square_even(mat_);
  if (mat_.rows() % 4 != 0) {
    throw Error(ErrorCode::kDimension, "complex structure size must be a multiple of 4, got " +
                                           std::to_string(mat_.rows()));
  }
  n_ = static_cast<int>(mat_.rows() / 4);
  const double res = structure_residual(mat_);
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "matrix is not a complex structure: ||M^2 + 1||_F = " << res;
    throw Error(ErrorCode::kPrecondition, os.str());
  }
  if (!(mat_.determinant() > 0.0)) {
    throw Error(ErrorCode::kPrecondition, "complex structure must have positive determinant");
  }
}

GroupElement::GroupElement(Mat mat, double tol) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() == 0) {
    throw Error(ErrorCode::kDimension, "group element must be a non-empty square matrix");
  }
  Eigen::PartialPivLU<Mat> lu(mat_);
  const double det = lu.determinant();
  if (!(det > 0.0)) {
    throw Error(ErrorCode::kPrecondition, "group element must have positive determinant");
  }
  inv_ = lu.inverse();
  const double res = (mat_ * inv_ - Mat::Identity(mat_.rows(), mat_.rows())).norm();
  if (!(res <= tol * std::max(1.0, mat_.norm() * inv_.norm() / static_cast<double>(mat_.rows())))) {
    std::ostringstream os;
    os << "group element inverse is inaccurate: ||g g^-1 - 1||_F = " << res;
    throw Error(ErrorCode::kSingularity, os.str());
  }
}

GroupElement::GroupElement(Mat mat, Mat inv) : mat_(std::move(mat)), inv_(std::move(inv)) {}

GroupElement GroupElement::identity(Eigen::Index dim) {
  return GroupElement(Mat::Identity(dim, dim), Mat::Identity(dim, dim));
}

GroupElement GroupElement::exp(const Mat& generator) {
  return GroupElement(expm(generator), expm(-generator));
}

TwistorSphere::TwistorSphere(ComplexStructure i, ComplexStructure j, ComplexStructure k,
                             double tol)
    : frame_{std::move(i), std::move(j), std::move(k)} {
  require_same_dim(frame_[0].dim(), frame_[1].dim(), "twistor frame");
  require_same_dim(frame_[0].dim(), frame_[2].dim(), "twistor frame");
  const Mat& I = frame_[0].mat();
  const Mat& J = frame_[1].mat();
  const Mat& K = frame_[2].mat();
  const double scale = product_scale(I, J);
  const double r_ij = (I * J - K).norm();
  const double r_ji = (J * I + K).norm();
  const double ortho = std::abs(frame_inner(I, J)) + std::abs(frame_inner(J, K)) +
                       std::abs(frame_inner(I, K));
  if (!(r_ij <= tol * scale && r_ji <= tol * scale && ortho <= tol * scale)) {
    std::ostringstream os;
    os << "frame violates quaternionic relations: ||IJ-K|| = " << r_ij << ", ||JI+K|| = " << r_ji
       << ", sum |<.,.>| = " << ortho;
    throw Error(ErrorCode::kPrecondition, os.str());
  }
}

double TwistorSphere::distance_to_span(const Mat& m) const {
  require_same_dim(m.rows(), dim(), "sphere membership");
  Mat a(m.size(), 3);
  for (int c = 0; c < 3; ++c) a.col(c) = vec(frame_[c].mat());
  const Vec target = vec(m);
  const Vec coeffs = a.colPivHouseholderQr().solve(target);
  return (a * coeffs - target).norm();
}

ComplexStructure SpherePoint::structure() const {
  return sphere_point(sphere, coords[0], coords[1], coords[2]);
}

double frame_inner(const Mat& u, const Mat& v) {
  // -tr(uv) without forming the product.
  return -u.cwiseProduct(v.transpose()).sum() / static_cast<double>(u.rows());
}

double structure_residual(const Mat& m) {
  require_square_even(m);
  return (m * m + Mat::Identity(m.rows(), m.rows())).norm();
}

bool is_complex_structure(const Mat& m, double tol) {
  if (structure_residual(m) > tol) return false;
  return m.determinant() > 0.0;
}

ComplexStructure standard_structure(int n) {
  if (n < 1) throw Error(ErrorCode::kDimension, "n must be positive");
  const Eigen::Index h = 2 * n;
  Mat m = Mat::Zero(2 * h, 2 * h);
  m.topRightCorner(h, h) = -Mat::Identity(h, h);
  m.bottomLeftCorner(h, h) = Mat::Identity(h, h);
  return ComplexStructure(std::move(m));
}

TwistorSphere canonical_sphere(int n) {
  if (n < 1) throw Error(ErrorCode::kDimension, "n must be positive");
  Eigen::Matrix4d i1, j1;
  i1 << 0, -1, 0, 0,
        1, 0, 0, 0,
        0, 0, 0, -1,
        0, 0, 1, 0;
  j1 << 0, 0, -1, 0,
        0, 0, 0, 1,
        1, 0, 0, 0,
        0, -1, 0, 0;
  const Eigen::Matrix4d k1 = i1 * j1;
  const Eigen::Index dim = 4 * n;
  // Local index j of copy k goes to 2k + j (j < 2) or 2n + 2k + j - 2.
  auto global = [n](int k, int j) { return j < 2 ? 2 * k + j : 2 * n + 2 * k + (j - 2); };
  auto embed = [&](const Eigen::Matrix4d& block) {
    Mat m = Mat::Zero(dim, dim);
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m(global(k, a), global(k, b)) = block(a, b);
    return m;
  };
  return TwistorSphere(ComplexStructure(embed(i1)), ComplexStructure(embed(j1)),
                       ComplexStructure(embed(k1)));
}

ComplexStructure canonical_structure(int n) { return canonical_sphere(n).I(); }

GroupElement random_gl_plus(Eigen::Index dim, Rng& rng) {
  for (;;) {
    Mat g = rng.gaussian_matrix(dim, dim);
    const double det = g.determinant();
    const double hadamard = std::abs(det) / g.colwise().norm().prod();
    if (hadamard < 1e-3) continue;
    if (det < 0.0) g.col(0) = -g.col(0);
    return GroupElement(std::move(g));
  }
}

ComplexStructure random_complex_structure(int n, std::uint64_t seed) {
  Rng rng(seed);
  const GroupElement g = random_gl_plus(4 * n, rng);
  return conjugate(g, canonical_structure(n));
}

Mat compatible_metric(const ComplexStructure& i) {
  const Mat& I = i.mat();
  return 0.5 * (Mat::Identity(I.rows(), I.rows()) + I.transpose() * I);
}

Mat random_anti_invariant_form(const ComplexStructure& i, Rng& rng) {
  const Mat& I = i.mat();
  const Mat raw = rng.gaussian_matrix(I.rows(), I.rows());
  const Mat skew = 0.5 * (raw - raw.transpose());
  return 0.5 * (skew - I.transpose() * skew * I);
}

ComplexStructure anticommuting_partner(const ComplexStructure& i, const Mat& h,
                                       const Mat& sigma) {
  const Mat& I = i.mat();
  const Eigen::Index d = I.rows();
  require_same_dim(h.rows(), d, "anticommuting_partner(h)");
  require_same_dim(h.cols(), d, "anticommuting_partner(h)");
  require_same_dim(sigma.rows(), d, "anticommuting_partner(sigma)");
  require_same_dim(sigma.cols(), d, "anticommuting_partner(sigma)");

  const double hn = h.norm();
  if ((h - h.transpose()).norm() > 1e-12 * hn) {
    throw Error(ErrorCode::kPrecondition, "metric h is not symmetric");
  }
  if ((I.transpose() * h * I - h).norm() > kTolStruct * std::max(1.0, hn) * product_scale(I, I)) {
    throw Error(ErrorCode::kPrecondition, "metric h is not compatible with I");
  }
  Eigen::LLT<Mat> llt(h);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kPrecondition, "metric h is not positive definite");
  }
  const double sn = sigma.norm();
  if ((sigma + sigma.transpose()).norm() > 1e-12 * std::max(1.0, sn) ||
      (I.transpose() * sigma * I + sigma).norm() >
          kTolStruct * std::max(1.0, sn) * product_scale(I, I)) {
    throw Error(ErrorCode::kPrecondition,
                "sigma must be skew with sigma(Ix, Iy) = -sigma(x, y)");
  }
  Eigen::JacobiSVD<Mat> svd_sigma(sigma);
  const Vec& sv = svd_sigma.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) < 1e-12 * sv(0)) {
    throw Error(ErrorCode::kSingularity, "sigma is degenerate");
  }

  // With h = L L^T, Jp = L^T J L^{-T} = L^{-1} sigma L^{-T} is skew-symmetric.
  const Mat L = llt.matrixL();
  const auto Ltri = L.triangularView<Eigen::Lower>();
  const Mat tmp = Ltri.solve(sigma);                              // L^{-1} sigma
  const Mat jp = Ltri.solve(tmp.transpose()).transpose();        // ... L^{-T}
  const Mat jp_skew = 0.5 * (jp - jp.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(jp_skew * jp_skew);
  const Vec& lambda = es.eigenvalues();
  if (lambda.maxCoeff() >= -kTolStruct) {
    std::ostringstream os;
    os << "J^2 has a non-negative eigenvalue " << lambda.maxCoeff();
    throw Error(ErrorCode::kPrecondition, os.str());
  }
  const Vec scale = (-lambda.array()).rsqrt().matrix();
  const Mat f = es.eigenvectors() * scale.asDiagonal() * es.eigenvectors().transpose();
  const Mat jp_unit = jp_skew * f;
  // J = L^{-T} Jp L^T.
  const Mat j = L.transpose().triangularView<Eigen::Upper>().solve(jp_unit * L.transpose());
  return ComplexStructure(j, kTolStruct * product_scale(j, j));
}

TwistorSphere sphere_from_pair(const ComplexStructure& i1, const ComplexStructure& i2) {
  require_same_dim(i1.dim(), i2.dim(), "sphere_from_pair");
  const Mat& u = i1.mat();
  // Proportionality is an angle in Frobenius terms; the trace form is only
  // positive on genuine spheres.
  const double cos_f = (u.array() * i2.mat().array()).sum() / (u.norm() * i2.mat().norm());
  if (std::abs(cos_f) > 1.0 - 1e-8) {
    std::ostringstream os;
    os << "structures are proportional (cosine " << cos_f << ")";
    throw Error(ErrorCode::kDegeneratePair, os.str());
  }
  const double alpha = frame_inner(u, i2.mat());
  const Mat w = i2.mat() - alpha * u;
  const double ww = frame_inner(w, w);
  if (!(std::abs(alpha) < 1.0) || !(ww > 1e-12)) {
    std::ostringstream os;
    os << "pair is not co-spherical: trace-form cosine " << alpha << ", orthogonal part " << ww;
    throw Error(ErrorCode::kNotCospherical, os.str());
  }
  const Mat v = w / std::sqrt(ww);
  const Mat uv = u * v;
  const Eigen::Index d = u.rows();
  const Mat one = Mat::Identity(d, d);
  const double scale = product_scale(u, v) / std::sqrt(1.0 - alpha * alpha);
  const double anti = (uv + v * u).norm();
  const double vsq = (v * v + one).norm();
  const double ksq = (uv * uv + one).norm();
  if (!(anti <= kTolStruct * scale && vsq <= kTolStruct * scale &&
        ksq <= kTolStruct * scale * scale)) {
    std::ostringstream os;
    os << "pair is not co-spherical: ||uv+vu|| = " << anti << ", ||v^2+1|| = " << vsq
       << ", ||(uv)^2+1|| = " << ksq;
    throw Error(ErrorCode::kNotCospherical, os.str());
  }
  return TwistorSphere(i1, ComplexStructure(v, kTolStruct * scale),
                       ComplexStructure(uv, kTolStruct * scale * scale), kTolStruct * scale);
}

ComplexStructure sphere_point(const TwistorSphere& s, double a, double b, double c) {
  const double r = a * a + b * b + c * c;
  if (std::abs(r - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "sphere coordinates must have unit length, got a^2+b^2+c^2 = " << r;
    throw Error(ErrorCode::kNormalization, os.str());
  }
  const double scale = product_scale(s.I().mat(), s.J().mat());
  return ComplexStructure(a * s.I().mat() + b * s.J().mat() + c * s.K().mat(),
                          kTolStruct * scale);
}

ComplexStructure conjugate(const GroupElement& g, const ComplexStructure& x) {
  require_same_dim(g.dim(), x.dim(), "conjugate");
  const double scale = std::max(1.0, g.mat().norm() * g.inv().norm() / static_cast<double>(g.dim()));
  return ComplexStructure(g.mat() * x.mat() * g.inv(),
                          kTolStruct * scale * scale * product_scale(x.mat(), x.mat()));
}

TwistorSphere conjugate(const GroupElement& g, const TwistorSphere& s) {
  const ComplexStructure i = conjugate(g, s.I());
  const ComplexStructure j = conjugate(g, s.J());
  const ComplexStructure k(i.mat() * j.mat(), kTolStruct * product_scale(i.mat(), j.mat()));
  return TwistorSphere(i, j, k, kTolStruct * product_scale(i.mat(), j.mat()));
}

bool same_sphere(const TwistorSphere& a, const TwistorSphere& b, double tol) {
  if (a.dim() != b.dim()) return false;
  for (const auto& x : b.frame())
    if (!a.contains(x.mat(), tol)) return false;
  for (const auto& x : a.frame())
    if (!b.contains(x.mat(), tol)) return false;
  return true;
}

GroupElement rotation(const ComplexStructure& i, double t) {
  const Eigen::Index d = i.dim();
  const Mat one = Mat::Identity(d, d);
  return GroupElement(std::cos(t) * one + std::sin(t) * i.mat(),
                      std::cos(t) * one - std::sin(t) * i.mat());
}

std::vector<Mat> centralizer_basis(const ComplexStructure& j) {
  const Eigen::Index n = j.n();
  return checked_kernel(commutator_operator(j.mat()), j.dim(), 8 * n * n, "centralizer_basis");
}

std::vector<Mat> quaternionic_centralizer_basis(const TwistorSphere& s) {
  const Eigen::Index d = s.dim();
  const Eigen::Index n = s.n();
  Mat op(2 * d * d, d * d);
  op.topRows(d * d) = commutator_operator(s.I().mat());
  op.bottomRows(d * d) = commutator_operator(s.J().mat());
  return checked_kernel(op, d, 4 * n * n, "quaternionic_centralizer_basis");
}

}  // namespace twistor
