#include "twistor/lattice_genericity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "twistor/error.hpp"
#include "twistor/lattice_reduction.hpp"

namespace twistor {
namespace {

using cd = std::complex<double>;

bool rational_structure(const RationalMatrix& i) {
  const RationalMatrix sq = i * i + RationalMatrix::identity(i.rows());
  return sq.is_zero();
}

// Greedy exact selection of linearly independent integer vectors.
std::vector<IntVector> independent_subset(const std::vector<IntVector>& vs) {
  std::vector<IntVector> kept;
  for (const auto& v : vs) {
    RationalMatrix m(static_cast<int>(kept.size() + 1), static_cast<int>(v.size()));
    for (std::size_t r = 0; r < kept.size(); ++r)
      for (std::size_t c = 0; c < v.size(); ++c) m(static_cast<int>(r), static_cast<int>(c)) = kept[r][c];
    for (std::size_t c = 0; c < v.size(); ++c) m(static_cast<int>(kept.size()), static_cast<int>(c)) = v[c];
    if (rank(m) == static_cast<int>(kept.size()) + 1) kept.push_back(v);
  }
  return kept;
}

RationalMatrix form_from_integers(const IntVector& x, int dim) {
  RationalMatrix out(dim, dim);
  const auto pairs = alternating_pairs(dim);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    out(pairs[p].first, pairs[p].second) = x[p];
    out(pairs[p].second, pairs[p].first) = -x[p];
  }
  return out;
}

Mat locus_operator(const Mat& omega) {
  const Eigen::Index d = omega.rows();
  Mat op(d * d, d * d);
  for (Eigen::Index k = 0; k < d * d; ++k) {
    Mat e = Mat::Zero(d, d);
    e(k % d, k / d) = 1.0;
    op.col(k) = vec(e.transpose() * omega + omega * e);
  }
  return op;
}

int locus_kernel_dim(const Mat& base, const Mat& omega) {
  Mat stacked(base.rows() + omega.size(), base.cols());
  stacked.topRows(base.rows()) = base;
  stacked.bottomRows(omega.size()) = locus_operator(omega / omega.norm());
  return static_cast<int>(numerical_kernel(stacked).cols());
}

}  // namespace

std::string_view to_string(NSMethod m) {
  return m == NSMethod::kExactRational ? "exact_rational" : "height_bounded";
}

std::string_view to_string(LocusDecision d) {
  return d == LocusDecision::kContained ? "contained" : "finite_intersection";
}

std::vector<std::pair<int, int>> alternating_pairs(int dim) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) out.emplace_back(a, b);
  return out;
}

Mat alternating_from_coords(const Vec& x, int dim) {
  Mat out = Mat::Zero(dim, dim);
  const auto pairs = alternating_pairs(dim);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    out(pairs[p].first, pairs[p].second) = x(static_cast<Eigen::Index>(p));
    out(pairs[p].second, pairs[p].first) = -x(static_cast<Eigen::Index>(p));
  }
  return out;
}

Vec alternating_coords(const Mat& omega) {
  const auto pairs = alternating_pairs(static_cast<int>(omega.rows()));
  Vec x(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p)
    x(static_cast<Eigen::Index>(p)) = omega(pairs[p].first, pairs[p].second);
  return x;
}

Mat invariance_operator(const Mat& i) {
  const int dim = static_cast<int>(i.rows());
  const auto pairs = alternating_pairs(dim);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Mat op(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    Mat e = Mat::Zero(dim, dim);
    e(pairs[static_cast<std::size_t>(p)].first, pairs[static_cast<std::size_t>(p)].second) = 1.0;
    e(pairs[static_cast<std::size_t>(p)].second, pairs[static_cast<std::size_t>(p)].first) = -1.0;
    op.col(p) = alternating_coords(i.transpose() * e * i - e);
  }
  return op;
}

RationalMatrix invariance_operator(const RationalMatrix& i) {
  const int dim = i.rows();
  const auto pairs = alternating_pairs(dim);
  const int n = static_cast<int>(pairs.size());
  const RationalMatrix it = i.transpose();
  RationalMatrix op(n, n);
  for (int p = 0; p < n; ++p) {
    const auto [a, b] = pairs[static_cast<std::size_t>(p)];
    // (I^T E I)_{rs} = I_{a r} I_{b s} - I_{b r} I_{a s} for E = E_ab - E_ba.
    for (int q = 0; q < n; ++q) {
      const auto [r, s] = pairs[static_cast<std::size_t>(q)];
      op(q, p) = it(r, a) * i(b, s) - it(r, b) * i(a, s);
    }
    op(p, p) -= 1;
  }
  return op;
}

NSReport ns_rank_exact(const RationalMatrix& i) {
  if (i.rows() != i.cols() || i.rows() % 4 != 0) {
    throw Error(ErrorCode::kDimension, "ns_rank: structure must be 4n x 4n");
  }
  if (!rational_structure(i)) {
    throw Error(ErrorCode::kMode, "ns_rank: rational matrix does not square to -1 exactly");
  }
  NSReport rep;
  rep.method = NSMethod::kExactRational;
  for (const auto& v : kernel(invariance_operator(i)))
    rep.basis.push_back(form_from_integers(primitive_integer(v), i.rows()));
  rep.rank = static_cast<int>(rep.basis.size());
  return rep;
}

NSReport ns_rank(const ComplexStructure& i, const NSOptions& opts) {
  if (opts.method == NSMethod::kExactRational) {
    auto q = rationalize(i.mat());
    if (!q) {
      throw Error(ErrorCode::kMode,
                  "ns_rank: exact mode needs a rational structure; use height-bounded mode");
    }
    return ns_rank_exact(*q);
  }

  if (opts.height < 1) throw Error(ErrorCode::kPrecondition, "ns_rank: height must be positive");
  NSReport rep;
  rep.method = NSMethod::kHeightBounded;
  rep.height_bound = opts.height;
  const int dim = static_cast<int>(i.dim());
  const Mat t = invariance_operator(i.mat());
  const KernelDecomposition kd = kernel_decomposition(t);
  if (kd.kernel.cols() == 0) return rep;

  const Mat& q = kd.cokernel;  // orthonormal complement of the real kernel
  const auto n = t.cols();
  const double h = static_cast<double>(opts.height);
  const double eps = opts.epsilon_factor * h;
  const double scale = 16.0 * static_cast<double>(n) * h / eps;
  std::vector<IntVector> basis(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    IntVector& row = basis[static_cast<std::size_t>(r)];
    row.assign(static_cast<std::size_t>(n + q.cols()), mpz_class(0));
    row[static_cast<std::size_t>(r)] = 1;
    for (Eigen::Index c = 0; c < q.cols(); ++c)
      row[static_cast<std::size_t>(n + c)] = mpz_class(std::round(scale * q(r, c)));
  }
  lll_reduce(basis);

  const mpz_class bound(opts.height);
  std::vector<IntVector> accepted;
  for (const auto& row : basis) {
    IntVector x(row.begin(), row.begin() + n);
    bool small = true;
    bool nonzero = false;
    for (const auto& v : x) {
      if (mpz_cmpabs(v.get_mpz_t(), bound.get_mpz_t()) > 0) small = false;
      if (v != 0) nonzero = true;
    }
    if (!small || !nonzero) continue;
    Vec xd(n);
    for (Eigen::Index k = 0; k < n; ++k) xd(k) = x[static_cast<std::size_t>(k)].get_d();
    const double dist = (q.transpose() * xd).norm();
    if (dist > eps) continue;
    rep.max_kernel_distance = std::max(rep.max_kernel_distance, dist);
    accepted.push_back(std::move(x));
  }
  for (const auto& x : independent_subset(accepted)) rep.basis.push_back(form_from_integers(x, dim));
  rep.rank = static_cast<int>(rep.basis.size());
  return rep;
}

Mat i_conjugate_form(const ComplexStructure& i, const Mat& omega) {
  return i.mat().transpose() * omega * i.mat();
}

LocusReport locus_solution_dimension(const ComplexStructure& i, const ComplexStructure& j,
                                     const Mat& omega) {
  const Eigen::Index d = i.dim();
  if (j.dim() != d || omega.rows() != d || omega.cols() != d) {
    throw Error(ErrorCode::kDimension, "locus_solution_dimension: size mismatch");
  }
  const double on = omega.norm();
  if (!(on > 1e-12)) throw Error(ErrorCode::kDegenerateInput, "omega is zero");
  if ((omega + omega.transpose()).norm() > 1e-12 * on) {
    throw Error(ErrorCode::kInvalidForm, "omega is not skew-symmetric");
  }
  if ((i.mat() * j.mat() + j.mat() * i.mat()).norm() >
      kTolStruct * std::max(1.0, i.mat().norm() * j.mat().norm() / static_cast<double>(d))) {
    throw Error(ErrorCode::kPrecondition, "I and J must anticommute");
  }
  const int n = i.n();
  Mat base(2 * d * d, d * d);
  base.topRows(d * d) = commutator_operator(i.mat()) / i.mat().norm();
  base.bottomRows(d * d) = anticommutator_operator(j.mat()) / j.mat().norm();
  const int v_dim = static_cast<int>(numerical_kernel(base).cols());
  if (v_dim != 4 * n * n) {
    throw Error(ErrorCode::kTolerance, "space of Y commuting with I and anticommuting with J has dimension " +
                                           std::to_string(v_dim));
  }

  LocusReport rep;
  Mat stacked(base.rows() + d * d, d * d);
  stacked.topRows(base.rows()) = base;
  stacked.bottomRows(d * d) = locus_operator(omega / on);
  const Mat ker = numerical_kernel(stacked);
  rep.dim = static_cast<int>(ker.cols());
  rep.codim = 4 * n * n - rep.dim;
  rep.bound = 4 * n - 3;
  rep.bound_holds = rep.codim >= rep.bound;
  rep.j_invariant = (j.mat().transpose() * omega * j.mat() - omega).norm() <=
                    1e-9 * on * std::max(1.0, j.mat().squaredNorm() / static_cast<double>(d));

  const Mat omega_i = i_conjugate_form(i, omega);
  const Mat plus = 0.5 * (omega + omega_i);
  const Mat minus = 0.5 * (omega - omega_i);
  rep.dim_invariant_part = plus.norm() > 1e-12 * on ? locus_kernel_dim(base, plus) : 4 * n * n;
  rep.dim_anti_invariant_part = minus.norm() > 1e-12 * on ? locus_kernel_dim(base, minus) : 4 * n * n;

  for (Eigen::Index k = 0; k < ker.cols(); ++k) {
    Mat y = unvec(ker.col(k), d);
    const double r = std::max({(y * i.mat() - i.mat() * y).norm(), (y * j.mat() + j.mat() * y).norm(),
                               (y.transpose() * omega + omega * y).norm() / on});
    rep.basis_residual = std::max(rep.basis_residual, r);
    rep.basis.push_back(std::move(y));
  }
  return rep;
}

Mat random_locus_form(const ComplexStructure& i, const ComplexStructure& j, bool invariant,
                      Rng& rng) {
  const Eigen::Index d = i.dim();
  for (;;) {
    const Mat raw = rng.gaussian_matrix(d, d);
    const Mat s = raw - raw.transpose();
    const Mat oj = 0.5 * (s + j.mat().transpose() * s * j.mat());
    const Mat oi = i.mat().transpose() * oj * i.mat();
    const Mat out = invariant ? Mat(0.5 * (oj + oi)) : Mat(0.5 * (oj - oi));
    if (out.norm() > 1e-6) return out;
  }
}

SphereLocusReport sphere_locus_decision(const TwistorSphere& s, const Mat& omega, int m,
                                        std::uint64_t seed) {
  if (m < 20) throw Error(ErrorCode::kPrecondition, "sphere_locus_decision needs m >= 20");
  if (omega.rows() != s.dim() || omega.cols() != s.dim()) {
    throw Error(ErrorCode::kDimension, "sphere_locus_decision: size mismatch");
  }
  Rng rng(seed);
  SphereLocusReport rep;
  rep.samples = m;
  bool contained = true;
  for (int k = 0; k < m; ++k) {
    Eigen::Vector3d p(rng.gaussian(), rng.gaussian(), rng.gaussian());
    while (p.norm() < 1e-6) p = Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian());
    p.normalize();
    const Mat lambda = sphere_point(s, p(0), p(1), p(2)).mat();
    const double r = (lambda.transpose() * omega * lambda - omega).norm();
    const double thr = 1e-8 * std::max(1.0, omega.norm()) *
                       std::max(1.0, lambda.squaredNorm() / static_cast<double>(lambda.rows()));
    rep.max_residual = std::max(rep.max_residual, r);
    if (!(r < thr)) contained = false;
  }
  rep.decision = contained ? LocusDecision::kContained : LocusDecision::kFiniteIntersection;
  return rep;
}

Mat q_form(double b, double c, double d) {
  Mat q(4, 4);
  q << 0, -b, c, -d,
       b, 0, d, c,
       -c, -d, 0, b,
       d, -c, -b, 0;
  return q;
}

std::array<double, 3> q_form_params(const Mat& q) {
  if (q.rows() != 4 || q.cols() != 4) throw Error(ErrorCode::kInvalidForm, "Q must be 4x4");
  const std::array<double, 3> p{q(1, 0), q(0, 2), q(1, 2)};
  if ((q_form(p[0], p[1], p[2]) - q).norm() > 1e-12 * std::max(1.0, q.norm())) {
    throw Error(ErrorCode::kInvalidForm, "Q is not in the invariant family of the canonical sphere");
  }
  return p;
}

FormFamily invariant_form_family(const TwistorSphere& s) {
  if (s.n() != 1) {
    throw Error(ErrorCode::kUnsupportedSize, "invariant_form_family is implemented for n = 1");
  }
  FormFamily fam;
  auto ri = rationalize(s.I().mat());
  auto rj = rationalize(s.J().mat());
  if (ri && rj && rational_structure(*ri) && rational_structure(*rj)) {
    const RationalMatrix ti = invariance_operator(*ri);
    const RationalMatrix tj = invariance_operator(*rj);
    RationalMatrix stacked(ti.rows() + tj.rows(), ti.cols());
    for (int r = 0; r < ti.rows(); ++r)
      for (int c = 0; c < ti.cols(); ++c) {
        stacked(r, c) = ti(r, c);
        stacked(ti.rows() + r, c) = tj(r, c);
      }
    for (const auto& v : kernel(stacked))
      fam.basis.push_back(form_from_integers(primitive_integer(v), 4).to_double());
    fam.exact = true;
    return fam;
  }
  const Mat ti = invariance_operator(s.I().mat());
  const Mat tj = invariance_operator(s.J().mat());
  Mat stacked(ti.rows() + tj.rows(), ti.cols());
  stacked << ti / std::max(1.0, ti.norm()), tj / std::max(1.0, tj.norm());
  const Mat ker = numerical_kernel(stacked);
  for (Eigen::Index k = 0; k < ker.cols(); ++k) fam.basis.push_back(alternating_from_coords(ker.col(k), 4));
  return fam;
}

double riemann_closed_form(cd u, cd v, double b, double c, double d) {
  const double u1 = u.real(), u2 = u.imag(), v1 = v.real(), v2 = v.imag();
  const double cross = u1 * v2 - u2 * v1;
  const double s = 1.0 + std::norm(u) + std::norm(v);
  return b * b * (4.0 * cross * cross - s * s) - 4.0 * (u2 * c - v2 * d) * (u2 * c - v2 * d) -
         4.0 * (v2 * c + u2 * d) * (v2 * c + u2 * d);
}

RiemannCertificate riemann_certificate(cd u, cd v, const Mat& q) {
  const auto [b, c, d] = q_form_params(q);
  if (b == 0.0 && c == 0.0 && d == 0.0) throw Error(ErrorCode::kInvalidForm, "Q is zero");
  const double constraint = std::abs(u * u + v * v + 1.0);
  if (constraint > 1e-10 * std::max(1.0, std::norm(u) + std::norm(v))) {
    std::ostringstream os;
    os << "period is off the twistor line: |u^2 + v^2 + 1| = " << constraint;
    throw Error(ErrorCode::kPrecondition, os.str());
  }
  CMat omega(2, 4);
  omega << 1.0, 0.0, u, v,
           0.0, 1.0, v, -u;
  const Mat q_inv = q.inverse();
  const CMat first = omega * q_inv.cast<cd>() * omega.transpose();
  RiemannCertificate cert;
  cert.first_relation_residual = first.norm() / (omega.squaredNorm() * q_inv.norm());
  cert.hermitian = cd(0.0, 1.0) * omega * q.cast<cd>() * omega.conjugate().transpose();
  cert.determinant = cert.hermitian.determinant().real();
  cert.closed_form = riemann_closed_form(u, v, b, c, d);
  cert.determinant_mismatch =
      std::abs(cert.determinant - cert.closed_form) / std::max(1.0, std::abs(cert.closed_form));
  cert.positive_definite = cert.hermitian(0, 0).real() > 0.0 && cert.determinant > 0.0;
  return cert;
}

std::pair<cd, cd> sample_uv(Rng& rng) {
  const double u1 = rng.gaussian();
  const double v1 = rng.gaussian();
  const double nx = std::hypot(u1, v1);
  const double ny = std::sqrt(nx * nx + 1.0);
  double u2 = 0.0, v2 = 0.0;
  if (nx > 1e-12) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    u2 = -sign * ny * v1 / nx;
    v2 = sign * ny * u1 / nx;
  } else {
    const double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    u2 = ny * std::cos(theta);
    v2 = ny * std::sin(theta);
  }
  return {cd(u1, u2), cd(v1, v2)};
}

double riemann_identity_residual(cd u, cd v) {
  const double x2 = u.real() * u.real() + v.real() * v.real();
  const double y2 = u.imag() * u.imag() + v.imag() * v.imag();
  return 4.0 * x2 * y2 - (x2 + y2) * (x2 + y2) + 1.0;
}

}  // namespace twistor
