#include "twistor/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "twistor/error.hpp"

namespace twistor {
namespace {

double commutes_residual(const Mat& g, const Mat& x) {
  return (g * x - x * g).norm() / std::max(1.0, g.norm() * x.norm() / static_cast<double>(g.rows()));
}

Mat phi_matrix(const PhiProblem& p, const GroupElement& g1, const GroupElement& g2) {
  const Mat m = g1.mat() * g2.mat();
  const Mat m_inv = g2.inv() * g1.inv();
  return m * p.I().mat() * m_inv;
}

Mat combine(const std::vector<Mat>& basis, const Vec& coeffs, Eigen::Index offset) {
  Mat out = Mat::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t k = 0; k < basis.size(); ++k)
    out += coeffs(offset + static_cast<Eigen::Index>(k)) * basis[k];
  return out;
}

double scaled_tol(const Mat& a) {
  return kTolStruct * std::max(1.0, a.squaredNorm() / static_cast<double>(a.rows()));
}

double distance_to_span(const std::vector<const Mat*>& frame, const Mat& m) {
  Mat a(m.size(), static_cast<Eigen::Index>(frame.size()));
  for (std::size_t c = 0; c < frame.size(); ++c) a.col(static_cast<Eigen::Index>(c)) = vec(*frame[c]);
  const Vec target = vec(m);
  const Vec coeffs = a.colPivHouseholderQr().solve(target);
  return (a * coeffs - target).norm();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  return seed * 0x9E3779B97F4A7C15ULL + k * 0xBF58476D1CE4E5B9ULL + 1;
}

}  // namespace

PhiProblem::PhiProblem(ComplexStructure i, ComplexStructure j, ComplexStructure k)
    : i_(std::move(i)), j_(std::move(j)), k_(std::move(k)), independent_(false) {
  if (i_.dim() != j_.dim() || i_.dim() != k_.dim()) {
    throw Error(ErrorCode::kDimension, "PhiProblem: structures of different size");
  }
  // Certifies co-sphericity of (I, J) and places K on their sphere. The pair
  // (I, J) may be proportional only if (I, K) is not.
  const bool ij_ok = std::abs(frame_inner(i_.mat(), j_.mat())) <= 1.0 - 1e-8;
  const TwistorSphere s = ij_ok ? sphere_from_pair(i_, j_) : sphere_from_pair(i_, k_);
  const Mat& third = ij_ok ? k_.mat() : j_.mat();
  const double dist = s.distance_to_span(third);
  if (dist > kMembershipTol * std::max(1.0, third.norm() / std::sqrt(static_cast<double>(third.rows())))) {
    std::ostringstream os;
    os << "PhiProblem: third structure is off the sphere by " << dist;
    throw Error(ErrorCode::kNotCospherical, os.str());
  }
  Mat frame(i_.mat().size(), 3);
  frame.col(0) = vec(i_.mat()).normalized();
  frame.col(1) = vec(j_.mat()).normalized();
  frame.col(2) = vec(k_.mat()).normalized();
  independent_ = numerical_rank(frame) == 3;
  j_basis_ = centralizer_basis(j_);
  k_basis_ = centralizer_basis(k_);
}

ComplexStructure phi(const PhiProblem& p, const GroupElement& g1, const GroupElement& g2) {
  if (g1.dim() != p.I().dim() || g2.dim() != p.I().dim()) {
    throw Error(ErrorCode::kDimension, "phi: group element of wrong size");
  }
  const double r1 = commutes_residual(g1.mat(), p.J().mat());
  const double r2 = commutes_residual(g2.mat(), p.K().mat());
  if (r1 > kMembershipTol || r2 > kMembershipTol) {
    std::ostringstream os;
    os << "phi: g1 must commute with J and g2 with K (residuals " << r1 << ", " << r2 << ")";
    throw Error(ErrorCode::kWrongSubgroup, os.str());
  }
  const Mat m = phi_matrix(p, g1, g2);
  return ComplexStructure(m, scaled_tol(m));
}

Mat phi_jacobian(const PhiProblem& p, const GroupElement& g1, const GroupElement& g2) {
  const Mat value = phi_matrix(p, g1, g2);
  const Mat m = g1.mat() * g2.mat();
  const Mat m_inv = g2.inv() * g1.inv();
  const auto nj = static_cast<Eigen::Index>(p.j_basis().size());
  const auto nk = static_cast<Eigen::Index>(p.k_basis().size());
  Mat jac(value.size(), nj + nk);
  // d/ds phi(g1 e^{sX}, g2) = [g1 X g1^{-1}, phi],
  // d/ds phi(g1, g2 e^{sY}) = [M Y M^{-1}, phi] with M = g1 g2.
  for (Eigen::Index k = 0; k < nj; ++k) {
    const Mat a = g1.mat() * p.j_basis()[static_cast<std::size_t>(k)] * g1.inv();
    jac.col(k) = vec(commutator(a, value));
  }
  for (Eigen::Index k = 0; k < nk; ++k) {
    const Mat a = m * p.k_basis()[static_cast<std::size_t>(k)] * m_inv;
    jac.col(nj + k) = vec(commutator(a, value));
  }
  return jac;
}

int phi_differential_rank(const PhiProblem& p) {
  const GroupElement e = GroupElement::identity(p.I().dim());
  return numerical_rank(phi_jacobian(p, e, e));
}

int fiber_dimension(const PhiProblem& p, const GroupElement& g1, const GroupElement& g2) {
  phi(p, g1, g2);  // membership check
  const Mat jac = phi_jacobian(p, g1, g2);
  return static_cast<int>(jac.cols()) - numerical_rank(jac);
}

PhiSolution solve_phi(const PhiProblem& p, const ComplexStructure& target,
                      const SolverOptions& opts,
                      const std::pair<GroupElement, GroupElement>* seed) {
  if (target.dim() != p.I().dim()) throw Error(ErrorCode::kDimension, "solve_phi: target size");
  if (!p.independent()) {
    throw Error(ErrorCode::kDegenerateProblem,
                "solve_phi: I, J, K are linearly dependent; phi is not a submersion");
  }
  const double dist = (target.mat() - p.I().mat()).norm();
  if (dist > opts.radius) {
    std::ostringstream os;
    os << "solve_phi: target at distance " << dist << " exceeds radius " << opts.radius;
    throw NoConvergence(os.str(), dist);
  }
  GroupElement g1 = seed ? seed->first : GroupElement::identity(p.I().dim());
  GroupElement g2 = seed ? seed->second : GroupElement::identity(p.I().dim());
  if (seed) phi(p, g1, g2);

  const auto nj = static_cast<Eigen::Index>(p.j_basis().size());
  double res = (phi_matrix(p, g1, g2) - target.mat()).norm();
  for (int it = 0; it <= opts.max_iter; ++it) {
    if (res <= opts.tol_solve) return PhiSolution{g1, g2, res, it};
    if (it == opts.max_iter) break;
    const Vec r = vec(phi_matrix(p, g1, g2) - target.mat());
    const Mat jac = phi_jacobian(p, g1, g2);
    const Mat jp = pseudo_inverse(jac, 1e-9);
    const Vec delta = -(jp * r);
    const double slope = (jac * (jp * r)).squaredNorm();
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec step = t * delta;
      GroupElement n1 = g1 * GroupElement::exp(combine(p.j_basis(), step, 0));
      GroupElement n2 = g2 * GroupElement::exp(combine(p.k_basis(), step, nj));
      const double nres = (phi_matrix(p, n1, n2) - target.mat()).norm();
      if (nres * nres <= res * res - 2e-4 * t * slope) {
        g1 = std::move(n1);
        g2 = std::move(n2);
        res = nres;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "solve_phi: line search stalled at iteration " << it << ", residual " << res;
      throw NoConvergence(os.str(), res);
    }
  }
  std::ostringstream os;
  os << "solve_phi: no convergence after " << opts.max_iter << " iterations, residual " << res;
  throw NoConvergence(os.str(), res);
}

PathValidation validate_path(const TwistorPath& path, double tol) {
  PathValidation v;
  std::ostringstream msg;
  if (path.spheres.empty() || path.joints.size() + 1 != path.spheres.size() ||
      path.endpoints.size() != 2) {
    v.message = "malformed path: need m spheres, m-1 joints and 2 endpoints";
    return v;
  }
  bool frames_ok = true;
  for (std::size_t s = 0; s < path.spheres.size(); ++s) {
    const auto& sp = path.spheres[s];
    const Mat& I = sp.I().mat();
    const Mat& J = sp.J().mat();
    const Mat& K = sp.K().mat();
    const Mat one = Mat::Identity(I.rows(), I.rows());
    const double r = std::max({(I * I + one).norm(), (J * J + one).norm(), (K * K + one).norm(),
                               (I * J - K).norm(), (J * I + K).norm()});
    v.max_frame_residual = std::max(v.max_frame_residual, r);
    if (r > kTolStruct * std::max(1.0, I.norm() * J.norm() / static_cast<double>(I.rows()))) {
      frames_ok = false;
      msg << "sphere " << s << " frame residual " << r << "; ";
    }
  }
  for (std::size_t k = 0; k < path.joints.size(); ++k) {
    const Mat& x = path.joints[k].mat();
    const double d = std::max(path.spheres[k].distance_to_span(x),
                              path.spheres[k + 1].distance_to_span(x));
    v.max_joint_distance = std::max(v.max_joint_distance, d);
    v.max_joint_square_residual =
        std::max(v.max_joint_square_residual, structure_residual(x));
    if (d > tol) msg << "joint " << k << " off its spheres by " << d << "; ";
  }
  v.max_endpoint_distance = std::max(path.spheres.front().distance_to_span(path.endpoints[0].mat()),
                                     path.spheres.back().distance_to_span(path.endpoints[1].mat()));
  if (v.max_endpoint_distance > tol) {
    msg << "endpoint off its sphere by " << v.max_endpoint_distance << "; ";
  }
  v.ok = frames_ok && v.max_joint_distance <= tol && v.max_endpoint_distance <= tol &&
         v.max_joint_square_residual <= kTolStruct * 1e2;
  v.message = v.ok ? "ok" : msg.str();
  return v;
}

ComplexStructure default_partner(const ComplexStructure& i, std::uint64_t seed) {
  Rng rng(seed);
  const Mat sigma = random_anti_invariant_form(i, rng);
  return anticommuting_partner(i, compatible_metric(i), sigma);
}

TwistorPath three_sphere_path(const ComplexStructure& i1, const ComplexStructure& i2,
                              const ComplexStructure& j, const SolverOptions& opts) {
  const Mat k_mat = i1.mat() * j.mat();
  const ComplexStructure k(k_mat, scaled_tol(k_mat));
  const PhiProblem problem(i1, j, k);
  const PhiSolution sol = solve_phi(problem, i2, opts);
  const TwistorSphere s1(i1, j, k, kTolStruct * std::max(1.0, i1.mat().norm() * j.mat().norm() /
                                                                  static_cast<double>(i1.dim())));
  TwistorPath path;
  path.spheres.push_back(s1);
  path.spheres.push_back(conjugate(sol.g1, s1));
  path.spheres.push_back(conjugate(sol.g1 * sol.g2, s1));
  path.joints.push_back(j);
  path.joints.push_back(conjugate(sol.g1, k));
  path.endpoints = {i1, i2};
  return path;
}

TwistorPath three_sphere_path(const ComplexStructure& i1, const ComplexStructure& i2,
                              const PathOptions& opts) {
  const int attempts = opts.joint_filter ? std::max(1, opts.max_resample) : 1;
  for (int a = 0; a < attempts; ++a) {
    const ComplexStructure j = default_partner(i1, mix_seed(opts.seed, static_cast<std::uint64_t>(a)));
    TwistorPath path = three_sphere_path(i1, i2, j, static_cast<const SolverOptions&>(opts));
    if (!opts.joint_filter) return path;
    const bool pass = std::all_of(path.joints.begin(), path.joints.end(),
                                  [&](const ComplexStructure& x) { return opts.joint_filter(x); });
    if (pass) return path;
  }
  throw Error(ErrorCode::kPathing, "no partner produced joints accepted by the filter after " +
                                       std::to_string(attempts) + " draws");
}

namespace {

// Direct candidate plus random ones; the shortest real logarithm wins.
// `fallback` receives a well-conditioned intertwiner even when none of the
// candidates has a real logarithm.
std::optional<Intertwiner> search_intertwiner(const ComplexStructure& i1, const ComplexStructure& i2,
                                              const SolverOptions& opts, std::optional<Mat>* fallback) {
  if (i1.dim() != i2.dim()) throw Error(ErrorCode::kDimension, "intertwiner: size mismatch");
  const Eigen::Index d = i1.dim();
  const Mat one = Mat::Identity(d, d);
  auto conditioned = [&](const Mat& g) {
    Eigen::JacobiSVD<Mat> svd(g);
    const Vec& s = svd.singularValues();
    return s(s.size() - 1) >= 1e-8 * s(0) && g.determinant() > 0.0 &&
           (g * i1.mat() - i2.mat() * g).norm() <= 1e-8 * std::max(1.0, i2.mat().norm()) * g.norm();
  };
  auto accept = [&](const Mat& g) -> std::optional<Intertwiner> {
    if (!conditioned(g)) return std::nullopt;
    if (fallback && !*fallback) *fallback = g;
    auto log = real_logm(g);
    if (!log) return std::nullopt;
    return Intertwiner{GroupElement(g), std::move(*log)};
  };
  // (1 - I2 I1)/2 intertwines and is close to 1 for nearby pairs. Random
  // candidates route through the canonical structure: c_k = R - I_k R I0
  // satisfies c_k I0 = I_k c_k, and the sign of det c_k fixes the orbit.
  std::optional<Intertwiner> best = accept(0.5 * (one - i2.mat() * i1.mat()));
  const Mat i0 = canonical_structure(i1.n()).mat();
  Rng rng(mix_seed(opts.seed, 0x1f));
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    const Mat r = rng.gaussian_matrix(d, d);
    const Mat c1 = r - i1.mat() * r * i0;
    const Mat c2 = r - i2.mat() * r * i0;
    const double det1 = c1.determinant();
    const double det2 = c2.determinant();
    if (det1 == 0.0 || det2 == 0.0) continue;
    if ((det1 > 0.0) != (det2 > 0.0)) {
      throw Error(ErrorCode::kPathing,
                  "structures induce opposite orientations; they lie in different components");
    }
    auto cand = accept(c2 * c1.partialPivLu().inverse());
    if (cand && (!best || cand->log.norm() < best->log.norm())) best = std::move(cand);
  }
  return best;
}

// g = Q P with P = sqrt(g^T g); both factors have real logarithms when Q
// has no eigenvalue -1. Returned in application order: log P, then log Q.
std::vector<Mat> polar_legs(const Mat& g) {
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat& u = svd.matrixU();
  const Mat& v = svd.matrixV();
  const Vec logs = svd.singularValues().array().log().matrix();
  const Mat log_p = v * logs.asDiagonal() * v.transpose();
  auto log_q = real_logm(u * v.transpose());
  if (!log_q) throw Error(ErrorCode::kPathing, "orthogonal polar factor has no real logarithm");
  return {log_p, 0.5 * (*log_q - log_q->transpose())};
}

}  // namespace

Intertwiner find_intertwiner(const ComplexStructure& i1, const ComplexStructure& i2,
                             const SolverOptions& opts) {
  if (auto best = search_intertwiner(i1, i2, opts, nullptr)) return *best;
  throw Error(ErrorCode::kPathing, "no intertwiner with a real logarithm after " +
                                       std::to_string(opts.max_retries) + " retries");
}

std::vector<double> subdivide(const ComplexStructure& i1, const Mat& log, double radius) {
  auto point = [&](double t) { return Mat(expm(t * log) * i1.mat() * expm(-t * log)); };
  std::vector<double> times{0.0};
  // Depth-first bisection keeps the output sorted.
  struct Interval { double a, b; Mat pa, pb; int depth; };
  std::vector<Interval> stack{{0.0, 1.0, i1.mat(), point(1.0), 0}};
  while (!stack.empty()) {
    Interval iv = std::move(stack.back());
    stack.pop_back();
    if ((iv.pa - iv.pb).norm() <= radius / 2) {
      times.push_back(iv.b);
      continue;
    }
    if (iv.depth >= 30) throw Error(ErrorCode::kPathing, "subdivision did not resolve");
    const double mid = 0.5 * (iv.a + iv.b);
    Mat pm = point(mid);
    stack.push_back({mid, iv.b, pm, iv.pb, iv.depth + 1});
    stack.push_back({iv.a, mid, iv.pa, pm, iv.depth + 1});
  }
  return times;
}

ComplexStructure nearby_structure(const ComplexStructure& i, double distance, Rng& rng) {
  if (!(distance >= 0.0)) throw Error(ErrorCode::kPrecondition, "nearby_structure: negative distance");
  if (distance == 0.0) return i;
  Mat x = rng.gaussian_matrix(i.dim(), i.dim());
  x /= x.norm();
  auto at = [&](double e) { return Mat(expm(e * x) * i.mat() * expm(-e * x)); };
  double lo = 0.0, hi = 1e-3;
  for (int k = 0; (at(hi) - i.mat()).norm() < distance; ++k) {
    if (k == 60) throw Error(ErrorCode::kPrecondition, "nearby_structure: distance not reachable");
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    ((at(mid) - i.mat()).norm() < distance ? lo : hi) = mid;
  }
  // lo stays on the near side, so the distance never exceeds the request.
  const Mat m = at(lo);
  return ComplexStructure(m, scaled_tol(m));
}

TwistorPath global_path(const ComplexStructure& i1, const ComplexStructure& i2,
                        const PathOptions& opts) {
  if (i1.dim() != i2.dim()) throw Error(ErrorCode::kDimension, "global_path: size mismatch");
  if ((i1.mat() - i2.mat()).norm() <= opts.radius / 2) return three_sphere_path(i1, i2, opts);

  std::optional<Mat> fallback;
  std::vector<Mat> legs;
  if (auto inter = search_intertwiner(i1, i2, opts, &fallback)) {
    legs.push_back(inter->log);
  } else if (fallback) {
    legs = polar_legs(*fallback);
  } else {
    throw Error(ErrorCode::kPathing, "no well-conditioned intertwiner after " +
                                         std::to_string(opts.max_retries) + " retries");
  }

  std::vector<ComplexStructure> points{i1};
  for (std::size_t leg = 0; leg < legs.size(); ++leg) {
    const ComplexStructure start = points.back();
    const std::vector<double> times = subdivide(start, legs[leg], opts.radius);
    const bool last = leg + 1 == legs.size();
    for (std::size_t k = 1; k < times.size(); ++k) {
      if (last && k + 1 == times.size()) break;
      const Mat x = expm(times[k] * legs[leg]) * start.mat() * expm(-times[k] * legs[leg]);
      points.emplace_back(x, scaled_tol(x));
    }
  }
  if ((points.back().mat() - i2.mat()).norm() > opts.radius / 2) {
    throw Error(ErrorCode::kPathing, "interpolation does not end near the target");
  }
  points.push_back(i2);

  TwistorPath path;
  path.endpoints = {i1, i2};
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    PathOptions seg = opts;
    seg.seed = mix_seed(opts.seed, k + 1);
    TwistorPath part = three_sphere_path(points[k], points[k + 1], seg);
    if (k > 0) path.joints.push_back(points[k]);
    path.spheres.insert(path.spheres.end(), part.spheres.begin(), part.spheres.end());
    path.joints.insert(path.joints.end(), part.joints.begin(), part.joints.end());
  }
  return path;
}

RankReport cone_parametrization_rank(const ComplexStructure& i, const ComplexStructure& j,
                                     const ComplexStructure& k) {
  const std::vector<Mat> basis = centralizer_basis(i);
  Mat cols(j.mat().size(), static_cast<Eigen::Index>(basis.size()) + 1);
  for (std::size_t c = 0; c < basis.size(); ++c)
    cols.col(static_cast<Eigen::Index>(c)) = vec(commutator(basis[c], j.mat()));
  cols.col(cols.cols() - 1) = vec(commutator(k.mat(), j.mat()));
  RankReport out;
  out.rank = numerical_rank(cols);
  out.expected = 4 * i.n() * i.n() + 1;
  out.precondition_ok = distance_to_span({&i.mat(), &j.mat()}, k.mat()) >
                        kMembershipTol * std::max(1.0, k.mat().norm());
  return out;
}

RankReport n_i_tangent_rank(const ComplexStructure& i, const ComplexStructure& j) {
  const std::vector<Mat> basis = centralizer_basis(i);
  Mat cols(j.mat().size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c)
    cols.col(static_cast<Eigen::Index>(c)) = vec(commutator(basis[c], j.mat()));
  RankReport out;
  out.rank = numerical_rank(cols);
  out.expected = 4 * i.n() * i.n();
  out.precondition_ok = (i.mat() * j.mat() + j.mat() * i.mat()).norm() <=
                        kTolStruct * std::max(1.0, i.mat().norm() * j.mat().norm());
  return out;
}

RankReport m_i_rank(const ComplexStructure& i, const ComplexStructure& j) {
  const std::vector<Mat> basis = centralizer_basis(i);
  const Vec rot = vec(commutator(i.mat(), j.mat())).normalized();
  Mat cols(j.mat().size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) {
    Vec col = vec(commutator(basis[c], j.mat()));
    col -= rot.dot(col) * rot;
    cols.col(static_cast<Eigen::Index>(c)) = col;
  }
  RankReport out;
  out.rank = numerical_rank(cols);
  out.expected = 4 * i.n() * i.n() - 1;
  out.precondition_ok = (i.mat() * j.mat() + j.mat() * i.mat()).norm() <=
                        kTolStruct * std::max(1.0, i.mat().norm() * j.mat().norm());
  return out;
}

PsiImage psi_forward(const ComplexStructure& i1, const ComplexStructure& i2,
                     const ComplexStructure& j, const ComplexStructure& k,
                     const SolverOptions& opts) {
  const PhiProblem problem(i1, j, k);
  const PhiSolution sol = solve_phi(problem, i2, opts);
  const GroupElement m = sol.g1 * sol.g2;
  return PsiImage{conjugate(m, sphere_from_pair(j, k)), conjugate(m, k), conjugate(m, j), sol.g1,
                  sol.g2};
}

double psi_roundtrip_residual(const ComplexStructure& i1, const ComplexStructure& i2,
                              const ComplexStructure& j, const ComplexStructure& k,
                              const SolverOptions& opts) {
  const PsiImage fwd = psi_forward(i1, i2, j, k, opts);
  const GroupElement& f1 = fwd.f1;
  const GroupElement& f2 = fwd.f2;
  const std::pair<GroupElement, GroupElement> seed{
      f1 * f2.inverse() * f1.inverse(),
      f1 * f2 * f1.inverse() * f2.inverse() * f1.inverse()};
  const PhiProblem back(i2, fwd.first, fwd.second);
  const PhiSolution sol = solve_phi(back, i1, opts, &seed);
  const GroupElement m = sol.g1 * sol.g2;
  const Mat j_back = m.mat() * fwd.second.mat() * m.inv();
  const Mat k_back = m.mat() * fwd.first.mat() * m.inv();
  return std::max((j_back - j.mat()).norm(), (k_back - k.mat()).norm());
}

}  // namespace twistor
