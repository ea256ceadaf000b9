#include "twistor/period_charts.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "twistor/error.hpp"

namespace twistor {
namespace {

using cd = std::complex<double>;
constexpr double kChartRcond = 1e-12;
// Sampled points whose chart block is this badly conditioned are skipped.
constexpr double kSampleRcond = 1e-6;

double rcond(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

cd minor_det(const CMat& full, const std::vector<int>& cols) {
  const Eigen::Index k = full.rows();
  CMat sub(k, k);
  for (Eigen::Index c = 0; c < k; ++c) sub.col(c) = full.col(cols[static_cast<std::size_t>(c)]);
  return sub.partialPivLu().determinant();
}

CMat full_period(const PeriodMatrix& p) {
  const Eigen::Index h = 2 * p.n;
  CMat full(h, 2 * h);
  full.leftCols(h) = CMat::Identity(h, h);
  full.rightCols(h) = p.Z;
  return full;
}

// Signed coordinate of an ordered tuple of distinct columns.
cd signed_coord(const PlueckerVector& p, const std::map<std::vector<int>, Eigen::Index>& index,
                std::vector<int> cols) {
  int sign = 1;
  for (std::size_t i = 0; i < cols.size(); ++i)
    for (std::size_t j = 0; j + 1 < cols.size() - i; ++j)
      if (cols[j] > cols[j + 1]) {
        std::swap(cols[j], cols[j + 1]);
        sign = -sign;
      }
  return static_cast<double>(sign) * p.coords(index.at(cols));
}

}  // namespace

PeriodMatrix::PeriodMatrix(int n_, CMat z) : n(n_), Z(std::move(z)) {
  if (n < 1 || Z.rows() != 2 * n || Z.cols() != 2 * n) {
    std::ostringstream os;
    os << "period matrix for n = " << n << " must be " << 2 * n << "x" << 2 * n << ", got "
       << Z.rows() << "x" << Z.cols();
    throw Error(ErrorCode::kDimension, os.str());
  }
}

ComplexStructure complex_structure_from_period(const PeriodMatrix& p) {
  const Eigen::Index h = 2 * p.n;
  const Mat x = p.Z.real();
  const Mat y = p.Z.imag();
  if (rcond(y) < kChartRcond) {
    throw Error(ErrorCode::kOutsideChart, "Im Z is singular; (1|Z) meets the real subspace");
  }
  Eigen::PartialPivLU<Mat> lu(y);
  const Mat c = lu.inverse();
  const Mat d = lu.solve(x);
  Mat m(2 * h, 2 * h);
  m.topLeftCorner(h, h) = -x * c;
  m.topRightCorner(h, h) = -y - x * d;
  m.bottomLeftCorner(h, h) = c;
  m.bottomRightCorner(h, h) = d;
  const double scale = std::max(1.0, m.squaredNorm() / static_cast<double>(2 * h));
  return ComplexStructure(std::move(m), kTolStruct * scale);
}

double chart_condition(const ComplexStructure& i) {
  const Eigen::Index h = i.dim() / 2;
  return rcond(i.mat().bottomLeftCorner(h, h));
}

PeriodMatrix period_from_complex_structure(const ComplexStructure& i) {
  const Eigen::Index h = i.dim() / 2;
  const Mat a = i.mat().topLeftCorner(h, h);
  const Mat c = i.mat().bottomLeftCorner(h, h);
  const double rc = rcond(c);
  if (rc < kChartRcond) {
    std::ostringstream os;
    os << "block C (rows " << h << ".." << 2 * h - 1 << ", columns 0.." << h - 1
       << ") is singular, reciprocal condition " << rc;
    throw Error(ErrorCode::kOutsideChart, os.str());
  }
  // Z C = i1 - A  <=>  C^T Z^T = (i1 - A)^T.
  const CMat rhs = (cd(0, 1) * CMat::Identity(h, h) - a.cast<cd>()).transpose();
  const CMat zt = c.transpose().cast<cd>().partialPivLu().solve(rhs);
  return PeriodMatrix(i.n(), zt.transpose());
}

double chart_complex_linearity_check(const PeriodMatrix& z, const CMat& x, double h) {
  if (x.rows() != z.Z.rows() || x.cols() != z.Z.cols()) {
    throw Error(ErrorCode::kDimension, "direction must have the shape of Z");
  }
  const ComplexStructure f0 = complex_structure_from_period(z);
  const ComplexStructure f_re = complex_structure_from_period(PeriodMatrix(z.n, z.Z + h * x));
  const ComplexStructure f_im =
      complex_structure_from_period(PeriodMatrix(z.n, z.Z + cd(0, h) * x));
  const Mat d_re = (f_re.mat() - f0.mat()) / h;
  const Mat d_im = (f_im.mat() - f0.mat()) / h;
  return (d_im - f0.mat() * d_re).norm();
}

std::vector<std::vector<int>> plucker_index_sets(int n) {
  const int total = 4 * n;
  const int k = 2 * n;
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
  for (;;) {
    out.push_back(cur);
    int pos = k - 1;
    while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == total - k + pos) --pos;
    if (pos < 0) break;
    ++cur[static_cast<std::size_t>(pos)];
    for (int j = pos + 1; j < k; ++j)
      cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

PlueckerVector plucker(const PeriodMatrix& p) {
  const CMat full = full_period(p);
  const auto sets = plucker_index_sets(p.n);
  PlueckerVector out;
  out.n = p.n;
  out.coords.resize(static_cast<Eigen::Index>(sets.size()));
  for (std::size_t s = 0; s < sets.size(); ++s)
    out.coords(static_cast<Eigen::Index>(s)) = minor_det(full, sets[s]);
  const double biggest = out.coords.cwiseAbs().maxCoeff();
  for (Eigen::Index s = 0; s < out.coords.size(); ++s) {
    if (std::abs(out.coords(s)) > 1e-14 * biggest) {
      out.coords /= out.coords(s);
      break;
    }
  }
  return out;
}

double plucker_relation_residual(const PlueckerVector& p, int samples, std::uint64_t seed) {
  const auto sets = plucker_index_sets(p.n);
  std::map<std::vector<int>, Eigen::Index> index;
  for (std::size_t s = 0; s < sets.size(); ++s) index.emplace(sets[s], static_cast<Eigen::Index>(s));
  const int total = 4 * p.n;
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    std::vector<int> perm(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = total - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(rng.integer(0, i))]);
    std::vector<int> s(perm.begin(), perm.begin() + (2 * p.n - 2));
    std::vector<int> q(perm.begin() + (2 * p.n - 2), perm.begin() + (2 * p.n + 2));
    std::sort(q.begin(), q.end());
    auto coord = [&](int x, int y) {
      std::vector<int> cols = s;
      cols.push_back(x);
      cols.push_back(y);
      return signed_coord(p, index, cols);
    };
    const cd rel = coord(q[0], q[1]) * coord(q[2], q[3]) - coord(q[0], q[2]) * coord(q[1], q[3]) +
                   coord(q[0], q[3]) * coord(q[1], q[2]);
    worst = std::max(worst, std::abs(rel));
  }
  return worst;
}

ConicReport verify_conic(const TwistorSphere& s, int m) {
  if (m < 8) throw Error(ErrorCode::kPrecondition, "verify_conic needs at least 8 samples");
  std::vector<CVec> points;
  int skipped = 0;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int round = 0; round < 6 && static_cast<int>(points.size()) < m; ++round) {
    points.clear();
    skipped = 0;
    const int count = m << round;
    for (int k = 0; k < count; ++k) {
      const double a = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - a * a));
      const double phi = golden * k;
      const double b = r * std::cos(phi);
      const double c = r * std::sin(phi);
      if (b * b + c * c < 1e-4) {
        ++skipped;
        continue;
      }
      const double norm = std::sqrt(a * a + b * b + c * c);
      const ComplexStructure lambda = sphere_point(s, a / norm, b / norm, c / norm);
      if (chart_condition(lambda) < kSampleRcond) {
        ++skipped;
        continue;
      }
      points.push_back(plucker(period_from_complex_structure(lambda)).coords);
    }
  }
  if (static_cast<int>(points.size()) < m) {
    std::ostringstream os;
    os << "only " << points.size() << " of " << m << " requested sphere points lie in the chart";
    throw Error(ErrorCode::kSampling, os.str());
  }

  ConicReport report;
  report.samples = static_cast<int>(points.size());
  const Eigen::Index dim = points.front().size();
  const Eigen::Index count = static_cast<Eigen::Index>(points.size());
  CMat samples(dim, count);
  for (Eigen::Index k = 0; k < count; ++k) samples.col(k) = points[static_cast<std::size_t>(k)];
  const CVec mean = samples.rowwise().mean();
  samples.colwise() -= mean;

  Eigen::JacobiSVD<CMat> svd(samples, Eigen::ComputeThinU);
  const Vec& sv = svd.singularValues();
  report.plane_dim = sv(0) > 0.0 ? static_cast<int>((sv.array() > kRankCutoff * sv(0)).count()) : 0;
  if (report.plane_dim < 2) {
    report.diagnostic = "image spans an affine space of dimension " +
                        std::to_string(report.plane_dim) + "; no conic to fit";
    report.conic_residual = 1.0;
    return report;
  }

  // Conic fit in the leading plane.
  const CMat coords = svd.matrixU().leftCols(2).adjoint() * samples;
  const double scale = coords.cwiseAbs().maxCoeff();
  CMat design(count, 6);
  for (Eigen::Index k = 0; k < count; ++k) {
    const cd x = coords(0, k) / scale;
    const cd y = coords(1, k) / scale;
    design.row(k) << cd(1.0), x, y, x * x, x * y, y * y;
  }
  Eigen::JacobiSVD<CMat> dsvd(design);
  const Vec& dv = dsvd.singularValues();
  report.conic_residual = dv(dv.size() - 1) / dv(0);
  const int design_rank = static_cast<int>((dv.array() > kRankCutoff * dv(0)).count());

  std::ostringstream diag;
  if (report.plane_dim != 2) {
    diag << "image spans an affine space of dimension " << report.plane_dim
         << ", not a plane; relative singular values";
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(sv.size(), report.plane_dim + 1); ++i)
      diag << ' ' << sv(i) / sv(0);
  } else if (design_rank < 5) {
    diag << "conic design matrix has rank " << design_rank << "; sample points are degenerate";
  } else if (!(report.conic_residual < 1e-8)) {
    diag << "no conic fits the planar image, residual " << report.conic_residual;
  } else {
    report.degree = 2;
  }
  report.diagnostic = diag.str();
  return report;
}

}  // namespace twistor
