#include "twistor/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "twistor/error.hpp"

namespace twistor {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kDegeneratePair: return "degenerate-pair";
    case ErrorCode::kNotCospherical: return "not-cospherical";
    case ErrorCode::kNormalization: return "normalization";
    case ErrorCode::kTolerance: return "tolerance";
    case ErrorCode::kOutsideChart: return "outside-chart";
    case ErrorCode::kSampling: return "sampling";
    case ErrorCode::kWrongSubgroup: return "wrong-subgroup";
    case ErrorCode::kNoConvergence: return "no-convergence";
    case ErrorCode::kDegenerateProblem: return "degenerate-problem";
    case ErrorCode::kPathing: return "pathing";
    case ErrorCode::kMode: return "mode";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
    case ErrorCode::kInvalidForm: return "invalid-form";
    case ErrorCode::kUnsupportedSize: return "unsupported-size";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + " error: " + what), code_(code) {}

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, Eigen::Index rows) {
  return Eigen::Map<const Mat>(v.data(), rows, v.size() / rows);
}

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

namespace {

// vec(X A) = (A^T (x) 1) vec(X),  vec(A X) = (1 (x) A) vec(X).
Mat right_mult_operator(const Mat& a) {
  const Eigen::Index d = a.rows();
  Mat op = Mat::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (a(j, i) != 0.0) op.block(i * d, j * d, d, d).diagonal().setConstant(a(j, i));
    }
  }
  return op;
}

Mat left_mult_operator(const Mat& a) {
  const Eigen::Index d = a.rows();
  Mat op = Mat::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) op.block(i * d, i * d, d, d) = a;
  return op;
}

}  // namespace

Mat commutator_operator(const Mat& a) { return right_mult_operator(a) - left_mult_operator(a); }

Mat anticommutator_operator(const Mat& a) {
  return right_mult_operator(a) + left_mult_operator(a);
}

KernelDecomposition kernel_decomposition(const Mat& a, double rel_cutoff) {
  KernelDecomposition out;
  const Eigen::Index cols = a.cols();
  if (a.size() == 0) {
    out.kernel = Mat::Identity(cols, cols);
    out.cokernel = Mat::Zero(cols, 0);
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const double smax = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  int rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
      if (out.singular_values(i) > rel_cutoff * smax) {
        ++rank;
        out.above_cutoff = out.singular_values(i) / smax;
      } else {
        out.below_cutoff = std::max(out.below_cutoff, out.singular_values(i) / smax);
      }
    }
  }
  out.rank = rank;
  const Mat& v = svd.matrixV();
  out.cokernel = v.leftCols(rank);
  out.kernel = v.rightCols(cols - rank);
  return out;
}

Mat numerical_kernel(const Mat& a, double rel_cutoff) {
  return kernel_decomposition(a, rel_cutoff).kernel;
}

int numerical_rank(const Mat& a, double rel_cutoff) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<int>((s.array() > rel_cutoff * s(0)).count());
}

int numerical_rank(const CMat& a, double rel_cutoff) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(a);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<int>((s.array() > rel_cutoff * s(0)).count());
}

Mat pseudo_inverse(const Mat& a, double rel_cutoff) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  Vec inv = Vec::Zero(s.size());
  const double smax = s.size() > 0 ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_cutoff * smax) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat expm(const Mat& a) { return a.exp(); }

std::optional<Mat> real_logm(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  const double scale = std::max(1.0, a.norm());
  for (const auto& ev : es.eigenvalues()) {
    if (std::abs(ev.imag()) <= 1e-12 * scale && ev.real() <= 0.0) return std::nullopt;
  }
  Mat log = a.log();
  if (!log.allFinite()) return std::nullopt;
  return log;
}

Mat stack_columns(std::span<const Mat> mats) {
  if (mats.empty()) return Mat(0, 0);
  Mat out(mats.front().size(), static_cast<Eigen::Index>(mats.size()));
  for (std::size_t k = 0; k < mats.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = vec(mats[k]);
  return out;
}

Mat Rng::gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  // Row-major fill so the draw order does not depend on Eigen's storage.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gaussian();
  return m;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> explicit_seed, std::uint64_t fallback) {
  if (explicit_seed) return *explicit_seed;
  if (const char* env = std::getenv("TWISTOR_KIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "TWISTOR_KIT_SEED is not an unsigned integer: " +
                                         std::string(env));
    }
  }
  return fallback;
}

}  // namespace twistor
