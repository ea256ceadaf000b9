#include "twistor/rational.hpp"

#include <cmath>

#include "twistor/error.hpp"

namespace twistor {

RationalMatrix RationalMatrix::identity(int n) {
  RationalMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::from_integers(const Mat& m) {
  RationalMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) {
      const double x = m(r, c);
      if (x != std::round(x)) throw Error(ErrorCode::kDimension, "from_integers: non-integer entry");
      out(r, c) = mpq_class(mpz_class(x));
    }
  return out;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& o) const {
  if (cols_ != o.rows_) throw Error(ErrorCode::kDimension, "rational product: shape mismatch");
  RationalMatrix out(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const mpq_class& a = (*this)(i, k);
      if (sgn(a) == 0) continue;
      for (int j = 0; j < o.cols_; ++j) out(i, j) += a * o(k, j);
    }
  return out;
}

RationalMatrix RationalMatrix::operator-(const RationalMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::kDimension, "rational difference: shape mismatch");
  RationalMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] - o.data_[i];
  return out;
}

RationalMatrix RationalMatrix::operator+(const RationalMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::kDimension, "rational sum: shape mismatch");
  RationalMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i] + o.data_[i];
  return out;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix out(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

bool RationalMatrix::operator==(const RationalMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

bool RationalMatrix::is_zero() const {
  for (const auto& x : data_)
    if (sgn(x) != 0) return false;
  return true;
}

Mat RationalMatrix::to_double() const {
  Mat out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).get_d();
  return out;
}

std::optional<mpq_class> rationalize(double x, long max_den, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  // Convergents h/k of the continued fraction of x.
  long double rem = std::fabs(static_cast<long double>(x));
  mpz_class h_prev = 1, h = 0, k_prev = 0, k = 1;
  mpq_class best;
  bool have = false;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a_ld = std::floor(rem);
    if (a_ld > 1e18L) break;
    const mpz_class a(static_cast<double>(a_ld));
    const mpz_class h_next = a * h_prev + h;
    const mpz_class k_next = a * k_prev + k;
    if (k_next > max_den) break;
    h = h_prev;
    k = k_prev;
    h_prev = h_next;
    k_prev = k_next;
    best = mpq_class(h_prev, k_prev);
    best.canonicalize();
    have = true;
    const long double frac = rem - a_ld;
    if (std::fabs(best.get_d() - std::fabs(x)) <= tol * std::max(1.0, std::fabs(x))) break;
    if (frac < 1e-18L) break;
    rem = 1.0L / frac;
  }
  if (!have) return std::nullopt;
  if (x < 0) best = -best;
  if (std::fabs(best.get_d() - x) > tol * std::max(1.0, std::fabs(x))) return std::nullopt;
  return best;
}

std::optional<RationalMatrix> rationalize(const Mat& m, long max_den, double tol) {
  RationalMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) {
      auto q = rationalize(m(r, c), max_den, tol);
      if (!q) return std::nullopt;
      out(r, c) = *q;
    }
  return out;
}

RrefResult rref(RationalMatrix a) {
  RrefResult res;
  int row = 0;
  for (int col = 0; col < a.cols() && row < a.rows(); ++col) {
    int pivot = -1;
    for (int r = row; r < a.rows(); ++r) {
      if (sgn(a(r, col)) == 0) continue;
      if (pivot < 0 || mpz_cmpabs(a(r, col).get_num_mpz_t(), a(pivot, col).get_num_mpz_t()) > 0) pivot = r;
    }
    if (pivot < 0) continue;
    if (pivot != row)
      for (int c = 0; c < a.cols(); ++c) std::swap(a(pivot, c), a(row, c));
    const mpq_class inv = 1 / a(row, col);
    for (int c = col; c < a.cols(); ++c) a(row, c) *= inv;
    for (int r = 0; r < a.rows(); ++r) {
      if (r == row || sgn(a(r, col)) == 0) continue;
      const mpq_class f = a(r, col);
      for (int c = col; c < a.cols(); ++c) a(r, c) -= f * a(row, c);
    }
    res.pivots.push_back(col);
    ++row;
  }
  res.reduced = std::move(a);
  return res;
}

int rank(const RationalMatrix& a) { return static_cast<int>(rref(a).pivots.size()); }

RationalMatrix inverse(const RationalMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::kDimension, "inverse of a non-square matrix");
  const int n = a.rows();
  RationalMatrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1;
  }
  const RrefResult r = rref(aug);
  if (static_cast<int>(r.pivots.size()) < n || r.pivots[static_cast<std::size_t>(n - 1)] != n - 1) {
    throw Error(ErrorCode::kSingularity, "rational matrix is singular");
  }
  RationalMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = r.reduced(i, n + j);
  return out;
}

std::vector<std::vector<mpq_class>> kernel(const RationalMatrix& a) {
  const RrefResult r = rref(a);
  std::vector<bool> is_pivot(static_cast<std::size_t>(a.cols()), false);
  for (int p : r.pivots) is_pivot[static_cast<std::size_t>(p)] = true;
  std::vector<std::vector<mpq_class>> basis;
  for (int free = 0; free < a.cols(); ++free) {
    if (is_pivot[static_cast<std::size_t>(free)]) continue;
    std::vector<mpq_class> v(static_cast<std::size_t>(a.cols()));
    v[static_cast<std::size_t>(free)] = 1;
    for (std::size_t i = 0; i < r.pivots.size(); ++i)
      v[static_cast<std::size_t>(r.pivots[i])] = -r.reduced(static_cast<int>(i), free);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<mpz_class> primitive_integer(const std::vector<mpq_class>& v) {
  mpz_class lcm_den = 1;
  for (const auto& x : v) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), x.get_den_mpz_t());
  std::vector<mpz_class> out;
  out.reserve(v.size());
  mpz_class g = 0;
  for (const auto& x : v) {
    mpz_class y = x.get_num() * (lcm_den / x.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), y.get_mpz_t());
    out.push_back(std::move(y));
  }
  if (g == 0) return out;
  int sign = 0;
  for (const auto& x : out)
    if (x != 0) {
      sign = sgn(x);
      break;
    }
  for (auto& x : out) x = x / g * sign;
  return out;
}

}  // namespace twistor
