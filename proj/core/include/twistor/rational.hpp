#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "twistor/linalg.hpp"

namespace twistor {

/// Dense row-major matrix of GMP rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

  static RationalMatrix identity(int n);
  /// Exact conversion of an integer-valued double matrix; dimension error
  /// if an entry is not an integer.
  static RationalMatrix from_integers(const Mat& m);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  mpq_class& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const mpq_class& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  RationalMatrix operator*(const RationalMatrix& o) const;
  RationalMatrix operator-(const RationalMatrix& o) const;
  RationalMatrix operator+(const RationalMatrix& o) const;
  RationalMatrix transpose() const;
  bool operator==(const RationalMatrix& o) const;
  bool is_zero() const;
  Mat to_double() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<mpq_class> data_;
};

/// Best rational approximation p/q with q <= max_den (continued fractions);
/// empty unless |x - p/q| <= tol * max(1, |x|).
std::optional<mpq_class> rationalize(double x, long max_den = 1'000'000, double tol = 1e-12);
std::optional<RationalMatrix> rationalize(const Mat& m, long max_den = 1'000'000,
                                          double tol = 1e-12);

struct RrefResult {
  RationalMatrix reduced;
  std::vector<int> pivots;
};

/// Reduced row echelon form; among candidate rows the pivot with the largest
/// numerator magnitude is taken.
RrefResult rref(RationalMatrix a);
int rank(const RationalMatrix& a);
RationalMatrix inverse(const RationalMatrix& a);

/// Basis of the right kernel, one vector per free column.
std::vector<std::vector<mpq_class>> kernel(const RationalMatrix& a);

/// Scales to coprime integers with the first nonzero entry positive.
std::vector<mpz_class> primitive_integer(const std::vector<mpq_class>& v);

}  // namespace twistor
