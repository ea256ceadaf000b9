#include "twistor/lattice_reduction.hpp"

#include <utility>

#include "twistor/error.hpp"

namespace twistor {

mpz_class dot(const IntVector& a, const IntVector& b) {
  mpz_class s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

// 1-based bookkeeping: d[0] = 1, d[i] = Gram determinant of b_1..b_i,
// lambda[k][j] = d[j] * mu_{k,j}.
struct IntegralLll {
  std::vector<IntVector>& b;
  std::vector<mpz_class> d;
  std::vector<std::vector<mpz_class>> lambda;

  explicit IntegralLll(std::vector<IntVector>& basis)
      : b(basis),
        d(basis.size() + 1),
        lambda(basis.size() + 1, std::vector<mpz_class>(basis.size() + 1)) {}

  IntVector& vec(std::size_t k) { return b[k - 1]; }

  void gram_schmidt_row(std::size_t k) {
    for (std::size_t j = 1; j <= k; ++j) {
      mpz_class u = dot(vec(k), vec(j));
      for (std::size_t i = 1; i < j; ++i) u = (d[i] * u - lambda[k][i] * lambda[j][i]) / d[i - 1];
      if (j < k) {
        lambda[k][j] = u;
      } else {
        if (u == 0) throw Error(ErrorCode::kPrecondition, "LLL input vectors are linearly dependent");
        d[k] = u;
      }
    }
  }

  void reduce(std::size_t k, std::size_t l) {
    mpz_class twice = 2 * lambda[k][l];
    if (mpz_cmpabs(twice.get_mpz_t(), d[l].get_mpz_t()) <= 0) return;
    // q = round(lambda / d_l) = floor((2 lambda + d_l) / (2 d_l)).
    mpz_class q;
    mpz_class num = twice + d[l];
    mpz_class den = 2 * d[l];
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    IntVector& bk = vec(k);
    const IntVector& bl = vec(l);
    for (std::size_t c = 0; c < bk.size(); ++c) bk[c] -= q * bl[c];
    lambda[k][l] -= q * d[l];
    for (std::size_t i = 1; i < l; ++i) lambda[k][i] -= q * lambda[l][i];
  }

  void swap(std::size_t k, std::size_t kmax) {
    std::swap(vec(k), vec(k - 1));
    for (std::size_t j = 1; j + 2 <= k; ++j) std::swap(lambda[k][j], lambda[k - 1][j]);
    const mpz_class lam = lambda[k][k - 1];
    const mpz_class big_b = (d[k - 2] * d[k] + lam * lam) / d[k - 1];
    for (std::size_t i = k + 1; i <= kmax; ++i) {
      const mpz_class t = lambda[i][k];
      lambda[i][k] = (d[k] * lambda[i][k - 1] - lam * t) / d[k - 1];
      lambda[i][k - 1] = (big_b * t + lam * lambda[i][k]) / d[k];
    }
    d[k - 1] = big_b;
  }

  void run(long dn, long dd) {
    const std::size_t n = b.size();
    if (n == 0) return;
    d[0] = 1;
    d[1] = dot(vec(1), vec(1));
    if (d[1] == 0) throw Error(ErrorCode::kPrecondition, "LLL input contains a zero vector");
    std::size_t k = 2;
    std::size_t kmax = 1;
    while (k <= n) {
      if (k > kmax) {
        kmax = k;
        gram_schmidt_row(k);
      }
      for (;;) {
        reduce(k, k - 1);
        // Lovasz: dd * d_k * d_{k-2} < dn * d_{k-1}^2 - dd * lambda^2 means swap.
        const mpz_class lhs = dd * d[k] * d[k - 2];
        const mpz_class rhs = dn * d[k - 1] * d[k - 1] - dd * lambda[k][k - 1] * lambda[k][k - 1];
        if (lhs < rhs) {
          swap(k, kmax);
          if (k > 2) --k;
          continue;
        }
        break;
      }
      for (std::size_t l = k - 1; l-- > 1;) reduce(k, l);
      ++k;
    }
  }
};

}  // namespace

void lll_reduce(std::vector<IntVector>& basis, long delta_num, long delta_den) {
  if (delta_num * 4 <= delta_den || delta_num >= delta_den) {
    throw Error(ErrorCode::kPrecondition, "LLL delta must lie in (1/4, 1)");
  }
  for (const auto& v : basis)
    if (v.size() != basis.front().size()) throw Error(ErrorCode::kDimension, "LLL vectors differ in length");
  IntegralLll(basis).run(delta_num, delta_den);
}

}  // namespace twistor
