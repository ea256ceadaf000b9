#pragma once

#include <vector>

#include <gmpxx.h>

namespace twistor {

using IntVector = std::vector<mpz_class>;

/// In-place LLL reduction of linearly independent integer row vectors with
/// Lovasz parameter delta = delta_num / delta_den. Integral variant: every
/// Gram-Schmidt quantity is kept as an exact integer (scaled by the Gram
/// determinants d_i). Precondition error on dependent input.
void lll_reduce(std::vector<IntVector>& basis, long delta_num = 99, long delta_den = 100);

mpz_class dot(const IntVector& a, const IntVector& b);

}  // namespace twistor
