#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twistor/linalg.hpp"
#include "twistor/quaternionic.hpp"

namespace twistor {

/// Normalized period matrix: the 2n x 4n complex matrix (1 | Z) is implied.
struct PeriodMatrix {
  int n = 0;
  CMat Z;

  PeriodMatrix() = default;
  /// Dimension error unless Z is 2n x 2n.
  PeriodMatrix(int n, CMat z);
};

/// Maximal minors of (1 | Z), indexed by sorted 2n-subsets of {0..4n-1} in
/// lexicographic order, scaled so the first nonzero coordinate is 1.
struct PlueckerVector {
  int n = 0;
  CVec coords;
};

struct ConicReport {
  int plane_dim = 0;
  double conic_residual = 0.0;
  int degree = 0;
  int samples = 0;
  std::string diagnostic;
};

/// The real matrix I = [[A, B], [C, D]] with (1 | Z) I = i (1 | Z). Writing
/// Z = X + iY the system separates into YC = 1, A = -XC, YD = X, B = -Y - XD.
/// Outside-chart error when Im Z is singular.
ComplexStructure complex_structure_from_period(const PeriodMatrix& p);

/// Z = (i1 - A) C^{-1}; outside-chart error when the block C is singular.
PeriodMatrix period_from_complex_structure(const ComplexStructure& i);

/// Reciprocal condition number of the chart block C (0 when singular).
double chart_condition(const ComplexStructure& i);

/// || (f(Z + ihX) - f(Z))/h - I_Z (f(Z + hX) - f(Z))/h ||_F for
/// f = complex_structure_from_period. O(h) when f is holomorphic.
double chart_complex_linearity_check(const PeriodMatrix& z, const CMat& x, double h);

PlueckerVector plucker(const PeriodMatrix& p);

/// Sorted 2n-subsets of {0..4n-1} in lexicographic order.
std::vector<std::vector<int>> plucker_index_sets(int n);

/// Largest absolute value of sampled three-term relations
///   p(S,a,b) p(S,c,d) - p(S,a,c) p(S,b,d) + p(S,a,d) p(S,b,c)
/// over random (2n-2)-subsets S and quadruples a<b<c<d outside S.
double plucker_relation_residual(const PlueckerVector& p, int samples = 64,
                                 std::uint64_t seed = 0);

/// Samples m points of the sphere (Fibonacci lattice in (a,b,c), skipping
/// chart poles), maps them to Plücker space and measures the affine span and
/// the quality of a conic fit inside the leading plane.
ConicReport verify_conic(const TwistorSphere& s, int m);

}  // namespace twistor
