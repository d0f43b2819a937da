#pragma once

#include <span>
#include <vector>

#include "stabilizer/matrix.hpp"

namespace stabilizer {

class AmplitudeVector;

/// Driftless right-invariant system dX/dt = sum_k u_k S_k X on U(n).
class SystemDef {
 public:
  /// Throws InvariantViolation if the list is empty or dimensions differ.
  explicit SystemDef(std::vector<SkewHermitianMatrix> generators);

  int n() const { return n_; }
  int m() const { return static_cast<int>(generators_.size()); }
  const std::vector<SkewHermitianMatrix>& generators() const { return generators_; }
  const SkewHermitianMatrix& generator(int k) const { return generators_[k]; }

  /// sum_k u_k S_k.
  ComplexMatrix combine(const Eigen::VectorXd& u) const;

 private:
  int n_;
  std::vector<SkewHermitianMatrix> generators_;
};

inline constexpr double kRankTol = 1e-9;

/// Stacks real and imaginary parts of `a` column-major into a 2n^2 vector.
Eigen::VectorXd real_vectorize(const ComplexMatrix& a);

/// Rank over the reals of the span of `elements`, counting singular values
/// above rel_tol * sigma_max of the 2n^2 x count real vectorization.
int real_span_rank(std::span<const ComplexMatrix> elements, double rel_tol = kRankTol);

struct BracketClosureReport {
  int rank = 0;
  /// Unit-norm, real-linearly independent elements of the bracket closure.
  std::vector<SkewHermitianMatrix> basis;
  /// Nesting depth of the deepest bracket kept in the basis: 0 for the
  /// generators, 1 for [S_i, S_j], 2 for [S_i, [S_j, S_k]], and so on.
  int max_depth_used = 0;
};

/// Breadth-first enumeration of right-normed brackets [S_i1, [S_i2, ...]]
/// nested at most max_depth deep. Level d is generated from a basis of the
/// full span of level d - 1, so pruning never loses a direction. Stops once
/// the rank reaches n^2. Throws std::invalid_argument when max_depth < 0.
BracketClosureReport lie_closure(const SystemDef& sys, int max_depth = 6,
                                 double rank_tol = kRankTol);

/// Truncated Taylor expansion at t = 0, F(t) = sum_p c_p t^p.
struct TaylorMatrixSeries {
  std::vector<ComplexMatrix> coefficients;

  int order() const { return static_cast<int>(coefficients.size()) - 1; }
  TaylorMatrixSeries derivative() const;
};

/// Taylor coefficients of A(t) = sum_k ubar_k(t) S_k for the sinusoidal
/// reference controls. Even-order coefficients vanish.
TaylorMatrixSeries taylor_A(const SystemDef& sys, const AmplitudeVector& amps, double period,
                            int order);

/// C_k^j(0) for k = 0..m-1, j = 0..J, where C_k^0 = S_k and
/// C_k^{j+1} = d/dt C_k^j + [C_k^j, A]. Stored k-major: entry k * (J + 1) + j.
struct CoronMatrices {
  int m = 0;
  int depth = 0;  // J
  std::vector<SkewHermitianMatrix> entries;

  const SkewHermitianMatrix& at(int k, int j) const { return entries[k * (depth + 1) + j]; }
};

CoronMatrices coron_matrices_at_zero(const SystemDef& sys, const AmplitudeVector& amps,
                                     double period, int depth);

/// Real-span rank of {C_k^j(0)}. Amplitudes are admissible when this equals
/// n^2.
int admissibility_rank(const SystemDef& sys, const AmplitudeVector& amps, double period,
                       int depth, double rank_tol = kRankTol);

/// Default derivative depth for M harmonics.
inline int default_admissibility_depth(int harmonics) { return 2 * harmonics; }

}  // namespace stabilizer
