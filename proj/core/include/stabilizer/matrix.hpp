#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace stabilizer {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Default tolerance on ||X^H X - I||_F and ||S^H + S||_F.
inline constexpr double kUnitarityTol = 1e-10;

/// Default lower bound on min_j |1 + exp(i theta_j)| for membership in W.
inline constexpr double kSingularTol = 1e-6;

inline constexpr double kPi = 3.14159265358979323846;

double frobenius_norm(const ComplexMatrix& a);

/// ||A^H A - I||_F.
double unitarity_defect(const ComplexMatrix& a);

/// ||A^H + A||_F.
double skew_defect(const ComplexMatrix& a);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Element of U(n). Construction through `from` checks the invariant; the
/// group operations below produce new elements without re-checking.
class UnitaryMatrix {
 public:
  static UnitaryMatrix identity(int n);

  /// Throws InvariantViolation if `m` is not square or not unitary within
  /// `tol`.
  static UnitaryMatrix from(ComplexMatrix m, double tol = kUnitarityTol);

  /// Wraps `m` without checking. Callers guarantee unitarity by
  /// construction (products, exponentials of skew-Hermitian matrices).
  static UnitaryMatrix trusted(ComplexMatrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }

  UnitaryMatrix adjoint() const;
  UnitaryMatrix operator*(const UnitaryMatrix& rhs) const;

  /// Polar projection onto U(n) by Newton iteration X <- (X + X^{-H}) / 2.
  UnitaryMatrix reprojected() const;

 private:
  explicit UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// Element of u(n).
class SkewHermitianMatrix {
 public:
  static SkewHermitianMatrix zero(int n);

  /// Throws InvariantViolation if `m` is not square or ||m^H + m||_F > tol.
  static SkewHermitianMatrix from(ComplexMatrix m, double tol = kUnitarityTol);

  /// -i H for Hermitian H.
  static SkewHermitianMatrix from_hamiltonian(const ComplexMatrix& h,
                                              double tol = kUnitarityTol);

  static SkewHermitianMatrix trusted(ComplexMatrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }

 private:
  explicit SkewHermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// exp(t S). Scaling-and-squaring with a diagonal [6/6] Pade approximant,
/// which is exactly unitary in exact arithmetic for skew-Hermitian input.
/// The result is re-projected onto U(n) if its defect exceeds
/// kUnitarityTol / 10. exp(0 S) returns I exactly.
UnitaryMatrix expm_skew(const SkewHermitianMatrix& s, double t);

/// Same as expm_skew on a raw matrix assumed skew-Hermitian. Used on hot
/// paths where the argument is a real combination of known generators.
UnitaryMatrix expm_skew_unchecked(const ComplexMatrix& s, double t);

/// X = U^H diag(exp(i theta_j)) U, theta_j in (-pi, pi], sorted ascending.
struct UnitaryEigenDecomposition {
  std::vector<double> eigenphases;
  UnitaryMatrix eigenvectors;  // U; row j is the conjugate of eigenvector j.

  ComplexMatrix reconstruct() const;
};

/// Eigenphases are sorted ascending. Phases within 1e-12 of each other are
/// ordered by the eigenvector's first nonzero component (each eigenvector is
/// normalized so that component is real and positive).
UnitaryEigenDecomposition eig_unitary(const UnitaryMatrix& x);

/// Maps an angle to (-pi, pi].
double wrap_phase(double theta);

/// min_j |1 + exp(i theta_j)| over the eigenvalues of X, i.e. the distance of
/// the spectrum from -1. Computed from the smallest eigenvalue of the
/// Hermitian matrix 2I + X + X^H = (X + I)^H (X + I).
double cayley_margin(const UnitaryMatrix& x);

/// (X + I)^{-1}. Throws NotInW when cayley_margin(X) <= singular_tol.
ComplexMatrix cayley_inverse_term(const UnitaryMatrix& x,
                                  double singular_tol = kSingularTol);

}  // namespace stabilizer
