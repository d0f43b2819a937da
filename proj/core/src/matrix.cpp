#include "stabilizer/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "stabilizer/errors.hpp"

namespace stabilizer {

double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

double unitarity_defect(const ComplexMatrix& a) {
  return (a.adjoint() * a - ComplexMatrix::Identity(a.rows(), a.cols())).norm();
}

double skew_defect(const ComplexMatrix& a) { return (a.adjoint() + a).norm(); }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

// ---------------------------------------------------------------------------

UnitaryMatrix UnitaryMatrix::identity(int n) {
  return UnitaryMatrix(ComplexMatrix::Identity(n, n));
}

UnitaryMatrix UnitaryMatrix::from(ComplexMatrix m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvariantViolation("unitary matrix must be square and non-empty");
  }
  const double defect = unitarity_defect(m);
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << "matrix is not unitary: ||X^H X - I||_F = " << defect << " > " << tol;
    throw InvariantViolation(os.str());
  }
  return UnitaryMatrix(std::move(m));
}

UnitaryMatrix UnitaryMatrix::trusted(ComplexMatrix m) { return UnitaryMatrix(std::move(m)); }

UnitaryMatrix UnitaryMatrix::adjoint() const { return UnitaryMatrix(m_.adjoint()); }

UnitaryMatrix UnitaryMatrix::operator*(const UnitaryMatrix& rhs) const {
  return UnitaryMatrix(m_ * rhs.m_);
}

UnitaryMatrix UnitaryMatrix::reprojected() const {
  ComplexMatrix x = m_;
  for (int iter = 0; iter < 8; ++iter) {
    ComplexMatrix next = 0.5 * (x + x.adjoint().inverse());
    const double step = (next - x).norm();
    x = std::move(next);
    if (step < 1e-15) break;
  }
  return UnitaryMatrix(std::move(x));
}

// ---------------------------------------------------------------------------

SkewHermitianMatrix SkewHermitianMatrix::zero(int n) {
  return SkewHermitianMatrix(ComplexMatrix::Zero(n, n));
}

SkewHermitianMatrix SkewHermitianMatrix::from(ComplexMatrix m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvariantViolation("skew-Hermitian matrix must be square and non-empty");
  }
  const double defect = skew_defect(m);
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << "matrix is not skew-Hermitian: ||S^H + S||_F = " << defect << " > " << tol;
    throw InvariantViolation(os.str());
  }
  return SkewHermitianMatrix(std::move(m));
}

SkewHermitianMatrix SkewHermitianMatrix::from_hamiltonian(const ComplexMatrix& h, double tol) {
  return from(Complex(0.0, -1.0) * h, tol);
}

SkewHermitianMatrix SkewHermitianMatrix::trusted(ComplexMatrix m) {
  return SkewHermitianMatrix(std::move(m));
}

// ---------------------------------------------------------------------------

namespace {

// Diagonal [6/6] Pade coefficients of exp.
constexpr double kPade6[] = {1.0,
                             1.0 / 2.0,
                             5.0 / 44.0,
                             1.0 / 66.0,
                             1.0 / 792.0,
                             1.0 / 15840.0,
                             1.0 / 665280.0};

ComplexMatrix pade6_exp(const ComplexMatrix& a) {
  const auto n = a.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = a * a;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;
  // Even and odd parts: p(A) = E + O, q(A) = p(-A) = E - O.
  const ComplexMatrix even = kPade6[0] * id + kPade6[2] * a2 + kPade6[4] * a4 + kPade6[6] * a6;
  const ComplexMatrix odd = a * (kPade6[1] * id + kPade6[3] * a2 + kPade6[5] * a4);
  return (even - odd).partialPivLu().solve(even + odd);
}

}  // namespace

UnitaryMatrix expm_skew_unchecked(const ComplexMatrix& s, double t) {
  const auto n = s.rows();
  if (t == 0.0) return UnitaryMatrix::trusted(ComplexMatrix::Identity(n, n));

  ComplexMatrix a = t * s;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    a /= std::ldexp(1.0, squarings);
  }
  ComplexMatrix r = pade6_exp(a);
  for (int i = 0; i < squarings; ++i) r = r * r;

  UnitaryMatrix result = UnitaryMatrix::trusted(std::move(r));
  if (squarings > 0 && unitarity_defect(result.matrix()) > kUnitarityTol / 10.0) {
    return result.reprojected();
  }
  return result;
}

UnitaryMatrix expm_skew(const SkewHermitianMatrix& s, double t) {
  return expm_skew_unchecked(s.matrix(), t);
}

// ---------------------------------------------------------------------------

double wrap_phase(double theta) {
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

ComplexMatrix UnitaryEigenDecomposition::reconstruct() const {
  const auto n = static_cast<Eigen::Index>(eigenphases.size());
  Eigen::VectorXcd d(n);
  for (Eigen::Index j = 0; j < n; ++j) d(j) = std::polar(1.0, eigenphases[j]);
  const ComplexMatrix& u = eigenvectors.matrix();
  return u.adjoint() * d.asDiagonal() * u;
}

UnitaryEigenDecomposition eig_unitary(const UnitaryMatrix& x) {
  const int n = x.dim();
  // A normal matrix has a diagonal Schur form, and the Schur basis is
  // unitary even inside degenerate eigenspaces.
  Eigen::ComplexSchur<ComplexMatrix> schur(x.matrix());
  ComplexMatrix q = schur.matrixU();
  const ComplexMatrix& t = schur.matrixT();

  std::vector<double> phases(n);
  std::vector<int> first_nonzero(n, 0);
  for (int j = 0; j < n; ++j) {
    const Complex lambda = t(j, j);
    phases[j] = wrap_phase(std::arg(lambda));
    for (int r = 0; r < n; ++r) {
      const Complex c = q(r, j);
      if (std::abs(c) > 1e-10) {
        first_nonzero[j] = r;
        q.col(j) *= std::conj(c) / std::abs(c);
        break;
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return phases[a] < phases[b]; });
  auto vector_key_less = [&](int a, int b) {
    if (first_nonzero[a] != first_nonzero[b]) return first_nonzero[a] < first_nonzero[b];
    const Complex ca = q(first_nonzero[a], a);
    const Complex cb = q(first_nonzero[b], b);
    if (ca.real() != cb.real()) return ca.real() > cb.real();
    for (int r = first_nonzero[a] + 1; r < n; ++r) {
      const Complex va = q(r, a);
      const Complex vb = q(r, b);
      if (va.real() != vb.real()) return va.real() < vb.real();
      if (va.imag() != vb.imag()) return va.imag() < vb.imag();
    }
    return false;
  };
  // Re-order runs of (numerically) equal phases by eigenvector.
  for (int begin = 0; begin < n;) {
    int end = begin + 1;
    while (end < n && phases[order[end]] - phases[order[end - 1]] <= 1e-12) ++end;
    std::stable_sort(order.begin() + begin, order.begin() + end, vector_key_less);
    begin = end;
  }

  ComplexMatrix u(n, n);
  std::vector<double> sorted(n);
  for (int j = 0; j < n; ++j) {
    sorted[j] = phases[order[j]];
    u.row(j) = q.col(order[j]).adjoint();
  }
  return UnitaryEigenDecomposition{std::move(sorted), UnitaryMatrix::trusted(std::move(u))};
}

double cayley_margin(const UnitaryMatrix& x) {
  const auto n = x.dim();
  const ComplexMatrix gram =
      2.0 * ComplexMatrix::Identity(n, n) + x.matrix() + x.matrix().adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().minCoeff()));
}

ComplexMatrix cayley_inverse_term(const UnitaryMatrix& x, double singular_tol) {
  const double margin = cayley_margin(x);
  if (!(margin > singular_tol)) {
    std::ostringstream os;
    os << "matrix has an eigenvalue within " << margin << " of -1 (singular_tol "
       << singular_tol << ")";
    throw NotInW(os.str());
  }
  const auto n = x.dim();
  return (x.matrix() + ComplexMatrix::Identity(n, n)).partialPivLu().inverse();
}

}  // namespace stabilizer
