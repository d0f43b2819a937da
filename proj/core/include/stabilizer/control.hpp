#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stabilizer/matrix.hpp"

namespace stabilizer {

/// Coefficients a(k, l) of ubar_k(t) = sum_l a(k, l) sin(l w t), w = 2 pi / T.
/// Rows index controls, columns index harmonics (l = 1..M in column l - 1).
class AmplitudeVector {
 public:
  AmplitudeVector(int controls, int harmonics);
  explicit AmplitudeVector(Eigen::MatrixXd values);

  int controls() const { return static_cast<int>(values_.rows()); }
  int harmonics() const { return static_cast<int>(values_.cols()); }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(int k, int l) const { return values_(k, l); }

  AmplitudeVector scaled(double c) const { return AmplitudeVector(c * values_); }

  bool operator==(const AmplitudeVector& other) const { return values_ == other.values_; }

 private:
  Eigen::MatrixXd values_;
};

/// Constant feedback gains f_k > 0.
class FeedbackGains {
 public:
  /// Throws InvariantViolation unless every gain is finite and positive.
  explicit FeedbackGains(std::vector<double> gains);
  static FeedbackGains uniform(int controls, double gain);

  int size() const { return static_cast<int>(gains_.size()); }
  double operator[](int k) const { return gains_[k]; }
  const std::vector<double>& values() const { return gains_; }

 private:
  std::vector<double> gains_;
};

struct ControlSnapshot {
  double t = 0.0;
  Eigen::VectorXd u_ref;
  Eigen::VectorXd u_fb;
  Eigen::VectorXd u_total;
};

/// ubar_k(t) for every control k. Throws std::invalid_argument if T <= 0.
Eigen::VectorXd reference_control(const AmplitudeVector& amps, double period, double t);

/// i (X - I)(X + I)^{-1}, Hermitian on W. Throws NotInW off W.
ComplexMatrix upsilon(const UnitaryMatrix& x, double singular_tol = kSingularTol);

/// V(X) = Tr(Y Y^H) with Y = upsilon(X); equals sum_j tan^2(theta_j / 2).
double lyapunov(const UnitaryMatrix& x, double singular_tol = kSingularTol);

/// sum_j tan^2(theta_j / 2) over the eigenphases of X.
double lyapunov_from_eigenphases(const UnitaryMatrix& x);

/// Z = X (X - I)(X + I)^{-3}, skew-Hermitian on W. (X + I)^{-3} is the cube
/// of cayley_inverse_term rather than an inverse of (X + I)^3.
ComplexMatrix feedback_Z(const UnitaryMatrix& x, double singular_tol = kSingularTol);

/// utilde_k = f_k Re Tr(Z(X_tilde) S_tilde_k) where S_tilde_k = Xbar^H S_k
/// Xbar is supplied by the caller. Throws IntegratorTolerance if a trace
/// carries an imaginary residue above 1e-9 (relative to its magnitude).
Eigen::VectorXd feedback_controls(const UnitaryMatrix& x_tilde,
                                  const std::vector<ComplexMatrix>& s_tilde,
                                  const FeedbackGains& gains,
                                  double singular_tol = kSingularTol);

/// Same law evaluated directly from (Xbar, X) without forming S_tilde:
/// Tr(Z Xbar^H S_k Xbar) = Tr(Xbar Z Xbar^H S_k).
Eigen::VectorXd feedback_controls(const UnitaryMatrix& x_bar, const UnitaryMatrix& x,
                                  const std::vector<SkewHermitianMatrix>& generators,
                                  const FeedbackGains& gains,
                                  double singular_tol = kSingularTol);

struct FeedbackEvaluation {
  Eigen::VectorXd feedback;
  double lyapunov = 0.0;
};

/// Feedback and V(Xbar^H X) from a single (X_tilde + I)^{-1}.
FeedbackEvaluation evaluate_feedback(const ComplexMatrix& x_bar, const ComplexMatrix& x,
                                     const std::vector<SkewHermitianMatrix>& generators,
                                     const FeedbackGains& gains,
                                     double singular_tol = kSingularTol);

/// -4 sum_k utilde_k^2 / f_k, the instantaneous derivative of V along the
/// closed loop.
double lyapunov_rate(const Eigen::VectorXd& feedback, const FeedbackGains& gains);

}  // namespace stabilizer
