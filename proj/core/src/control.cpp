#include "stabilizer/control.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stabilizer/errors.hpp"

namespace stabilizer {

AmplitudeVector::AmplitudeVector(int controls, int harmonics)
    : values_(Eigen::MatrixXd::Zero(controls, harmonics)) {
  if (controls < 1 || harmonics < 1) {
    throw InvariantViolation("amplitude vector needs at least one control and one harmonic");
  }
}

AmplitudeVector::AmplitudeVector(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw InvariantViolation("amplitude vector needs at least one control and one harmonic");
  }
}

FeedbackGains::FeedbackGains(std::vector<double> gains) : gains_(std::move(gains)) {
  if (gains_.empty()) throw InvariantViolation("feedback gains must not be empty");
  for (double f : gains_) {
    if (!(std::isfinite(f) && f > 0.0)) {
      throw InvariantViolation("feedback gains must be finite and positive");
    }
  }
}

FeedbackGains FeedbackGains::uniform(int controls, double gain) {
  return FeedbackGains(std::vector<double>(static_cast<std::size_t>(controls), gain));
}

Eigen::VectorXd reference_control(const AmplitudeVector& amps, double period, double t) {
  if (!(period > 0.0)) throw std::invalid_argument("reference_control: period must be positive");
  const double omega = 2.0 * kPi / period;
  Eigen::VectorXd harmonics(amps.harmonics());
  for (int l = 0; l < amps.harmonics(); ++l) harmonics(l) = std::sin((l + 1) * omega * t);
  return amps.values() * harmonics;
}

ComplexMatrix upsilon(const UnitaryMatrix& x, double singular_tol) {
  const ComplexMatrix inv = cayley_inverse_term(x, singular_tol);
  const auto n = x.dim();
  return Complex(0.0, 1.0) * (x.matrix() - ComplexMatrix::Identity(n, n)) * inv;
}

double lyapunov(const UnitaryMatrix& x, double singular_tol) {
  return upsilon(x, singular_tol).squaredNorm();
}

double lyapunov_from_eigenphases(const UnitaryMatrix& x) {
  double v = 0.0;
  for (double theta : eig_unitary(x).eigenphases) {
    const double t = std::tan(0.5 * theta);
    v += t * t;
  }
  return v;
}

ComplexMatrix feedback_Z(const UnitaryMatrix& x, double singular_tol) {
  const ComplexMatrix inv = cayley_inverse_term(x, singular_tol);
  const auto n = x.dim();
  return x.matrix() * (x.matrix() - ComplexMatrix::Identity(n, n)) * (inv * inv * inv);
}

namespace {

// Tr(A B) without forming the product.
Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.transpose().cwiseProduct(b).sum();
}

double checked_real(Complex tr) {
  if (std::abs(tr.imag()) > 1e-9 * std::max(1.0, std::abs(tr))) {
    std::ostringstream os;
    os << "feedback trace has imaginary residue " << tr.imag();
    throw IntegratorTolerance(os.str());
  }
  return tr.real();
}

}  // namespace

Eigen::VectorXd feedback_controls(const UnitaryMatrix& x_tilde,
                                  const std::vector<ComplexMatrix>& s_tilde,
                                  const FeedbackGains& gains, double singular_tol) {
  if (static_cast<int>(s_tilde.size()) != gains.size()) {
    throw std::invalid_argument("feedback_controls: one gain per control direction required");
  }
  const ComplexMatrix z = feedback_Z(x_tilde, singular_tol);
  Eigen::VectorXd u(gains.size());
  for (int k = 0; k < gains.size(); ++k) {
    u(k) = gains[k] * checked_real(trace_product(z, s_tilde[k]));
  }
  return u;
}

FeedbackEvaluation evaluate_feedback(const ComplexMatrix& x_bar, const ComplexMatrix& x,
                                     const std::vector<SkewHermitianMatrix>& generators,
                                     const FeedbackGains& gains, double singular_tol) {
  if (static_cast<int>(generators.size()) != gains.size()) {
    throw std::invalid_argument("feedback_controls: one gain per generator required");
  }
  const auto n = x.rows();
  const UnitaryMatrix x_tilde = UnitaryMatrix::trusted(x_bar.adjoint() * x);
  const ComplexMatrix inv = cayley_inverse_term(x_tilde, singular_tol);
  const ComplexMatrix diff = x_tilde.matrix() - ComplexMatrix::Identity(n, n);
  const ComplexMatrix cayley = diff * inv;
  // Tr(Z Xbar^H S_k Xbar) = Tr(Xbar Z Xbar^H S_k).
  const ComplexMatrix rotated =
      x_bar * (x_tilde.matrix() * cayley * inv * inv) * x_bar.adjoint();

  FeedbackEvaluation out;
  out.feedback.resize(gains.size());
  for (int k = 0; k < gains.size(); ++k) {
    out.feedback(k) = gains[k] * checked_real(trace_product(rotated, generators[k].matrix()));
  }
  out.lyapunov = cayley.squaredNorm();
  return out;
}

Eigen::VectorXd feedback_controls(const UnitaryMatrix& x_bar, const UnitaryMatrix& x,
                                  const std::vector<SkewHermitianMatrix>& generators,
                                  const FeedbackGains& gains, double singular_tol) {
  return evaluate_feedback(x_bar.matrix(), x.matrix(), generators, gains, singular_tol).feedback;
}

double lyapunov_rate(const Eigen::VectorXd& feedback, const FeedbackGains& gains) {
  double rate = 0.0;
  for (int k = 0; k < gains.size(); ++k) rate += feedback(k) * feedback(k) / gains[k];
  return -4.0 * rate;
}

}  // namespace stabilizer
