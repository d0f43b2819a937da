#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stabilizer/control.hpp"
#include "stabilizer/errors.hpp"
#include "stabilizer/experiments.hpp"
#include "stabilizer/rng.hpp"

namespace {

using namespace stabilizer;

UnitaryMatrix random_in_w(SeedState& rng, int n, double max_phase) {
  std::vector<double> theta;
  for (int j = 0; j < n; ++j) theta.push_back(max_phase * (2.0 * rng.next_unit() - 1.0));
  return UnitaryMatrix::from(oracle::with_phases(oracle::random_unitary(rng, n), theta), 1e-12);
}

TEST(AmplitudeVector, ShapeAndScaling) {
  AmplitudeVector a(3, 2);
  EXPECT_EQ(a.controls(), 3);
  EXPECT_EQ(a.harmonics(), 2);
  EXPECT_EQ(a.values().norm(), 0.0);
  EXPECT_THROW(AmplitudeVector(0, 2), InvariantViolation);
  Eigen::MatrixXd v(1, 2);
  v << 1.0, -2.0;
  EXPECT_EQ(AmplitudeVector(v).scaled(2.0)(0, 1), -4.0);
}

TEST(FeedbackGains, RejectsNonPositive) {
  EXPECT_THROW(FeedbackGains({1.0, 0.0}), InvariantViolation);
  EXPECT_THROW(FeedbackGains({1.0, -1.0}), InvariantViolation);
  EXPECT_THROW(FeedbackGains(std::vector<double>{}), InvariantViolation);
  EXPECT_EQ(FeedbackGains::uniform(3, 0.5)[2], 0.5);
}

TEST(ReferenceControl, SumOfHarmonics) {
  Eigen::MatrixXd v(2, 3);
  v << 0.1, 0.2, 0.3, -0.4, 0.5, -0.6;
  const AmplitudeVector a(v);
  const double period = 7.0, t = 1.3, w = 2 * kPi / period;
  const Eigen::VectorXd u = reference_control(a, period, t);
  for (int k = 0; k < 2; ++k) {
    double expected = 0.0;
    for (int l = 0; l < 3; ++l) expected += v(k, l) * std::sin((l + 1) * w * t);
    EXPECT_NEAR(u(k), expected, 1e-15);
  }
  // Odd about T/2: ubar(T - t) = -ubar(t).
  EXPECT_LT((reference_control(a, period, period - t) + u).norm(), 1e-14);
  EXPECT_THROW(reference_control(a, 0.0, 1.0), std::invalid_argument);
}

TEST(Lyapunov, TraceFormulaMatchesEigenphaseFormula) {
  SeedState rng = stream(21, 0, 0, StreamTag::kTest);
  for (int trial = 0; trial < 100; ++trial) {
    const UnitaryMatrix x = random_in_w(rng, 1 + trial % 6, 3.0);
    const double a = lyapunov(x);
    const double b = lyapunov_from_eigenphases(x);
    EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, b)) << trial;
  }
}

TEST(Lyapunov, KnownValues) {
  EXPECT_EQ(lyapunov(UnitaryMatrix::identity(4)), 0.0);
  const CnotExperiment e = build_cnot_system();
  // goal1 has eigenphases {-pi/2, pi/2, pi/2, pi/2}: four tan^2(pi/4) = 1 terms.
  EXPECT_NEAR(lyapunov(e.goal1), 4.0, 1e-12);
  EXPECT_THROW(lyapunov(cnot_gate()), NotInW);
}

TEST(Upsilon, IsHermitian) {
  SeedState rng = stream(22, 0, 0, StreamTag::kTest);
  const UnitaryMatrix x = random_in_w(rng, 4, 2.5);
  const ComplexMatrix y = upsilon(x);
  EXPECT_LT((y - y.adjoint()).norm(), 1e-12 * y.norm());
}

TEST(FeedbackZ, IsSkewHermitianAndVanishesAtIdentity) {
  SeedState rng = stream(23, 0, 0, StreamTag::kTest);
  const UnitaryMatrix x = random_in_w(rng, 4, 2.5);
  const ComplexMatrix z = feedback_Z(x);
  EXPECT_LT(skew_defect(z), 1e-11 * z.norm());
  EXPECT_EQ(feedback_Z(UnitaryMatrix::identity(3)).norm(), 0.0);
}

TEST(Feedback, ZeroAtEquilibrium) {
  const CnotExperiment e = build_cnot_system();
  const Eigen::VectorXd u = feedback_controls(e.goal1, e.goal1, e.sys.generators(), FeedbackGains::uniform(6, 0.75));
  EXPECT_EQ(u.norm(), 0.0);
}

TEST(Feedback, RotatedAndDirectFormsAgree) {
  SeedState rng = stream(24, 0, 0, StreamTag::kTest);
  const CnotExperiment e = build_cnot_system();
  const FeedbackGains gains({0.5, 0.75, 1.0, 1.25, 1.5, 2.0});
  const UnitaryMatrix x_bar = UnitaryMatrix::from(oracle::random_unitary(rng, 4), 1e-12);
  const UnitaryMatrix x_tilde = random_in_w(rng, 4, 2.0);
  const UnitaryMatrix x = x_bar * x_tilde;

  std::vector<ComplexMatrix> s_tilde;
  for (const auto& s : e.sys.generators()) s_tilde.push_back(x_bar.adjoint().matrix() * s.matrix() * x_bar.matrix());
  const Eigen::VectorXd a = feedback_controls(x_tilde, s_tilde, gains);
  const FeedbackEvaluation b = evaluate_feedback(x_bar.matrix(), x.matrix(), e.sys.generators(), gains);
  EXPECT_LT((a - b.feedback).norm(), 1e-11 * std::max(1.0, a.norm()));
  EXPECT_NEAR(b.lyapunov, lyapunov(x_tilde), 1e-10 * std::max(1.0, b.lyapunov));
}

TEST(Feedback, LyapunovRateMatchesFiniteDifference) {
  // Along dX~/dt = sum_k u~_k S~_k X~ with Xbar frozen, dV/dt = -4 sum u~^2 / f.
  SeedState rng = stream(25, 0, 0, StreamTag::kTest);
  const CnotExperiment e = build_cnot_system();
  const FeedbackGains gains({0.3, 0.75, 1.1, 0.9, 0.6, 2.0});
  for (int trial = 0; trial < 10; ++trial) {
    const UnitaryMatrix x_bar = UnitaryMatrix::from(oracle::random_unitary(rng, 4), 1e-12);
    const UnitaryMatrix x_tilde = random_in_w(rng, 4, 2.0);
    std::vector<ComplexMatrix> s_tilde;
    ComplexMatrix drift = ComplexMatrix::Zero(4, 4);
    for (const auto& s : e.sys.generators()) {
      s_tilde.push_back(x_bar.adjoint().matrix() * s.matrix() * x_bar.matrix());
    }
    const Eigen::VectorXd u = feedback_controls(x_tilde, s_tilde, gains);
    for (int k = 0; k < 6; ++k) drift += u(k) * s_tilde[k];

    const double h = 1e-5;
    const ComplexMatrix plus = oracle::expm_series(drift, h) * x_tilde.matrix();
    const ComplexMatrix minus = oracle::expm_series(drift, -h) * x_tilde.matrix();
    const double fd = (lyapunov(UnitaryMatrix::trusted(plus)) - lyapunov(UnitaryMatrix::trusted(minus))) / (2 * h);
    const double rate = lyapunov_rate(u, gains);
    EXPECT_LE(rate, 0.0);
    EXPECT_NEAR(fd, rate, 1e-5 * std::max(1.0, std::abs(rate))) << trial;
  }
}

}  // namespace
