#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stabilizer/errors.hpp"
#include "stabilizer/experiments.hpp"
#include "stabilizer/lie.hpp"
#include "stabilizer/rng.hpp"

namespace {

using namespace stabilizer;

std::vector<ComplexMatrix> raw_generators(const SystemDef& sys) {
  std::vector<ComplexMatrix> out;
  for (const auto& s : sys.generators()) out.push_back(s.matrix());
  return out;
}

SystemDef su2_pair() {
  ComplexMatrix sx(2, 2), sy(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  sy << 0.0, Complex(0, -1), Complex(0, 1), 0.0;
  return SystemDef({SkewHermitianMatrix::from_hamiltonian(sx), SkewHermitianMatrix::from_hamiltonian(sy)});
}

TEST(SystemDef, Combine) {
  const CnotExperiment e = build_cnot_system();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(6);
  u(5) = 2.0;
  EXPECT_LT((e.sys.combine(u) - Complex(0, -2) * ComplexMatrix::Identity(4, 4)).norm(), 1e-15);
  EXPECT_THROW(SystemDef({SkewHermitianMatrix::zero(2), SkewHermitianMatrix::zero(3)}), InvariantViolation);
}

TEST(RealSpanRank, MatchesGramOracle) {
  const CnotExperiment e = build_cnot_system();
  const auto gens = raw_generators(e.sys);
  for (int len = 1; len <= 4; ++len) {
    const auto words = oracle::all_right_normed(gens, len);
    EXPECT_EQ(real_span_rank(words), oracle::gram_rank(words, 1e-9)) << len;
  }
}

TEST(RealSpanRank, RealNotComplexSpan) {
  // i * S is complex-dependent on S but real-independent of it.
  const ComplexMatrix s = (ComplexMatrix(2, 2) << Complex(0, 1), 0.0, 0.0, Complex(0, -1)).finished();
  const std::vector<ComplexMatrix> elems = {s, Complex(0, 1) * s};
  EXPECT_EQ(real_span_rank(elems), 2);
  const std::vector<ComplexMatrix> dependent = {s, 3.0 * s};
  EXPECT_EQ(real_span_rank(dependent), 1);
}

TEST(LieClosure, CnotSystemIsControllableAtDepthThree) {
  const CnotExperiment e = build_cnot_system();
  const BracketClosureReport r = lie_closure(e.sys);
  EXPECT_EQ(r.rank, 16);
  EXPECT_EQ(r.max_depth_used, 3);
  EXPECT_EQ(static_cast<int>(r.basis.size()), 16);
  for (const auto& b : r.basis) EXPECT_LT(skew_defect(b.matrix()), 1e-12);
}

TEST(LieClosure, DepthLimitedRankMatchesBruteForce) {
  const CnotExperiment e = build_cnot_system();
  const auto gens = raw_generators(e.sys);
  for (int depth = 0; depth <= 3; ++depth) {
    const int expected = oracle::gram_rank(oracle::all_right_normed(gens, depth + 1), 1e-9);
    EXPECT_EQ(lie_closure(e.sys, depth).rank, expected) << depth;
  }
}

TEST(LieClosure, Su2PairWithoutIdentity) {
  const BracketClosureReport r = lie_closure(su2_pair());
  EXPECT_EQ(r.rank, 3);
  EXPECT_EQ(r.max_depth_used, 1);
}

TEST(LieClosure, CommutingGeneratorsDoNotGrow) {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3), b = ComplexMatrix::Zero(3, 3);
  a(0, 0) = Complex(0, 1);
  b(1, 1) = Complex(0, 1);
  b(2, 2) = Complex(0, -1);
  const BracketClosureReport r = lie_closure(SystemDef({SkewHermitianMatrix::from(a), SkewHermitianMatrix::from(b)}));
  EXPECT_EQ(r.rank, 2);
  EXPECT_EQ(r.max_depth_used, 0);
}

TEST(TaylorA, CoefficientsOfSine) {
  const SystemDef sys = su2_pair();
  Eigen::MatrixXd a(2, 2);
  a << 0.3, -0.1, 0.2, 0.05;
  const AmplitudeVector amps(a);
  const double period = 5.0;
  const TaylorMatrixSeries series = taylor_A(sys, amps, period, 5);
  const double w = 2 * kPi / period;
  // Coefficient of t^3 is -sum_l a_kl (l w)^3 / 6 per control.
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  for (int k = 0; k < 2; ++k) {
    double c = 0.0;
    for (int l = 0; l < 2; ++l) c -= a(k, l) * std::pow((l + 1) * w, 3) / 6.0;
    expected += c * sys.generator(k).matrix();
  }
  EXPECT_LT((series.coefficients[3] - expected).norm(), 1e-14);
  EXPECT_EQ(series.coefficients[0].norm(), 0.0);
  EXPECT_EQ(series.coefficients[2].norm(), 0.0);
  const TaylorMatrixSeries d = series.derivative();
  EXPECT_EQ(d.order(), 4);
  EXPECT_LT((d.coefficients[2] - 3.0 * series.coefficients[3]).norm(), 1e-15);
}

TEST(CoronMatrices, ZeroAmplitudesLeaveOnlyGenerators) {
  const CnotExperiment e = build_cnot_system();
  const AmplitudeVector zero(6, 4);
  const CoronMatrices c = coron_matrices_at_zero(e.sys, zero, 25.0, 4);
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(c.at(k, 0).matrix(), e.sys.generator(k).matrix());
    for (int j = 1; j <= 4; ++j) EXPECT_EQ(c.at(k, j).matrix().norm(), 0.0);
  }
  EXPECT_EQ(admissibility_rank(e.sys, zero, 25.0, 8), 6);
}

TEST(CoronMatrices, FirstOrderIsCommutatorWithInitialRate) {
  // C^1(0) = dS/dt + [S, A(0)] = 0 since A(0) = 0; C^2(0) = [S, A'(0)].
  const SystemDef sys = su2_pair();
  Eigen::MatrixXd a(2, 1);
  a << 0.4, -0.7;
  const AmplitudeVector amps(a);
  const double period = 3.0, w = 2 * kPi / period;
  const CoronMatrices c = coron_matrices_at_zero(sys, amps, period, 2);
  const ComplexMatrix a_dot = w * (0.4 * sys.generator(0).matrix() - 0.7 * sys.generator(1).matrix());
  EXPECT_LT(c.at(0, 1).matrix().norm(), 1e-15);
  EXPECT_LT((c.at(0, 2).matrix() - commutator(sys.generator(0).matrix(), a_dot)).norm(), 1e-14);
}

TEST(CoronMatrices, MatchCauchyIntegralOracle) {
  const CnotExperiment e = build_cnot_system();
  const AmplitudeVector amps = deterministic_draw(e, 11, 3);
  const int depth = 8;
  const CoronMatrices c = coron_matrices_at_zero(e.sys, amps, e.params.period, depth);
  const auto ref = oracle::coron_by_cauchy(e.sys, amps, e.params.period, depth, 2.0, 48, 400);
  for (int k = 0; k < 6; ++k) {
    for (int j = 0; j <= depth; ++j) {
      const double scale = std::max(ref[k][j].norm(), 1e-12);
      EXPECT_LT((c.at(k, j).matrix() - ref[k][j]).norm(), 1e-7 * std::max(scale, 1e-6))
          << "k=" << k << " j=" << j << " |C|=" << ref[k][j].norm();
    }
  }
}

TEST(Admissibility, GenericAmplitudesReachFullRank) {
  const CnotExperiment e = build_cnot_system();
  const AmplitudeVector amps = deterministic_draw(e, 1, 0);
  EXPECT_EQ(admissibility_rank(e.sys, amps, 25.0, default_admissibility_depth(4)), 16);
  EXPECT_EQ(default_admissibility_depth(4), 8);
}

}  // namespace
