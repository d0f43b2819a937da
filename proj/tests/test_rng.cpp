#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "stabilizer/rng.hpp"

namespace {

using namespace stabilizer;

TEST(SeedState, Reproducible) {
  SeedState a = stream(42, 3, 7, StreamTag::kStochasticPeriod);
  SeedState b = stream(42, 3, 7, StreamTag::kStochasticPeriod);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(SeedState, StreamsAreDistinct) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t run = 0; run < 10; ++run) {
    for (std::uint64_t period = 0; period < 10; ++period) {
      for (auto tag : {StreamTag::kStochasticPeriod, StreamTag::kDeterministicDraw}) {
        SeedState s = stream(1, run, period, tag);
        firsts.insert(s.next_u64());
      }
    }
  }
  EXPECT_EQ(firsts.size(), 200u);
}

TEST(SeedState, UnitInterval) {
  SeedState s = stream(9, 0, 0, StreamTag::kTest);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.next_unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(SampleAmplitudes, HalfIntervalMoments) {
  // Uniform on [-a/2, a/2]: mean 0, variance a^2 / 12, fourth moment a^4 / 80.
  const double a_max = 0.5;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0, lo = 1.0, hi = -1.0;
  int count = 0;
  for (std::uint64_t p = 0; p < 2000; ++p) {
    SeedState st = stream(3, 0, p, StreamTag::kStochasticPeriod);
    const AmplitudeVector v = sample_amplitudes(st, 6, 4, a_max);
    for (int k = 0; k < 6; ++k) {
      for (int l = 0; l < 4; ++l) {
        const double x = v(k, l);
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        ++count;
      }
    }
  }
  s1 /= count;
  s2 /= count;
  s4 /= count;
  const double var = a_max * a_max / 12.0;
  EXPECT_NEAR(s1, 0.0, 5.0 * std::sqrt(var / count));
  EXPECT_NEAR(s2, var, 0.02 * var);
  EXPECT_NEAR(s4, std::pow(a_max, 4) / 80.0, 0.04 * std::pow(a_max, 4) / 80.0);
  EXPECT_GE(lo, -a_max / 2);
  EXPECT_LE(hi, a_max / 2);
  EXPECT_LT(lo, -0.99 * a_max / 2);
  EXPECT_GT(hi, 0.99 * a_max / 2);
}

TEST(SampleAmplitudes, SymmetricUsesFullWidth) {
  SeedState a = stream(5, 1, 0, StreamTag::kDeterministicDraw);
  SeedState b = stream(5, 1, 0, StreamTag::kDeterministicDraw);
  const AmplitudeVector full = sample_amplitudes_symmetric(a, 6, 4, 0.25);
  const AmplitudeVector half = sample_amplitudes(b, 6, 4, 0.25);
  EXPECT_LT((full.values() - 2.0 * half.values()).norm(), 1e-15);
  EXPECT_LE(full.values().cwiseAbs().maxCoeff(), 0.25);
}

TEST(SampleAmplitudes, RowMajorDrawOrder) {
  SeedState a = stream(6, 0, 0, StreamTag::kTest);
  SeedState b = stream(6, 0, 0, StreamTag::kTest);
  const AmplitudeVector v = sample_amplitudes_symmetric(a, 2, 3, 1.0);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 3; ++l) EXPECT_EQ(v(k, l), 2.0 * b.next_unit() - 1.0);
  }
}

TEST(SampleAmplitudes, RejectsEmptyInterval) {
  SeedState s = stream(1, 0, 0, StreamTag::kTest);
  EXPECT_THROW(sample_amplitudes(s, 2, 2, 0.0), std::invalid_argument);
}

}  // namespace
