#pragma once

#include <cstdint>

#include "stabilizer/control.hpp"

namespace stabilizer {

/// Counter-based stream: the n-th draw is a pure function of (key, n).
/// Keys are derived from an experiment seed and stream coordinates, so any
/// (run, period) draw can be reproduced without replaying earlier draws.
struct SeedState {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  /// Key for the stream identified by (seed, run_id, period, tag).
  static SeedState derive(std::uint64_t seed, std::uint64_t run_id, std::uint64_t period,
                          std::uint64_t tag = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_unit();
};

/// Stream tags separating independent uses of one (seed, run_id).
enum class StreamTag : std::uint64_t {
  kStochasticPeriod = 1,
  kDeterministicDraw = 2,
  kQSample = 3,
  kTest = 4,
};

inline SeedState stream(std::uint64_t seed, std::uint64_t run_id, std::uint64_t period,
                        StreamTag tag) {
  return SeedState::derive(seed, run_id, period, static_cast<std::uint64_t>(tag));
}

/// i.i.d. uniform entries on [-a_max/2, a_max/2], the per-period law of the
/// stochastic strategy. Advances `state`. Throws std::invalid_argument if
/// a_max <= 0.
AmplitudeVector sample_amplitudes(SeedState& state, int controls, int harmonics, double a_max);

/// i.i.d. uniform entries on [-half_width, half_width].
AmplitudeVector sample_amplitudes_symmetric(SeedState& state, int controls, int harmonics,
                                            double half_width);

}  // namespace stabilizer
