#include "stabilizer/rng.hpp"

#include <stdexcept>

namespace stabilizer {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SeedState SeedState::derive(std::uint64_t seed, std::uint64_t run_id, std::uint64_t period,
                            std::uint64_t tag) {
  std::uint64_t key = mix64(seed + kGamma);
  key = mix64(key ^ (run_id + kGamma));
  key = mix64(key ^ (period + 2 * kGamma));
  key = mix64(key ^ (tag + 3 * kGamma));
  return SeedState{key, 0};
}

std::uint64_t SeedState::next_u64() { return mix64(key + (++counter) * kGamma); }

double SeedState::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

AmplitudeVector sample_amplitudes_symmetric(SeedState& state, int controls, int harmonics,
                                            double half_width) {
  if (!(half_width > 0.0)) throw std::invalid_argument("amplitude interval must be non-empty");
  Eigen::MatrixXd values(controls, harmonics);
  // Row-major draw order: a(1,1), ..., a(1,M), ..., a(m,M).
  for (int k = 0; k < controls; ++k) {
    for (int l = 0; l < harmonics; ++l) {
      values(k, l) = half_width * (2.0 * state.next_unit() - 1.0);
    }
  }
  return AmplitudeVector(std::move(values));
}

AmplitudeVector sample_amplitudes(SeedState& state, int controls, int harmonics, double a_max) {
  if (!(a_max > 0.0)) throw std::invalid_argument("sample_amplitudes: a_max must be positive");
  return sample_amplitudes_symmetric(state, controls, harmonics, 0.5 * a_max);
}

}  // namespace stabilizer
