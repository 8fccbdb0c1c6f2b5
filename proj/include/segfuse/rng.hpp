#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace segfuse {

// Seeded randomness for the whole library. Every stochastic operation takes
// an explicit seed; streams are split by hashing (seed, stream id) so results
// never depend on call order. Distributions are implemented here rather than
// taken from <random> because the standard leaves their algorithms
// unspecified, and generated artifacts must be byte-reproducible.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream * kGoldenGamma + 0x632be59bd9b4e019ULL));
}

/// Maps 64 random bits to a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

  double uniform() noexcept { return to_unit((*this)()); }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Box-Muller; one variate per call, the pair's sine half is discarded.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential() noexcept { return -std::log(1.0 - uniform()); }

 private:
  std::uint64_t state_;
};

/// Standard normal variate addressed by (seed, counter), no state.
inline double normal_at(std::uint64_t seed, std::uint64_t counter) noexcept {
  const std::uint64_t base = seed + 2 * counter * kGoldenGamma;
  const double u1 = 1.0 - to_unit(mix64(base + kGoldenGamma));
  const double u2 = to_unit(mix64(base + 2 * kGoldenGamma));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace segfuse
