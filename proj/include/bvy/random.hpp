#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace bvy {

/// Purposes for which independent random streams are derived from one seed.
enum class StreamTag : std::uint64_t {
  Window = 1,
  Ball = 2,
  Direct = 3,
  Localized = 4,
  LipLadder = 5,
  GlobalLip = 6,
  GradNorm = 7,
  Shell = 8,
  KNorm = 9,
  Doubling = 10,
  Density = 11,
  VolumeLower = 12,
  BallMeasure = 13,
  Blowup = 14,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based random stream. The state is a pure function of
/// (seed, tag, index), so work split into indexed chunks draws the same
/// numbers no matter which worker runs which chunk.
///
/// Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
      : state_(splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(tag)) ^ index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on (0, 1].
  double uniform_open0() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal (Box-Muller, one value per call).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  /// Uniform index in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace bvy
