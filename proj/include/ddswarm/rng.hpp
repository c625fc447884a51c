#pragma once

#include <cmath>
#include <cstdint>

namespace ddswarm {

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator keyed by (seed, step, cell, stream). Every draw is
/// a pure function of the key and the draw index, so a cell's random numbers
/// do not depend on which worker processes it or in which order.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t step, std::uint64_t cell, std::uint64_t stream)
      : key_(mix64(mix64(mix64(mix64(seed) ^ step) ^ cell) ^ stream)) {}

  std::uint64_t next() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    std::uint64_t low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// floor(x) + Bernoulli(frac(x)); unbiased integer estimate of x >= 0.
  std::int64_t stochastic_round(double x) {
    const double fl = std::floor(x);
    return static_cast<std::int64_t>(fl) + (uniform() < x - fl ? 1 : 0);
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Streams used when keying per-step draws.
enum RngStream : std::uint64_t {
  kStreamBalance = 1,
  kStreamKick = 2,
  kStreamInit = 3,
  kStreamJitter = 4,
  kStreamCalibration = 5,
  kStreamBootstrap = 6,
};

}  // namespace ddswarm
