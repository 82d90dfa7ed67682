#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace sharpcal {

/// Seed of substream `stream` under master seed `seed` (two SplitMix64 rounds).
/// Every stochastic kernel draws chunk j (or candidate j) from its own
/// substream so serial and OpenMP runs produce identical numbers.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Platform-independent random stream: std::mt19937_64 with explicit
/// bit-level conversions (the standard distributions are implementation
/// defined, so they are not used).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

  /// Uniform on the open interval (0,1): 53-bit grid shifted by half a step.
  double uniform_open() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi].
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform_open(); }

  /// Uniform integer in [0, n), n > 0, by rejection.
  std::uint64_t index(std::uint64_t n) noexcept {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sharpcal
