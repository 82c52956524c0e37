#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace blockprop {

/// Counter-based deterministic generator (splitmix64). Every output file that
/// depends on randomness records rng_algorithm() so traces can be reproduced
/// by any implementation of the same mixing function.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : state_(seed) {}

  static constexpr std::string_view algorithm() { return "splitmix64"; }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n). Multiply-shift map; bias is below n / 2^64.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Exponential with the given mean. mean = 0 yields the degenerate draw 0.
  double exponential(double mean) {
    if (mean <= 0.0) return 0.0;
    return -mean * std::log1p(-uniform());
  }

 private:
  std::uint64_t state_;
};

}  // namespace blockprop
