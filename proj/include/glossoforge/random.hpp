#pragma once

#include <cstdint>
#include <random>

namespace glossoforge {

// std::mt19937_64 output is fixed by the standard, but the std distributions
// are not; draws here are implemented locally so a seed reproduces the same
// candidates with any standard library.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

  bool chance(std::uint64_t numerator, std::uint64_t denominator) {
    return below(denominator) < numerator;
  }

 private:
  std::mt19937_64 engine_;
};

inline constexpr std::uint64_t kDefaultSeed = 20220802;

}  // namespace glossoforge
