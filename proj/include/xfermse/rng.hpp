#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace xfermse {

/// Seeded pseudo-random source used by the synthetic benchmark.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The conversions to doubles are done here rather than through
/// <random> distributions (whose algorithms are implementation-defined):
///
///   uniform()  = (bits >> 11) · 2⁻⁵³                       in [0, 1)
///   normal()   = Box–Muller on u₁ = 1 − uniform(), u₂ = uniform(),
///                returning √(−2 ln u₁)·cos(2πu₂) and caching the sine branch
///   below(n)   = ⌊uniform() · n⌋
///
/// Independent streams for sub-tasks are seeded with derive_seed(), a
/// SplitMix64 fold over the parent seed and integer tags.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t below(std::uint64_t n) {
    const auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t));
  return h;
}

}  // namespace xfermse
