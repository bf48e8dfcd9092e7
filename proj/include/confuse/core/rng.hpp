// Deterministic random number generation for noise baselines and init draws.
//
// splitmix64 is used everywhere randomness is needed so that a run is
// reproducible from its seed alone, independent of platform or standard
// library. Doubles are derived from the top 53 bits of each output word.
#pragma once

#include <cstdint>

namespace confuse {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [-bound, bound). Exactly zero when bound is zero.
  double next_symmetric(double bound) { return (2.0 * next_unit() - 1.0) * bound; }

 private:
  std::uint64_t state_;
};

}  // namespace confuse
