#pragma once

#include <cstdint>

namespace bmol {

/// Counter-based deterministic generator (splitmix64 over seed+counter).
/// Stateless per draw, so ensembles are reproducible from (seed, index).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t draw(std::uint64_t counter) const {
    std::uint64_t z = seed_ + counter * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(draw(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace bmol
