#pragma once

#include <cstdint>

namespace squash::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of trajectory `index` in an ensemble keyed by `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix(mix(base) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

/// Counter-based standard normal: the value depends only on (seed, counter).
double standard_normal(std::uint64_t seed, std::uint64_t counter);

}  // namespace squash::rng
