#include "squash/rng.hpp"

#include <cmath>
#include <numbers>

namespace squash::rng {

double standard_normal(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t h1 = mix(seed ^ mix(counter));
  const std::uint64_t h2 = mix(h1 ^ 0x5851f42d4c957f2dULL);
  constexpr double kScale = 0x1.0p-53;
  const double u1 = static_cast<double>((h1 >> 11) + 1) * kScale;  // (0, 1]
  const double u2 = static_cast<double>(h2 >> 11) * kScale;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace squash::rng
