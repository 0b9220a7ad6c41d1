#include "cspf/rng.hpp"

#include <cmath>
#include <numbers>

namespace cspf::rng {

double normal(SplitMix64& g) {
  double u = uniform01(g);
  if (u <= 0.0) u = 0x1.0p-53;
  const double v = uniform01(g);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace cspf::rng
