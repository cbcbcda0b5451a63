#include "decdim/rng.hpp"

#include <cmath>
#include <numbers>

namespace decdim {

double SeedStream::NextGaussian() {
  double u1 = NextUniform();
  const double u2 = NextUniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace decdim
