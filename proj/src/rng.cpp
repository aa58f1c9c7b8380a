#include "cascadelab/rng.hpp"

#include <cmath>

namespace cascadelab {

double PhiloxEngine::exponential() noexcept { return -std::log(uniform_positive()); }

double PhiloxEngine::normal() noexcept {
  const double r = std::sqrt(-2.0 * std::log(uniform_positive()));
  return r * std::cos(2.0 * 3.14159265358979323846 * uniform());
}

}  // namespace cascadelab
