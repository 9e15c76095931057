#include "repdyn/game.hpp"

namespace repdyn {

void PayoffParams::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("payoff: cost c must be positive");
  if (!(b > c)) throw std::invalid_argument("payoff: benefit b must exceed cost c");
}

void validate_assignment_error(double chi) {
  if (!(chi >= 0.0 && chi < 0.5)) {
    throw std::invalid_argument("reputation assignment error chi must be in [0, 0.5), got " + std::to_string(chi));
  }
}

double uniform01(Rng& rng) {
  // 53 high bits -> [0, 1), identical on every platform for a given seed.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Reputation assign_with_error(Reputation intended, double chi, Rng& rng) {
  validate_assignment_error(chi);
  return uniform01(rng) < chi ? flip(intended) : intended;
}

}  // namespace repdyn
