#include "deeppde/rng.hpp"

#include <cmath>

namespace deeppde {

double RngState::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on (u1, u2); u1 shifted away from 0 so log stays finite.
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::vector<double> gauss_sample(RngState& rng, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.next_gaussian();
  return out;
}

std::vector<double> uniform_sample(RngState& rng, double lo, double hi, std::size_t n) {
  if (!(lo < hi)) throw ConfigError("uniform_sample: requires lo < hi");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * rng.next_unit();
  return out;
}

}  // namespace deeppde
