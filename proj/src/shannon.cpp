#include "macsplit/shannon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace macsplit {

namespace {
constexpr double kLn2 = 0.6931471805599453094172321;
}

Rate capacity(Power power, Nis nis) {
  if (!(nis > 0.0) || !std::isfinite(nis)) {
    throw std::domain_error("capacity: nis must be positive and finite");
  }
  if (!(power >= 0.0) || !std::isfinite(power)) {
    throw std::domain_error("capacity: power must be nonnegative and finite");
  }
  return 0.5 * std::log1p(power / nis) / kLn2;
}

Nis nis_for_rate(Rate rate, Power power) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::domain_error("nis_for_rate: rate must be positive and finite");
  }
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw std::domain_error("nis_for_rate: power must be positive and finite");
  }
  return power / std::expm1(2.0 * rate * kLn2);
}

bool rel_close(double a, double b, double tol, double scale) {
  return std::abs(a - b) <= tol * std::max(std::abs(scale), 1e-300);
}

}  // namespace macsplit
