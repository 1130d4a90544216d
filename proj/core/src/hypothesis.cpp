#include "gbsplit/hypothesis.hpp"

#include "gbsplit/error.hpp"

#include <cmath>
#include <numbers>

namespace gbsplit {

double delta_condition_slack(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  return 1.0 / delta - std::numbers::pi * (2.0 * std::log(1.0 / delta) + 8.0);
}

bool delta_condition_holds(double delta) { return delta_condition_slack(delta) >= 0.0; }

double delta_star() {
  // The slack is strictly decreasing on (0, 1/(2 pi)).
  double lo = 1e-6;
  double hi = 1.0 / (2.0 * std::numbers::pi);
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (delta_condition_slack(mid) >= 0.0) lo = mid; else hi = mid;
  }
  return lo;
}

double plateau_radius(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  return std::sqrt(std::log(1.0 / delta));
}

double cutoff_constant(double n) {
  if (!(n > 1.0) || !std::isfinite(n)) throw DomainError("dilation factor must satisfy n > 1");
  return 8.0 * n * n / (n * n - 1.0);
}

double support_constant(double n) { return 4.0 * cutoff_constant(n); }

}  // namespace gbsplit
