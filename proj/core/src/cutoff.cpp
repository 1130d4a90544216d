#include "gbsplit/cutoff.hpp"

#include "gbsplit/error.hpp"
#include "gbsplit/hypothesis.hpp"

#include <cmath>
#include <sstream>

namespace gbsplit {

double smoothstep(double t) noexcept { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_d1(double t) noexcept { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
double smoothstep_d2(double t) noexcept { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

CutoffSigma CutoffSigma::build(double delta, double n) {
  if (!(delta > 0.0 && delta < 0.5)) {
    std::ostringstream os;
    os << "delta = " << delta << " violates 0 < delta < 0.5";
    throw PreconditionError(os.str());
  }
  if (!delta_condition_holds(delta)) {
    std::ostringstream os;
    os << "delta = " << delta << " violates pi (2 log(1/delta) + 8) <= 1/delta (slack "
       << delta_condition_slack(delta) << ")";
    throw PreconditionError(os.str());
  }
  if (!(n > 1.0) || !std::isfinite(n)) {
    std::ostringstream os;
    os << "dilation factor n = " << n << " violates n > 1";
    throw PreconditionError(os.str());
  }
  const double radius = gbsplit::plateau_radius(delta);
  const double constant = gbsplit::cutoff_constant(n);
  const double ramp = kRampCoefficient * radius * std::sqrt(constant);
  if (!(1.0 + ramp <= 3.0 * constant * radius)) {
    std::ostringstream os;
    os << "cutoff ramp end 1 + L = " << 1.0 + ramp << " exceeds 3 C R = " << 3.0 * constant * radius;
    throw PreconditionError(os.str());
  }
  return CutoffSigma(delta, n, radius, constant, ramp);
}

double CutoffSigma::value(double x) const {
  if (!(x >= 0.0)) throw DomainError("cutoff evaluated at negative distance");
  if (x <= 1.0) return plateau_value();
  if (x >= ramp_end()) return 0.0;
  return plateau_value() * (1.0 - smoothstep((x - 1.0) / ramp_));
}

CutoffDerivatives CutoffSigma::derivatives(double x) const {
  if (!(x >= 0.0)) throw DomainError("cutoff evaluated at negative distance");
  if (x <= 1.0 || x >= ramp_end()) return {};
  const double t = (x - 1.0) / ramp_;
  return {-plateau_value() * smoothstep_d1(t) / ramp_, -plateau_value() * smoothstep_d2(t) / (ramp_ * ramp_)};
}

}  // namespace gbsplit
