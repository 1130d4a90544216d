#include "gbsplit/special.hpp"

#include "gbsplit/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>

namespace gbsplit::special {

double normal_upper_tail(double c) { return 0.5 * std::erfc(c / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double chi_square_survival(double dof, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

double chi_square_upper_quantile(double dof, double tail_probability) {
  if (!(tail_probability > 0.0 && tail_probability < 1.0))
    throw DomainError("chi_square_upper_quantile: tail probability must lie in (0,1)");
  return boost::math::quantile(
      boost::math::complement(boost::math::chi_squared_distribution<double>(dof), tail_probability));
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
  return normal_quantile(0.5 * (1.0 + level));
}

}  // namespace gbsplit::special
