#pragma once

#include "gbsplit/cutoff.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace gbsplit::testing {

// Integral of f over [a, b] split at the given interior breakpoints.
template <class F>
double integrate_pieces(F f, double a, double b, std::vector<double> breaks) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(a, breaks[i]);
    const double hi = std::min(b, breaks[i + 1]);
    if (hi > lo) total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
  }
  return total;
}

inline double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Unnormalised one-dimensional nu_bad density exp(-sigma(d(x, [-r, r]))) phi(x).
inline double bad_density_1d(const Cutoff& sigma, double r, double x) {
  const double d = std::max(std::abs(x) - r, 0.0);
  return std::exp(-sigma.value(d)) * std_normal_pdf(x);
}

inline std::vector<double> bad_breaks_1d(const Cutoff& sigma, double r) {
  const double e = sigma.support_end();
  return {-r - e, -r - 1.0, -r, r, r + 1.0, r + e};
}

}  // namespace gbsplit::testing
