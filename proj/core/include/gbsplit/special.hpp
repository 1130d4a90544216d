#pragma once

#include <cstddef>

namespace gbsplit::special {

/// P(Z > c) for Z standard normal, computed as erfc(c / sqrt 2) / 2.
double normal_upper_tail(double c);

/// Inverse of the standard normal CDF.
double normal_quantile(double p);

/// P(X > x) for X ~ chi-square with `dof` degrees of freedom.
double chi_square_survival(double dof, double x);

/// x with P(X > x) = tail_probability, X ~ chi-square(dof).
double chi_square_upper_quantile(double dof, double tail_probability);

/// Two-sided normal critical value for a confidence level in (0,1): z with P(|Z| <= z) = level.
double normal_critical_value(double level);

}  // namespace gbsplit::special
