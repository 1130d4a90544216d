#pragma once

namespace gbsplit {

/// 1/delta - pi (2 log(1/delta) + 8). Non-negative exactly when the smallness
/// condition on delta holds.
double delta_condition_slack(double delta);

bool delta_condition_holds(double delta);

/// Largest admissible delta: root of delta * pi * (2 log(1/delta) + 8) = 1,
/// bisected to an absolute width of 1e-12 (about 0.0201).
double delta_star();

/// R = sqrt(log(1/delta)).
double plateau_radius(double delta);

/// 8 n^2 / (n^2 - 1): the constant governing the cutoff derivative bounds.
double cutoff_constant(double n);

/// 32 n^2 / (n^2 - 1) = 4 * cutoff_constant(n): the support dilation for the good part.
double support_constant(double n);

}  // namespace gbsplit
