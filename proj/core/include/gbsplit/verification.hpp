#pragma once

#include "gbsplit/convex_body.hpp"
#include "gbsplit/cutoff.hpp"
#include "gbsplit/decomposition.hpp"
#include "gbsplit/rng.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gbsplit {

enum class CheckStatus { Pass, Fail, Inconclusive };

std::string_view to_string(CheckStatus status) noexcept;

/// Outcome of one certified inequality. `worst_margin` is the smallest slack
/// seen (non-negative when the criterion holds, up to `tolerance`).
struct CheckRecord {
  std::string check_id;
  CheckStatus status = CheckStatus::Pass;
  double worst_margin = 0.0;
  std::size_t samples_used = 0;
  double tolerance = 0.0;
  std::string notes;
  /// Offending point for failures.
  std::optional<std::vector<double>> witness;
  /// Additional named quantities, in insertion order.
  std::vector<std::pair<std::string, double>> metrics;

  bool passed() const noexcept { return status == CheckStatus::Pass; }
  std::optional<double> metric(std::string_view name) const;
};

struct VerificationReport {
  std::vector<CheckRecord> records;
  /// Wall-clock milliseconds per record, parallel to `records`.
  std::vector<double> wall_clock_ms;

  const CheckRecord* find(std::string_view check_id) const;
  /// Fail if any record failed, else Inconclusive if any was, else Pass.
  CheckStatus overall() const;
};

// --- proof objects ---------------------------------------------------------

/// Segments [x, z] with interior weights p; the evaluated point is y = p x + (1 - p) z.
struct SegmentBatch {
  enum class Stratum { InsideBody, Ramp, Straddling, FarField };

  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> z;
  std::vector<double> p;
  std::vector<Stratum> stratum;

  std::size_t size() const noexcept { return p.size(); }
  Eigen::VectorXd interpolate(std::size_t i) const { return p[i] * x[i] + (1.0 - p[i]) * z[i]; }
};

/// Stratified segments: a quarter each fully inside K, with both endpoints in
/// the ramp annulus, straddling the boundary, and in the far field.
/// `weights_per_segment` interior weights are drawn per endpoint pair.
SegmentBatch make_segments(const GoodBadSplit& split, std::size_t segment_count, RngStream& rng,
                           std::size_t weights_per_segment = 3);

/// Line-coordinate reduction of a segment relative to the projection P(y):
/// o is the foot of P(y) on the line through x and z, a = |o - P(y)|, and
/// w_x, w_z, w_y are signed positions of x, z, y along the direction z - x.
struct OneDReduction {
  Eigen::VectorXd o;
  double p_prime = 0.0;
  double a = 0.0;
  double w_x = 0.0;
  double w_z = 0.0;
  double w_y = 0.0;

  static OneDReduction from_segment(const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& z, double p,
                                    const Eigen::Ref<const Eigen::VectorXd>& projected_y);
};

/// f(w) = sigma(sqrt(a^2 + w^2)).
double reduced_profile(const Cutoff& sigma, double a, double w);

/// p f(w_x) + (1 - p) f(w_z) - f(p w_x + (1 - p) w_z).
double reduced_convexity_gap(const Cutoff& sigma, double a, double w_x, double w_z, double p);

/// Uniform direction on the unit sphere.
Eigen::VectorXd random_direction(std::size_t dim, RngStream& rng);

/// Point t u (t >= 0, |u| = 1) with d(t u, K) = target, found by bisection;
/// target == 0 returns the boundary point along u.
Eigen::VectorXd point_at_distance(const ConvexBody& body, const Eigen::Ref<const Eigen::VectorXd>& direction,
                                  double target);

// --- checks ----------------------------------------------------------------

struct DeltaCondition {
  bool holds = false;
  double slack = 0.0;
};

DeltaCondition check_delta_condition(double delta);
CheckRecord delta_condition_record(double delta);

/// Standard normal mass outside K is at most delta: by the body's analytic
/// bound when it suffices, else by Monte Carlo.
CheckRecord check_mass_condition(const ConvexBody& body, double delta, std::size_t sample_count, double confidence,
                                 const RngStream& rng);

/// B(R) inside K, decided by the exact inradius.
CheckRecord check_ball_containment(const ConvexBody& body, double radius);

/// (1/2) erfc(c / sqrt 2) > (1/sqrt pi) exp(-c^2/2) / (sqrt(c^2/2) + sqrt(c^2/2 + 2)) on the grid.
CheckRecord check_erfc_bound(std::span<const double> c_grid);
std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

/// The chain from the erfc lower bound to mu(K^c) > delta at c = sqrt(log(1/delta)).
CheckRecord check_erfc_chain(double delta);

/// Monte Carlo mu(K^c) against the half-space tail (1/2) erfc(c / sqrt 2).
CheckRecord check_half_space_bound(const ConvexBody& body, double c, std::size_t sample_count, double confidence,
                                   const RngStream& rng);

/// The five defining properties of the cutoff on a uniform grid over
/// [0, 1.05 * 3 C R], with finite-difference cross-checks and knot smoothness.
CheckRecord check_sigma_properties(const CutoffSigma& sigma, std::size_t grid_size);

/// delta' <= 2 delta via the upper confidence bound, plus the intermediate
/// bound delta' <= exp(-sigma(0)) + mu(K^c).
CheckRecord check_r1(const GoodBadSplit& split, std::size_t sample_count, double confidence, const RngStream& rng);

/// supp(nu_good) inside C K: sampled containment, exact zero weight outside
/// (3 C_int + 1) K, and the ray inequality d(x) >= (c - 1) inradius outside c K.
CheckRecord check_r2(const GoodBadSplit& split, std::size_t sample_count, std::size_t outside_points,
                     const RngStream& rng);

/// weight_good is symmetric and quasi-concave along stratified segments.
CheckRecord check_r3(const GoodBadSplit& split, std::size_t segment_count, const RngStream& rng);

/// g(x) = sigma(d(x)) + ((n^2 - 1)/(2 n^2)) |x|^2 is convex along stratified
/// segments; also audits the one-dimensional reduction used to prove it.
CheckRecord check_r4(const GoodBadSplit& split, std::size_t segment_count, const RngStream& rng);

/// sup |f''| <= 2 / C for f(w) = sigma(sqrt(a^2 + w^2)) by Richardson-refined
/// finite differences, and each chain-rule term <= 1 / C.
CheckRecord check_f_bound(const CutoffSigma& sigma, std::span<const double> a_grid, std::span<const double> w_grid);

/// Default grids: `count` points of a in (0, 3 C R] and w in [0, 1.1 * 3 C R].
CheckRecord check_f_bound(const CutoffSigma& sigma, std::size_t count);

/// The reduced convexity gap against -2 p (1 - p) (w_x - w_z)^2 (2 / C).
CheckRecord check_midpoint_taylor(const CutoffSigma& sigma, double a, double w_x, double w_z, double p);
CheckRecord check_midpoint_taylor(const CutoffSigma& sigma, std::size_t tuple_count, const RngStream& rng);

/// E_good[f] <= E_mu[f] for f = min(|x|_2, cap) and min(|x|_inf, cap).
CheckRecord gci_spot_check(const GoodBadSplit& split, std::size_t sample_count, double confidence,
                           const RngStream& rng, double cap = 10.0);

/// dilation_log_ratio differences against explicit mu and mu^{x n} densities.
CheckRecord check_dilation_ratio(std::size_t dim, double n, std::size_t pair_count, const RngStream& rng);

// --- suite -----------------------------------------------------------------

inline constexpr std::array<std::string_view, 15> kCheckIds = {
    "delta_condition", "mass_condition", "ball_containment", "erfc_bound",      "erfc_chain",
    "half_space_bound", "sigma_properties", "r1",            "r2",              "r3",
    "r4",               "f_bound",          "midpoint_taylor", "gci",           "dilation_ratio"};

struct CheckBudgets {
  std::size_t mass = 1000000;
  std::size_t half_space = 1000000;
  std::size_t r1 = 1000000;
  std::size_t r2_samples = 100000;
  std::size_t r2_outside = 10000;
  std::size_t r3_segments = 10000;
  std::size_t r4_segments = 10000;
  std::size_t gci = 1000000;
  std::size_t dilation_pairs = 10000;
  std::size_t sigma_grid = 10000;
  std::size_t erfc_grid = 1000;
  std::size_t f_grid = 200;
  std::size_t taylor_tuples = 10000;

  /// Every budget times `factor`, clamped below by the per-check minimums.
  CheckBudgets scaled(double factor) const;

  bool operator==(const CheckBudgets&) const = default;
};

struct VerificationOptions {
  CheckBudgets budgets;
  double confidence = 0.99;
  /// Empty means every check in kCheckIds.
  std::set<std::string> enabled;
  double gci_cap = 10.0;
};

/// Runs the enabled checks in kCheckIds order; each draws from its own substream of `rng`.
VerificationReport run_verification(const GoodBadSplit& split, const VerificationOptions& options,
                                    const RngStream& rng);

/// Stable substream id for a check.
std::uint64_t check_stream_id(std::string_view check_id) noexcept;

}  // namespace gbsplit
