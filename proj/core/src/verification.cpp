#include "gbsplit/verification.hpp"

#include "gbsplit/error.hpp"
#include "gbsplit/gaussian.hpp"
#include "gbsplit/hypothesis.hpp"
#include "gbsplit/parallel.hpp"
#include "gbsplit/special.hpp"
#include "gbsplit/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace gbsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> to_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> concat(std::initializer_list<Eigen::VectorXd> parts, std::initializer_list<double> tail = {}) {
  std::vector<double> out;
  for (const auto& part : parts) out.insert(out.end(), part.data(), part.data() + part.size());
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

Eigen::VectorXd normal_vector(std::size_t dim, RngStream& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

// Classification of a one-sided Monte Carlo claim "estimate <= bound".
CheckStatus classify_upper(double low, double high, double bound) {
  if (high <= bound) return CheckStatus::Pass;
  if (low > bound) return CheckStatus::Fail;
  return CheckStatus::Inconclusive;
}

CheckStatus worse(CheckStatus a, CheckStatus b) {
  if (a == CheckStatus::Fail || b == CheckStatus::Fail) return CheckStatus::Fail;
  if (a == CheckStatus::Inconclusive || b == CheckStatus::Inconclusive) return CheckStatus::Inconclusive;
  return CheckStatus::Pass;
}

// Monte Carlo mean of fn(x) over x ~ N(0, I_d).
template <class Fn>
RunningMoments gaussian_mean(std::size_t dim, std::size_t count, const RngStream& rng, Fn&& fn) {
  auto parts = map_batches(batch_count(count), [&](std::size_t b) {
    RngStream stream = rng.substream(b);
    RunningMoments moments;
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0, m = batch_length(count, b); j < m; ++j) {
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = stream.normal();
      moments.push(fn(x));
    }
    return moments;
  });
  RunningMoments total;
  for (const auto& part : parts) total.merge(part);
  return total;
}

}  // namespace

std::string_view to_string(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::optional<double> CheckRecord::metric(std::string_view name) const {
  for (const auto& [key, value] : metrics)
    if (key == name) return value;
  return std::nullopt;
}

const CheckRecord* VerificationReport::find(std::string_view check_id) const {
  for (const auto& record : records)
    if (record.check_id == check_id) return &record;
  return nullptr;
}

CheckStatus VerificationReport::overall() const {
  CheckStatus status = CheckStatus::Pass;
  for (const auto& record : records) status = worse(status, record.status);
  return status;
}

// --- proof objects ---------------------------------------------------------

Eigen::VectorXd random_direction(std::size_t dim, RngStream& rng) {
  for (;;) {
    Eigen::VectorXd v = normal_vector(dim, rng);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

Eigen::VectorXd point_at_distance(const ConvexBody& body, const Eigen::Ref<const Eigen::VectorXd>& direction,
                                  double target) {
  const Eigen::VectorXd u = direction.normalized();
  const double boundary = 1.0 / body.gauge(u);
  if (!(target > 0.0)) return boundary * u;
  // d(t u, K) is convex in t, zero up to the boundary and 1-Lipschitz, so it
  // reaches `target` no earlier than boundary + target.
  double lo = boundary;
  double hi = boundary + target;
  while (body.distance(hi * u) < target) hi = boundary + 2.0 * (hi - boundary);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (body.distance(mid * u) < target) lo = mid; else hi = mid;
  }
  return (0.5 * (lo + hi)) * u;
}

SegmentBatch make_segments(const GoodBadSplit& split, std::size_t segment_count, RngStream& rng,
                           std::size_t weights_per_segment) {
  const ConvexBody& body = split.body();
  const std::size_t dim = split.dim();
  const double ramp_start = 1.0;
  const double ramp_end = std::max(split.cutoff().support_end(), ramp_start + 1.0);
  const double far_span = std::max(ramp_end, 3.0 * split.cutoff_constant() * plateau_radius(split.delta()));

  auto inside = [&]() -> Eigen::VectorXd {
    const Eigen::VectorXd u = random_direction(dim, rng);
    return (rng.uniform() / body.gauge(u)) * u;
  };
  auto at_distance = [&](double lo, double hi) -> Eigen::VectorXd {
    const Eigen::VectorXd u = random_direction(dim, rng);
    return point_at_distance(body, u, lo + (hi - lo) * rng.uniform());
  };

  SegmentBatch batch;
  const std::size_t quarter = segment_count / 4;
  for (std::size_t s = 0; s < segment_count; ++s) {
    const auto stratum = static_cast<SegmentBatch::Stratum>(std::min<std::size_t>(s / std::max<std::size_t>(quarter, 1), 3));
    Eigen::VectorXd x;
    Eigen::VectorXd z;
    switch (stratum) {
      case SegmentBatch::Stratum::InsideBody:
        x = inside();
        z = inside();
        break;
      case SegmentBatch::Stratum::Ramp:
        x = at_distance(ramp_start, ramp_end);
        z = at_distance(ramp_start, ramp_end);
        break;
      case SegmentBatch::Stratum::Straddling:
        x = inside();
        z = at_distance(0.0, 1.25 * ramp_end);
        break;
      case SegmentBatch::Stratum::FarField:
        x = at_distance(ramp_end, ramp_end + far_span);
        z = at_distance(ramp_end, ramp_end + far_span);
        break;
    }
    for (std::size_t k = 0; k < weights_per_segment; ++k) {
      batch.x.push_back(x);
      batch.z.push_back(z);
      batch.p.push_back(rng.uniform());
      batch.stratum.push_back(stratum);
    }
  }
  return batch;
}

OneDReduction OneDReduction::from_segment(const Eigen::Ref<const Eigen::VectorXd>& x,
                                          const Eigen::Ref<const Eigen::VectorXd>& z, double p,
                                          const Eigen::Ref<const Eigen::VectorXd>& projected_y) {
  OneDReduction r;
  const Eigen::VectorXd span = z - x;
  const double length = span.norm();
  const Eigen::VectorXd y = p * x + (1.0 - p) * z;
  if (length == 0.0) {
    r.o = x;
    r.p_prime = p;
  } else {
    // o = p' x + (1 - p') z is the foot of P(y) on the line.
    const double along = (projected_y - x).dot(span) / (length * length);
    r.p_prime = 1.0 - along;
    r.o = x + along * span;
  }
  r.a = (r.o - projected_y).norm();
  const Eigen::VectorXd e = length > 0.0 ? Eigen::VectorXd(span / length) : Eigen::VectorXd::Zero(x.size());
  r.w_x = (x - r.o).dot(e);
  r.w_z = (z - r.o).dot(e);
  r.w_y = (y - r.o).norm();
  return r;
}

double reduced_profile(const Cutoff& sigma, double a, double w) { return sigma.value(std::hypot(a, w)); }

double reduced_convexity_gap(const Cutoff& sigma, double a, double w_x, double w_z, double p) {
  return p * reduced_profile(sigma, a, w_x) + (1.0 - p) * reduced_profile(sigma, a, w_z) -
         reduced_profile(sigma, a, p * w_x + (1.0 - p) * w_z);
}

// --- hypothesis checks -----------------------------------------------------

DeltaCondition check_delta_condition(double delta) {
  const double slack = delta_condition_slack(delta);
  return {slack >= 0.0, slack};
}

CheckRecord delta_condition_record(double delta) {
  CheckRecord record;
  record.check_id = "delta_condition";
  const DeltaCondition condition = check_delta_condition(delta);
  const double star = delta_star();
  record.status = condition.holds && delta < 0.5 ? CheckStatus::Pass : CheckStatus::Fail;
  record.worst_margin = condition.slack;
  record.tolerance = 0.0;
  record.metrics = {{"delta", delta}, {"slack", condition.slack}, {"delta_star", star}};
  record.notes = "pi (2 log(1/delta) + 8) <= 1/delta; delta_star bisected to 1e-12";
  return record;
}

CheckRecord check_mass_condition(const ConvexBody& body, double delta, std::size_t sample_count, double confidence,
                                 const RngStream& rng) {
  CheckRecord record;
  record.check_id = "mass_condition";
  record.tolerance = 1e-12 * delta;
  const MassBound bound = body.gaussian_mass_outside();
  record.metrics = {{"delta", delta}, {"analytic_bound", bound.value}, {"analytic_exact", bound.exact ? 1.0 : 0.0}};
  if (bound.value <= delta + record.tolerance) {
    record.status = CheckStatus::Pass;
    record.worst_margin = delta - bound.value;
    record.notes = bound.exact ? "exact mass outside K" : "analytic upper bound on the mass outside K";
    return record;
  }
  const double z = special::normal_critical_value(confidence);
  const RunningMoments outside =
      gaussian_mean(body.dim(), sample_count, rng, [&](const Eigen::VectorXd& x) { return body.contains(x) ? 0.0 : 1.0; });
  const double low = outside.mean() - z * outside.standard_error();
  const double high = outside.mean() + z * outside.standard_error();
  record.status = classify_upper(low, high, delta);
  record.worst_margin = delta - high;
  record.samples_used = outside.count();
  record.metrics.emplace_back("mc_estimate", outside.mean());
  record.metrics.emplace_back("mc_ci_high", high);
  record.notes = "analytic bound too loose; Monte Carlo estimate of the mass outside K";
  return record;
}

CheckRecord check_ball_containment(const ConvexBody& body, double radius) {
  CheckRecord record;
  record.check_id = "ball_containment";
  const double inradius = body.inradius();
  record.worst_margin = inradius - radius;
  record.status = record.worst_margin >= 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
  record.metrics = {{"inradius", inradius}, {"radius", radius}};
  record.notes = record.passed() ? "B(sqrt(log(1/delta))) inside K by exact inradius"
                                 : "hypothesis violation: K misses part of B(sqrt(log(1/delta))), so mu(K^c) > delta";
  return record;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return grid;
}

CheckRecord check_erfc_bound(std::span<const double> c_grid) {
  CheckRecord record;
  record.check_id = "erfc_bound";
  record.samples_used = c_grid.size();
  double min_ratio = kInf;
  double min_gap = kInf;
  double previous_ratio = kInf;
  bool monotone = true;
  double previous_c = -kInf;
  for (const double c : c_grid) {
    const double lhs = special::normal_upper_tail(c);
    const double half = 0.5 * c * c;
    const double rhs = std::exp(-half) / (std::sqrt(std::numbers::pi) * (std::sqrt(half) + std::sqrt(half + 2.0)));
    const double ratio = lhs / rhs;
    if (c > previous_c && ratio > previous_ratio * (1.0 + 1e-12)) monotone = false;
    previous_c = c;
    previous_ratio = ratio;
    if (ratio < min_ratio) min_ratio = ratio;
    if (!(lhs > rhs) && record.status == CheckStatus::Pass) {
      record.status = CheckStatus::Fail;
      record.witness = std::vector<double>{c, lhs, rhs};
    }
    min_gap = std::min(min_gap, lhs - rhs);
  }
  record.worst_margin = min_ratio - 1.0;
  record.metrics = {{"min_ratio", min_ratio}, {"min_gap", min_gap}, {"ratio_monotone", monotone ? 1.0 : 0.0}};
  record.notes = "strict inequality required at every grid point; margin is min(LHS/RHS) - 1";
  return record;
}

CheckRecord check_erfc_chain(double delta) {
  CheckRecord record;
  record.check_id = "erfc_chain";
  const double c = plateau_radius(delta);
  const double log_inv = std::log(1.0 / delta);
  const double tail = special::normal_upper_tail(c);
  const double first = std::exp(-0.5 * log_inv) /
                       (std::sqrt(std::numbers::pi) * (std::sqrt(0.5 * log_inv) + std::sqrt(0.5 * log_inv + 2.0)));
  const double star = std::sqrt(delta) / (std::sqrt(std::numbers::pi) * 2.0 * std::sqrt(0.5 * log_inv + 2.0));
  const double root_condition = std::pow(delta, -0.5) - std::sqrt(std::numbers::pi * (2.0 * log_inv + 8.0));

  const double margins[] = {tail - first, first - star, star - delta, root_condition};
  record.worst_margin = *std::min_element(std::begin(margins), std::end(margins));
  const bool ok = tail > first && first >= star && star >= delta && root_condition >= 0.0;
  record.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  record.metrics = {{"c", c},          {"half_space_tail", tail}, {"erfc_lower_bound", first},
                    {"star", star},    {"delta", delta},          {"sqrt_condition_slack", root_condition}};
  record.notes = "tail(c) > erfc lower bound >= (*) >= delta at c = sqrt(log(1/delta))";
  return record;
}

CheckRecord check_half_space_bound(const ConvexBody& body, double c, std::size_t sample_count, double confidence,
                                   const RngStream& rng) {
  CheckRecord record;
  record.check_id = "half_space_bound";
  const double bound = special::normal_upper_tail(c);
  const double z = special::normal_critical_value(confidence);
  const RunningMoments outside =
      gaussian_mean(body.dim(), sample_count, rng, [&](const Eigen::VectorXd& x) { return body.contains(x) ? 0.0 : 1.0; });
  const double se = outside.standard_error();
  const double estimate = outside.mean();
  record.samples_used = outside.count();
  record.tolerance = 3.0 * se;
  record.worst_margin = estimate - bound;
  if (estimate - z * se >= bound) {
    record.status = CheckStatus::Pass;
  } else if (estimate + 3.0 * se >= bound) {
    record.status = CheckStatus::Inconclusive;
  } else {
    record.status = CheckStatus::Fail;
  }
  record.metrics = {{"c", c}, {"half_space_tail", bound}, {"mc_estimate", estimate}, {"standard_error", se},
                    {"ci_width", 2.0 * z * se}};
  record.notes = "mu(K^c) >= (1/2) erfc(c / sqrt 2) with c the inradius";
  return record;
}

// --- cutoff ----------------------------------------------------------------

CheckRecord check_sigma_properties(const CutoffSigma& sigma, std::size_t grid_size) {
  CheckRecord record;
  record.check_id = "sigma_properties";
  constexpr double kValueTol = 1e-12;
  constexpr double kFdTol = 1e-6;
  constexpr double kStep1 = 1e-5;
  constexpr double kStep2 = 1e-3;
  record.tolerance = kFdTol;

  const double top = sigma.plateau_value();
  const double c = sigma.cutoff_constant();
  const double vanish = sigma.vanishing_bound();
  std::vector<double> grid = uniform_grid(0.0, 1.05 * vanish, std::max<std::size_t>(grid_size, 2));
  for (const double knot : {1.0, sigma.ramp_end(), vanish}) grid.push_back(knot);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  record.samples_used = grid.size();

  double monotone = kInf, plateau = kInf, tail = kInf, slope = kInf, curvature = kInf, range = kInf;
  double fd1 = 0.0, fd2 = 0.0;
  double previous = kInf;
  auto fail_at = [&](double x) {
    if (record.status == CheckStatus::Pass) {
      record.status = CheckStatus::Fail;
      record.witness = std::vector<double>{x};
    }
  };
  for (const double x : grid) {
    const double value = sigma.value(x);
    const CutoffDerivatives d = sigma.derivatives(x);

    const double increase_margin = std::isfinite(previous) ? previous - value : kInf;
    monotone = std::min({monotone, increase_margin, -d.first});
    if (increase_margin < -kValueTol || d.first > 0.0) fail_at(x);
    previous = value;

    range = std::min({range, value, top - value});
    if (value < 0.0 || value > top) fail_at(x);
    if (x <= 1.0) {
      plateau = std::min(plateau, -std::abs(value - top));
      if (value != top) fail_at(x);
    }
    if (x >= vanish) {
      tail = std::min(tail, -std::abs(value));
      if (value != 0.0) fail_at(x);
    }
    if (x >= 1.0) {
      const double m = (x - 1.0) / c - std::abs(d.first);
      slope = std::min(slope, m);
      if (m < -kValueTol) fail_at(x);
    }
    const double m5 = 1.0 / c - std::abs(d.second);
    curvature = std::min(curvature, m5);
    if (m5 < -kValueTol) fail_at(x);

    if (x >= kStep1) {
      const double numeric = (sigma.value(x + kStep1) - sigma.value(x - kStep1)) / (2.0 * kStep1);
      fd1 = std::max(fd1, std::abs(numeric - d.first));
    }
    if (x >= 2.0 * kStep2) {
      // sigma''' jumps at the knots, so central stencils straddling one are
      // replaced by one-sided stencils on the near side.
      const double knots[] = {1.0, sigma.ramp_end()};
      double side = 0.0;
      for (const double knot : knots)
        if (std::abs(x - knot) < 4.0 * kStep2) side = x >= knot ? 1.0 : -1.0;
      double numeric = 0.0;
      if (side == 0.0) {
        auto second = [&](double h) { return (sigma.value(x + h) - 2.0 * value + sigma.value(x - h)) / (h * h); };
        numeric = (4.0 * second(kStep2) - second(2.0 * kStep2)) / 3.0;
      } else {
        auto second = [&](double h) {
          return (value - 2.0 * sigma.value(x + side * h) + sigma.value(x + 2.0 * side * h)) / (h * h);
        };
        numeric = 2.0 * second(kStep2) - second(2.0 * kStep2);
      }
      fd2 = std::max(fd2, std::abs(numeric - d.second));
    }
  }
  if (fd1 > kFdTol || fd2 > kFdTol) fail_at(-1.0);

  // One-sided differences of sigma and sigma' must agree across the knots.
  double knot_jump = 0.0;
  for (const double knot : {1.0, sigma.ramp_end()}) {
    const double h = kStep1;
    const double left1 = (sigma.value(knot) - sigma.value(knot - h)) / h;
    const double right1 = (sigma.value(knot + h) - sigma.value(knot)) / h;
    const double left2 = (sigma.derivatives(knot).first - sigma.derivatives(knot - h).first) / h;
    const double right2 = (sigma.derivatives(knot + h).first - sigma.derivatives(knot).first) / h;
    knot_jump = std::max({knot_jump, std::abs(left1 - right1), std::abs(left2 - right2)});
  }
  if (knot_jump > kFdTol) fail_at(-2.0);

  record.worst_margin = std::min({monotone, plateau, tail, slope, curvature, kFdTol - fd1, kFdTol - fd2,
                                  kFdTol - knot_jump});
  record.metrics = {{"R", sigma.plateau_radius()},
                    {"C_int", c},
                    {"ramp_length", sigma.ramp_length()},
                    {"vanishing_bound", vanish},
                    {"monotone_margin", monotone},
                    {"plateau_margin", plateau},
                    {"tail_margin", tail},
                    {"first_derivative_margin", slope},
                    {"second_derivative_margin", curvature},
                    {"range_margin", range},
                    {"fd_first_max_error", fd1},
                    {"fd_second_max_error", fd2},
                    {"knot_jump", knot_jump}};
  record.notes = "properties 1-5 on a uniform grid over [0, 1.05 * 3 C R]; FD steps 1e-5 (first), 1e-3 with Richardson (second), one-sided beside the knots";
  return record;
}

// --- requirements ------------------------------------------------------------

CheckRecord check_r1(const GoodBadSplit& split, std::size_t sample_count, double confidence, const RngStream& rng) {
  CheckRecord record;
  record.check_id = "r1";
  const DeltaPrimeEstimate estimate = estimate_delta_prime(split, sample_count, confidence, rng);
  const double target = 2.0 * split.delta();
  const MassBound outer = split.body().gaussian_mass_outside();
  const double floor_weight = std::exp(-split.cutoff().value(0.0));
  const double half_width = estimate.ci_high - estimate.point_estimate;
  const double intermediate = floor_weight + outer.value;

  record.samples_used = estimate.sample_count;
  record.tolerance = half_width;
  record.status = classify_upper(estimate.ci_low, estimate.ci_high, target);
  const double intermediate_margin = intermediate + half_width - estimate.point_estimate;
  if (intermediate_margin < 0.0) record.status = CheckStatus::Fail;
  record.worst_margin = target - estimate.ci_high;
  record.metrics = {{"delta_prime", estimate.point_estimate},
                    {"ci_low", estimate.ci_low},
                    {"ci_high", estimate.ci_high},
                    {"standard_error", estimate.standard_error},
                    {"two_delta", target},
                    {"exp_minus_sigma0", floor_weight},
                    {"outer_mass", outer.value},
                    {"outer_mass_exact", outer.exact ? 1.0 : 0.0},
                    {"intermediate_margin", intermediate_margin},
                    {"weight_floor_ratio", estimate.point_estimate / (floor_weight * (1.0 - outer.value))}};
  record.notes = "upper CI bound of delta' against 2 delta; delta' <= exp(-sigma(0)) + mu(K^c) + CI half-width";
  if (record.status == CheckStatus::Inconclusive) record.notes += "; CI straddles 2 delta, increase the sample budget";
  return record;
}

CheckRecord check_r2(const GoodBadSplit& split, std::size_t sample_count, std::size_t outside_points,
                     const RngStream& rng) {
  CheckRecord record;
  record.check_id = "r2";
  const ConvexBody& body = split.body();
  const double c_thm = split.support_constant();
  const double c_int = split.cutoff_constant();
  const double radius = plateau_radius(split.delta());
  const double inradius = body.inradius();
  record.tolerance = 1e-9;

  // (i) sampled containment in C_thm K.
  const RejectionSample good = sample_good(split, sample_count, rng.substream(1));
  double containment = kInf;
  std::size_t escaped = 0;
  for (Eigen::Index j = 0; j < good.points.cols(); ++j) {
    const Eigen::VectorXd x = good.points.col(j);
    const double margin = c_thm - body.gauge(x);
    containment = std::min(containment, margin);
    if (!body.contains(x / c_thm)) {
      if (escaped++ == 0) record.witness = to_vector(x);
    }
  }

  // (ii) weight_good vanishes exactly outside (3 C_int + 1) K.
  const double dilation = 3.0 * c_int + 1.0;
  const BodyPtr outer = scale(split.body_ptr(), dilation);
  RngStream stream = rng.substream(2);
  double max_weight = 0.0;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < outside_points; ++i) {
    const Eigen::VectorXd u = random_direction(split.dim(), stream);
    const Eigen::VectorXd x = (dilation * (1.0 + 1e-6 + 2.0 * stream.uniform()) / body.gauge(u)) * u;
    if (outer->contains(x)) continue;
    const double w = split.weight_good(x);
    max_weight = std::max(max_weight, w);
    if (w != 0.0 && nonzero++ == 0 && !record.witness) record.witness = to_vector(x);
  }

  // (iii) d(x) >= (c - 1) inradius for x outside c K.
  double ray = kInf;
  for (std::size_t i = 0; i < outside_points; ++i) {
    const Eigen::VectorXd u = random_direction(split.dim(), stream);
    const double factor = 1.0 + 1.5 * c_thm * stream.uniform() + 1e-3;
    const Eigen::VectorXd x = (factor * (1.0 + 1e-9) / body.gauge(u)) * u;
    const double margin = body.distance(x) - (factor - 1.0) * inradius;
    ray = std::min(ray, margin);
    if (margin < -record.tolerance && !record.witness) record.witness = to_vector(x);
  }

  const bool ok = escaped == 0 && nonzero == 0 && ray >= -record.tolerance;
  record.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  record.samples_used = sample_count + 2 * outside_points;
  record.worst_margin = std::min({containment, -max_weight, ray});
  record.metrics = {{"C_thm", c_thm},
                    {"containment_margin", containment},
                    {"escaped_samples", static_cast<double>(escaped)},
                    {"max_weight_good_outside", max_weight},
                    {"nonzero_outside", static_cast<double>(nonzero)},
                    {"ray_margin", ray},
                    {"support_radius_margin", (c_thm - 1.0) * inradius - 3.0 * c_int * radius},
                    {"acceptance_rate", static_cast<double>(sample_count) / static_cast<double>(good.proposals)}};
  record.notes = "nu_good samples inside C K; weight_good == 0 outside (3 C_int + 1) K; ray distance bound";
  return record;
}

CheckRecord check_r3(const GoodBadSplit& split, std::size_t segment_count, const RngStream& rng) {
  CheckRecord record;
  record.check_id = "r3";
  constexpr double kQuasiTol = 1e-9;
  constexpr double kSymmetryTol = 1e-10;
  record.tolerance = kQuasiTol;
  RngStream stream = rng.substream(0);
  const SegmentBatch segments = make_segments(split, segment_count, stream);

  double worst = kInf;
  double symmetry = 0.0;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Eigen::VectorXd& x = segments.x[i];
    const Eigen::VectorXd& z = segments.z[i];
    const double hx = split.weight_good(x);
    const double hz = split.weight_good(z);
    const double hy = split.weight_good(segments.interpolate(i));
    const double margin = hy - std::min(hx, hz);
    worst = std::min(worst, margin);
    if (margin < -kQuasiTol && violations++ == 0) record.witness = concat({x, z}, {segments.p[i]});
    if (i % 3 == 0) {
      symmetry = std::max({symmetry, std::abs(hx - split.weight_good(-x)), std::abs(hz - split.weight_good(-z))});
    }
  }
  const bool ok = violations == 0 && symmetry <= kSymmetryTol;
  record.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  record.worst_margin = worst;
  record.samples_used = segments.size();
  record.metrics = {{"segments", static_cast<double>(segment_count)},
                    {"violations", static_cast<double>(violations)},
                    {"max_symmetry_error", symmetry},
                    {"symmetry_tolerance", kSymmetryTol}};
  record.notes = "h(p x + (1 - p) z) >= min(h(x), h(z)) - 1e-9 for h = weight_good; |h(x) - h(-x)| <= 1e-10";
  return record;
}

CheckRecord check_r4(const GoodBadSplit& split, std::size_t segment_count, const RngStream& rng) {
  CheckRecord record;
  record.check_id = "r4";
  constexpr double kRelTol = 1e-9;
  record.tolerance = kRelTol;
  const Cutoff& sigma = split.cutoff();
  const double curvature = dilation_curvature(split.n());
  const double c_int = split.cutoff_constant();
  const ConvexBody& body = split.body();
  auto g = [&](const Eigen::VectorXd& v) { return sigma.value(body.distance(v)) + curvature * v.squaredNorm(); };

  RngStream stream = rng.substream(0);
  const SegmentBatch segments = make_segments(split, segment_count, stream);

  double worst = kInf;
  std::size_t violations = 0;
  double identity_error = 0.0;
  double worst_projection_step = kInf;
  double worst_objective = kInf;
  double rewrite_error = 0.0;
  double worst_taylor = kInf;
  std::size_t reduction_failures = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Eigen::VectorXd& x = segments.x[i];
    const Eigen::VectorXd& z = segments.z[i];
    const double p = segments.p[i];
    const Eigen::VectorXd y = segments.interpolate(i);
    const double gx = g(x);
    const double gz = g(z);
    const double gy = g(y);
    const double scale = 1.0 + std::max({std::abs(gx), std::abs(gz), std::abs(gy)});
    const double margin = (p * gx + (1.0 - p) * gz - gy) / scale;
    worst = std::min(worst, margin);
    if (margin < -kRelTol && violations++ == 0) record.witness = concat({x, z}, {p});

    // Audit of the proof's reduction to one dimension.
    const Eigen::VectorXd py = body.project(y);
    const OneDReduction red = OneDReduction::from_segment(x, z, p, py);
    const double length = (x - z).norm();
    const double geometry_scale = 1.0 + x.squaredNorm() + z.squaredNorm();
    const double errors[] = {
        std::abs((red.w_z - red.w_x) - length),
        std::abs(p * red.w_x + (1.0 - p) * red.w_z - (red.p_prime - p) * length),
        std::abs(red.w_y * red.w_y - std::pow(p * red.w_x + (1.0 - p) * red.w_z, 2)),
        std::abs((x - py).squaredNorm() - (red.a * red.a + red.w_x * red.w_x)),
        std::abs((z - py).squaredNorm() - (red.a * red.a + red.w_z * red.w_z)),
        std::abs((y - py).squaredNorm() - (red.a * red.a + red.w_y * red.w_y))};
    const double err = *std::max_element(std::begin(errors), std::end(errors)) / geometry_scale;
    identity_error = std::max(identity_error, err);

    const double sx = sigma.value((x - py).norm());
    const double sz = sigma.value((z - py).norm());
    const double step = std::min(sigma.value(body.distance(x)) - sx, sigma.value(body.distance(z)) - sz);
    worst_projection_step = std::min(worst_projection_step, step);

    const double objective = p * sx + (1.0 - p) * sz - sigma.value(body.distance(y));
    const double objective_bound = -p * (1.0 - p) * length * length * curvature;
    const double objective_margin = (objective - objective_bound) / scale;
    worst_objective = std::min(worst_objective, objective_margin);

    const double gap = reduced_convexity_gap(sigma, red.a, red.w_x, red.w_z, p);
    rewrite_error = std::max(rewrite_error, std::abs(gap - objective) / scale);
    const double taylor = gap + 2.0 * p * (1.0 - p) * std::pow(red.w_x - red.w_z, 2) * (2.0 / c_int);
    worst_taylor = std::min(worst_taylor, taylor);

    if (err > 1e-9 || step < -1e-12 * scale || objective_margin < -kRelTol || taylor < -1e-9) {
      if (reduction_failures++ == 0 && !record.witness) record.witness = concat({x, z}, {p});
    }
  }
  const bool ok = violations == 0 && reduction_failures == 0 && rewrite_error <= 1e-9;
  record.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  record.worst_margin = worst;
  record.samples_used = segments.size();
  record.metrics = {{"segments", static_cast<double>(segment_count)},
                    {"violations", static_cast<double>(violations)},
                    {"reduction_failures", static_cast<double>(reduction_failures)},
                    {"max_identity_error", identity_error},
                    {"projection_step_margin", worst_projection_step},
                    {"objective_margin", worst_objective},
                    {"rewrite_error", rewrite_error},
                    {"taylor_margin", worst_taylor}};
  record.notes =
      "g(p x + (1 - p) z) <= p g(x) + (1 - p) g(z) + 1e-9 (1 + |g|); reduction identities, projection step, "
      "objective bound and Taylor bound audited per segment";
  return record;
}

CheckRecord check_f_bound(const CutoffSigma& sigma, std::span<const double> a_grid, std::span<const double> w_grid) {
  CheckRecord record;
  record.check_id = "f_bound";
  constexpr double kTol = 1e-6;
  constexpr double kStep = 1e-4;
  record.tolerance = kTol;
  const double c = sigma.cutoff_constant();
  const double bound = 2.0 / c;

  auto f = [&](double a, double w) { return reduced_profile(sigma, a, w); };
  auto fd_second = [&](double a, double w) {
    auto diff = [&](double h) { return (f(a, w + h) - 2.0 * f(a, w) + f(a, w - h)) / (h * h); };
    return (4.0 * diff(kStep) - diff(2.0 * kStep)) / 3.0;
  };
  auto analytic = [&](double a, double w, double& t1, double& t2) {
    const double r = std::hypot(a, w);
    const CutoffDerivatives d = sigma.derivatives(r);
    t1 = (w * w) / (r * r) * d.second;
    t2 = (a * a) / (r * r * r) * d.first;
    return t1 + t2;
  };

  double max_fd = 0.0, max_t1 = 0.0, max_t2 = 0.0, agreement = 0.0;
  auto visit = [&](double a, double w) {
    double t1 = 0.0, t2 = 0.0;
    const double exact = analytic(a, w, t1, t2);
    const double numeric = fd_second(a, w);
    max_fd = std::max(max_fd, std::abs(numeric));
    max_t1 = std::max(max_t1, std::abs(t1));
    max_t2 = std::max(max_t2, std::abs(t2));
    agreement = std::max(agreement, std::abs(numeric - exact));
    const bool bad = std::abs(numeric) > bound + kTol || std::abs(t1) > 1.0 / c + 1e-12 || std::abs(t2) > 1.0 / c + 1e-12;
    if (bad && record.status == CheckStatus::Pass) {
      record.status = CheckStatus::Fail;
      record.witness = std::vector<double>{a, w, numeric, t1, t2};
    }
    return numeric;
  };
  for (const double a : a_grid)
    for (const double w : w_grid) visit(a, w);

  // a -> 0+ limit: the bound must hold and f'' must settle along w.
  constexpr double kSmallA[] = {1e-6, 1e-4, 1e-2};
  double continuity = 0.0;
  for (const double w : w_grid) {
    const double tiny = visit(kSmallA[0], w);
    for (const double a : {kSmallA[1], kSmallA[2]}) continuity = std::max(continuity, std::abs(visit(a, w) - tiny));
  }
  constexpr double kContinuityTol = 1e-4;
  if (continuity > kContinuityTol && record.status == CheckStatus::Pass) record.status = CheckStatus::Fail;

  record.samples_used = (a_grid.size() + 3) * w_grid.size();
  record.worst_margin = std::min({bound + kTol - max_fd, 1.0 / c - max_t1, 1.0 / c - max_t2});
  record.metrics = {{"bound", bound},
                    {"max_abs_f2_fd", max_fd},
                    {"max_abs_term_sigma2", max_t1},
                    {"max_abs_term_sigma1", max_t2},
                    {"fd_vs_analytic", agreement},
                    {"small_a_continuity", continuity}};
  record.notes = "sup |f''| <= 2/C by FD (step 1e-4, Richardson); chain-rule terms each <= 1/C; a in {1e-6,1e-4,1e-2} limit";
  return record;
}

CheckRecord check_f_bound(const CutoffSigma& sigma, std::size_t count) {
  const double top = sigma.vanishing_bound();
  std::vector<double> a_grid(count);
  for (std::size_t i = 0; i < count; ++i) a_grid[i] = top * static_cast<double>(i + 1) / static_cast<double>(count);
  const std::vector<double> w_grid = uniform_grid(0.0, 1.1 * top, count);
  return check_f_bound(sigma, a_grid, w_grid);
}

CheckRecord check_midpoint_taylor(const CutoffSigma& sigma, double a, double w_x, double w_z, double p) {
  CheckRecord record;
  record.check_id = "midpoint_taylor";
  record.tolerance = 1e-9;
  record.samples_used = 1;
  const double sup_bound = 2.0 / sigma.cutoff_constant();
  const double gap = reduced_convexity_gap(sigma, a, w_x, w_z, p);
  const double spread = p * (1.0 - p) * (w_x - w_z) * (w_x - w_z);
  const double margin = gap + 2.0 * spread * sup_bound;
  record.worst_margin = margin;
  record.status = margin >= -record.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
  if (!record.passed()) record.witness = std::vector<double>{a, w_x, w_z, p};
  record.metrics = {{"gap", gap}, {"stated_constant_margin", margin}, {"sharp_constant_margin", gap + 0.5 * spread * sup_bound}};
  record.notes = "p f(w_x) + (1-p) f(w_z) - f(p w_x + (1-p) w_z) >= -2 p (1-p) (w_x - w_z)^2 (2/C)";
  return record;
}

CheckRecord check_midpoint_taylor(const CutoffSigma& sigma, std::size_t tuple_count, const RngStream& rng) {
  CheckRecord record;
  record.check_id = "midpoint_taylor";
  record.tolerance = 1e-9;
  RngStream stream = rng.substream(0);
  const double top = sigma.vanishing_bound();
  double worst = kInf;
  double worst_sharp = kInf;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < tuple_count; ++i) {
    const double a = top * stream.uniform();
    const double w_x = 1.1 * top * (2.0 * stream.uniform() - 1.0);
    const double w_z = 1.1 * top * (2.0 * stream.uniform() - 1.0);
    const double p = stream.uniform();
    const CheckRecord one = check_midpoint_taylor(sigma, a, w_x, w_z, p);
    worst = std::min(worst, one.worst_margin);
    worst_sharp = std::min(worst_sharp, *one.metric("sharp_constant_margin"));
    if (!one.passed() && violations++ == 0) record.witness = one.witness;
  }
  record.status = violations == 0 ? CheckStatus::Pass : CheckStatus::Fail;
  record.worst_margin = worst;
  record.samples_used = tuple_count;
  record.metrics = {{"violations", static_cast<double>(violations)}, {"sharp_constant_margin", worst_sharp}};
  record.notes = "random (a, w_x, w_z, p) with a in (0, 3CR), |w| <= 1.1 * 3CR; sharp-constant margin recorded separately";
  return record;
}

CheckRecord gci_spot_check(const GoodBadSplit& split, std::size_t sample_count, double confidence,
                           const RngStream& rng, double cap) {
  CheckRecord record;
  record.check_id = "gci";
  const RejectionSample good = sample_good(split, sample_count, rng.substream(1));
  auto euclid = [cap](const Eigen::VectorXd& x) { return std::min(x.norm(), cap); };
  auto maxabs = [cap](const Eigen::VectorXd& x) { return std::min(x.lpNorm<Eigen::Infinity>(), cap); };

  RunningMoments good_euclid, good_max;
  for (Eigen::Index j = 0; j < good.points.cols(); ++j) {
    const Eigen::VectorXd x = good.points.col(j);
    good_euclid.push(euclid(x));
    good_max.push(maxabs(x));
  }
  const RunningMoments mu_euclid = gaussian_mean(split.dim(), sample_count, rng.substream(2), euclid);
  const RunningMoments mu_max = gaussian_mean(split.dim(), sample_count, rng.substream(3), maxabs);

  CheckStatus status = CheckStatus::Pass;
  double worst = kInf;
  auto compare = [&](const char* name, const RunningMoments& g, const RunningMoments& m) {
    const double diff = g.mean() - m.mean();
    const double se = std::hypot(g.standard_error(), m.standard_error());
    CheckStatus s = CheckStatus::Pass;
    if (diff > 6.0 * se) s = CheckStatus::Fail;
    else if (diff > 3.0 * se) s = CheckStatus::Inconclusive;
    status = worse(status, s);
    worst = std::min(worst, 3.0 * se - diff);
    record.metrics.emplace_back(std::string(name) + "_good", g.mean());
    record.metrics.emplace_back(std::string(name) + "_mu", m.mean());
    record.metrics.emplace_back(std::string(name) + "_combined_se", se);
  };
  compare("min_l2", good_euclid, mu_euclid);
  compare("min_linf", good_max, mu_max);
  record.status = status;
  record.worst_margin = worst;
  record.samples_used = 2 * sample_count;
  record.tolerance = 3.0;
  record.metrics.emplace_back("cap", cap);
  record.metrics.emplace_back("confidence", confidence);
  record.notes = "E_good[f] <= E_mu[f] + 3 SE; 3-6 SE above is inconclusive, beyond 6 SE fails";
  return record;
}

CheckRecord check_dilation_ratio(std::size_t dim, double n, std::size_t pair_count, const RngStream& rng) {
  CheckRecord record;
  record.check_id = "dilation_ratio";
  record.tolerance = 1e-12;
  const GaussianMeasure mu = GaussianMeasure::standard(dim);
  const DilatedGaussian dilated(mu, n);
  RngStream stream = rng.substream(0);
  double worst = 0.0;
  for (std::size_t i = 0; i < pair_count; ++i) {
    const Eigen::VectorXd x = 3.0 * stream.uniform() * normal_vector(dim, stream);
    const Eigen::VectorXd y = 3.0 * stream.uniform() * normal_vector(dim, stream);
    const double closed_form = dilation_log_ratio(x, n) - dilation_log_ratio(y, n);
    const double explicit_densities =
        (mu.log_density(x) - mu.log_density(y)) - (dilated.log_density(x) - dilated.log_density(y));
    const double err = std::abs(closed_form - explicit_densities);
    if (err > worst) {
      worst = err;
      if (err > record.tolerance) record.witness = concat({x, y});
    }
  }
  const double at_zero = std::abs(dilation_log_ratio(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), n));
  record.status = worst <= record.tolerance && at_zero == 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
  record.worst_margin = record.tolerance - worst;
  record.samples_used = pair_count;
  record.metrics = {{"n", n}, {"max_abs_error", worst}};
  record.notes = "closed-form log ratio differences vs explicit N(0,I) and N(0,n^2 I) log densities";
  return record;
}

// --- suite -----------------------------------------------------------------

CheckBudgets CheckBudgets::scaled(double factor) const {
  auto s = [factor](std::size_t value, std::size_t minimum) {
    return std::max(minimum, static_cast<std::size_t>(std::llround(static_cast<double>(value) * factor)));
  };
  CheckBudgets out;
  out.mass = s(mass, 1000);
  out.half_space = s(half_space, 1000);
  out.r1 = s(r1, 1000);
  out.r2_samples = s(r2_samples, 1);
  out.r2_outside = s(r2_outside, 1);
  out.r3_segments = s(r3_segments, 4);
  out.r4_segments = s(r4_segments, 4);
  out.gci = s(gci, 1000);
  out.dilation_pairs = s(dilation_pairs, 1);
  out.sigma_grid = s(sigma_grid, 100);
  out.erfc_grid = s(erfc_grid, 2);
  out.f_grid = s(f_grid, 2);
  out.taylor_tuples = s(taylor_tuples, 1);
  return out;
}

std::uint64_t check_stream_id(std::string_view check_id) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char ch : check_id) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

VerificationReport run_verification(const GoodBadSplit& split, const VerificationOptions& options,
                                    const RngStream& rng) {
  VerificationReport report;
  const CheckBudgets& b = options.budgets;
  const double conf = options.confidence;
  const CutoffSigma* sigma = split.sigma();

  for (const std::string_view id_view : kCheckIds) {
    const std::string id(id_view);
    if (!options.enabled.empty() && !options.enabled.contains(id)) continue;
    const RngStream stream = rng.substream(check_stream_id(id));
    const auto start = std::chrono::steady_clock::now();
    CheckRecord record;
    try {
      if (id == "delta_condition") {
        record = delta_condition_record(split.delta());
      } else if (id == "mass_condition") {
        record = check_mass_condition(split.body(), split.delta(), b.mass, conf, stream);
      } else if (id == "ball_containment") {
        record = check_ball_containment(split.body(), plateau_radius(split.delta()));
      } else if (id == "erfc_bound") {
        const std::vector<double> grid = uniform_grid(0.0, 12.0, b.erfc_grid);
        record = check_erfc_bound(grid);
      } else if (id == "erfc_chain") {
        record = check_erfc_chain(split.delta());
      } else if (id == "half_space_bound") {
        record = check_half_space_bound(split.body(), split.body().inradius(), b.half_space, conf, stream);
      } else if (id == "r1") {
        record = check_r1(split, b.r1, conf, stream);
      } else if (id == "r2") {
        record = check_r2(split, b.r2_samples, b.r2_outside, stream);
      } else if (id == "r3") {
        record = check_r3(split, b.r3_segments, stream);
      } else if (id == "r4") {
        record = check_r4(split, b.r4_segments, stream);
      } else if (id == "gci") {
        record = gci_spot_check(split, b.gci, conf, stream, options.gci_cap);
      } else if (id == "dilation_ratio") {
        record = check_dilation_ratio(split.dim(), split.n(), b.dilation_pairs, stream);
      } else if (sigma == nullptr) {
        record.check_id = id;
        record.status = CheckStatus::Inconclusive;
        record.notes = "requires the standard cutoff; a custom profile was supplied";
      } else if (id == "sigma_properties") {
        record = check_sigma_properties(*sigma, b.sigma_grid);
      } else if (id == "f_bound") {
        record = check_f_bound(*sigma, b.f_grid);
      } else if (id == "midpoint_taylor") {
        record = check_midpoint_taylor(*sigma, b.taylor_tuples, stream);
      }
    } catch (const SamplingError& e) {
      record = CheckRecord{};
      record.check_id = id;
      record.status = CheckStatus::Fail;
      record.notes = std::string("sampling failure: ") + e.what();
    } catch (const ConvergenceError& e) {
      record = CheckRecord{};
      record.check_id = id;
      record.status = CheckStatus::Fail;
      record.notes = std::string("projection failure: ") + e.what();
      record.witness = to_vector(e.last_iterate());
    }
    const auto stop = std::chrono::steady_clock::now();
    report.records.push_back(std::move(record));
    report.wall_clock_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return report;
}

}  // namespace gbsplit
