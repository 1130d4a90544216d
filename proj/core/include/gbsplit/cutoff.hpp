#pragma once

namespace gbsplit {

struct CutoffDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// Non-increasing profile sigma: [0, inf) -> [0, sigma(0)] applied to the
/// distance to K. The decomposition only needs evaluation and derivatives.
class Cutoff {
 public:
  virtual ~Cutoff() = default;
  /// Throws DomainError for x < 0.
  virtual double value(double x) const = 0;
  virtual CutoffDerivatives derivatives(double x) const = 0;
  /// sigma vanishes identically on [support_end(), inf).
  virtual double support_end() const = 0;
};

/// Ramp length multiplier: L = kRampCoefficient * R * sqrt(C).
inline constexpr double kRampCoefficient = 2.404;

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 and its first two derivatives.
double smoothstep(double t) noexcept;
double smoothstep_d1(double t) noexcept;
double smoothstep_d2(double t) noexcept;

/// The explicit C^2 cutoff: R^2 on [0, 1], R^2 (1 - s((x - 1) / L)) on the
/// ramp (1, 1 + L), zero afterwards, with R = sqrt(log(1/delta)),
/// C = 8 n^2 / (n^2 - 1) and L = 2.404 R sqrt(C). With this L,
///   |sigma'(x)|  <= (x - 1) / C   for x >= 1,
///   |sigma''(x)| <= 1 / C         everywhere,
/// and the ramp ends well before 3 C R.
class CutoffSigma final : public Cutoff {
 public:
  /// Throws PreconditionError if delta fails delta < 0.5 or the pi-condition,
  /// or if n <= 1.
  static CutoffSigma build(double delta, double n);

  double value(double x) const override;
  CutoffDerivatives derivatives(double x) const override;
  double support_end() const override { return ramp_end(); }

  double delta() const noexcept { return delta_; }
  double n() const noexcept { return n_; }
  double plateau_radius() const noexcept { return radius_; }
  double plateau_value() const noexcept { return radius_ * radius_; }
  double cutoff_constant() const noexcept { return constant_; }
  double ramp_length() const noexcept { return ramp_; }
  double ramp_start() const noexcept { return 1.0; }
  double ramp_end() const noexcept { return 1.0 + ramp_; }
  /// 3 C R: the point beyond which sigma is required to vanish.
  double vanishing_bound() const noexcept { return 3.0 * constant_ * radius_; }

 private:
  CutoffSigma(double delta, double n, double radius, double constant, double ramp)
      : delta_(delta), n_(n), radius_(radius), constant_(constant), ramp_(ramp) {}

  double delta_;
  double n_;
  double radius_;
  double constant_;
  double ramp_;
};

inline CutoffSigma build_sigma(double delta, double n) { return CutoffSigma::build(delta, n); }

}  // namespace gbsplit
