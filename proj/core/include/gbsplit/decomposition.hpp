#pragma once

#include "gbsplit/convex_body.hpp"
#include "gbsplit/cutoff.hpp"
#include "gbsplit/gaussian.hpp"
#include "gbsplit/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <optional>

namespace gbsplit {

/// mu = (1 - delta') nu_good + delta' nu_bad for mu standard normal on R^d, with
///   d nu_bad  / d mu  proportional to  exp(-sigma(d(x, K))),
///   d nu_good / d mu  proportional to  1 - exp(-sigma(d(x, K))).
/// Everything is expressed in whitened coordinates.
class GoodBadSplit {
 public:
  /// Builds the standard cutoff for (delta, n); throws PreconditionError when
  /// the pair is inadmissible.
  GoodBadSplit(BodyPtr body, double delta, double n);

  /// Uses an arbitrary cutoff profile (degenerate profiles are useful in tests).
  GoodBadSplit(BodyPtr body, std::shared_ptr<const Cutoff> cutoff, double delta, double n);

  const ConvexBody& body() const noexcept { return *body_; }
  const BodyPtr& body_ptr() const noexcept { return body_; }
  const Cutoff& cutoff() const noexcept { return *cutoff_; }
  /// The standard cutoff, or nullptr when a custom profile was supplied.
  const CutoffSigma* sigma() const noexcept { return dynamic_cast<const CutoffSigma*>(cutoff_.get()); }
  std::size_t dim() const noexcept { return body_->dim(); }

  double delta() const noexcept { return delta_; }
  double n() const noexcept { return n_; }
  /// 8 n^2 / (n^2 - 1).
  double cutoff_constant() const noexcept { return cutoff_constant_; }
  /// 32 n^2 / (n^2 - 1): supp(nu_good) lies in support_constant() * K.
  double support_constant() const noexcept { return support_constant_; }

  /// exp(-sigma(d(x, K))), in (0, 1].
  double weight_bad(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// 1 - weight_bad(x).
  double weight_good(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// -sigma(d(x)) - ((n^2 - 1) / (2 n^2)) |x|^2, the log of d nu_bad / d mu^{x n}
  /// up to the normalising constant.
  double log_density_ratio_bad_dilated(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  BodyPtr body_;
  std::shared_ptr<const Cutoff> cutoff_;
  double delta_;
  double n_;
  double cutoff_constant_;
  double support_constant_;
};

struct DeltaPrimeEstimate {
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double standard_error = 0.0;
  double confidence = 0.0;
  std::size_t sample_count = 0;
};

/// Monte Carlo mean of weight_bad under N(0, I) with a normal-approximation
/// two-sided interval. Requires sample_count >= 1000.
DeltaPrimeEstimate estimate_delta_prime(const GoodBadSplit& split, std::size_t sample_count, double confidence,
                                        const RngStream& rng);

struct RejectionSample {
  SampleMatrix points;
  std::size_t proposals = 0;
};

/// Exact nu_bad samples: propose from N(0, I), accept with probability
/// weight_bad. The proposal budget is 10 * count / delta'; `delta_prime` is
/// estimated from a pilot run when not supplied. Throws SamplingError when the
/// budget runs out.
RejectionSample sample_bad(const GoodBadSplit& split, std::size_t count, const RngStream& rng,
                           std::optional<double> delta_prime = std::nullopt);

/// Exact nu_good samples (acceptance probability weight_good); budget
/// 10 * count / (1 - delta').
RejectionSample sample_good(const GoodBadSplit& split, std::size_t count, const RngStream& rng,
                            std::optional<double> delta_prime = std::nullopt);

}  // namespace gbsplit
