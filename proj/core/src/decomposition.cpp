#include "gbsplit/decomposition.hpp"

#include "gbsplit/error.hpp"
#include "gbsplit/hypothesis.hpp"
#include "gbsplit/parallel.hpp"
#include "gbsplit/special.hpp"
#include "gbsplit/stats.hpp"

#include <cmath>
#include <string>

namespace gbsplit {

namespace {

constexpr std::uint64_t kPilotStream = 0x70696c6f74ull;  // "pilot"
constexpr std::size_t kPilotSamples = 100000;
constexpr double kBudgetFactor = 10.0;

template <class Weight>
RejectionSample rejection_sample(std::size_t dim, std::size_t count, const RngStream& rng, double acceptance,
                                 Weight&& weight, const char* label) {
  if (count == 0) throw PreconditionError(std::string(label) + ": count must be positive");
  if (!(acceptance > 0.0)) throw SamplingError(std::string(label) + ": acceptance rate is zero", 0, 0);

  struct Batch {
    SampleMatrix points;
    std::size_t proposals = 0;
  };
  const std::size_t batches = batch_count(count);
  auto parts = map_batches(batches, [&](std::size_t b) {
    const std::size_t quota = batch_length(count, b);
    const auto budget = static_cast<std::size_t>(std::ceil(kBudgetFactor * static_cast<double>(quota) / acceptance));
    RngStream stream = rng.substream(b);
    Batch out;
    out.points.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(quota));
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    std::size_t accepted = 0;
    while (accepted < quota) {
      if (out.proposals >= budget) {
        throw SamplingError(std::string(label) + ": proposal budget of " + std::to_string(budget) +
                                " exhausted in batch " + std::to_string(b),
                            out.proposals, accepted);
      }
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = stream.normal();
      const double u = stream.uniform();
      ++out.proposals;
      if (u < weight(x)) out.points.col(static_cast<Eigen::Index>(accepted++)) = x;
    }
    return out;
  });

  RejectionSample result;
  result.points.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  Eigen::Index offset = 0;
  for (auto& part : parts) {
    result.points.middleCols(offset, part.points.cols()) = part.points;
    offset += part.points.cols();
    result.proposals += part.proposals;
  }
  return result;
}

}  // namespace

GoodBadSplit::GoodBadSplit(BodyPtr body, double delta, double n)
    : GoodBadSplit(body, std::make_shared<CutoffSigma>(CutoffSigma::build(delta, n)), delta, n) {}

GoodBadSplit::GoodBadSplit(BodyPtr body, std::shared_ptr<const Cutoff> cutoff, double delta, double n)
    : body_(std::move(body)), cutoff_(std::move(cutoff)), delta_(delta), n_(n) {
  if (!body_) throw PreconditionError("GoodBadSplit: null body");
  if (!cutoff_) throw PreconditionError("GoodBadSplit: null cutoff");
  if (!(delta > 0.0 && delta < 0.5)) throw PreconditionError("GoodBadSplit: delta must lie in (0, 0.5)");
  cutoff_constant_ = gbsplit::cutoff_constant(n);
  support_constant_ = gbsplit::support_constant(n);
}

double GoodBadSplit::weight_bad(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::exp(-cutoff_->value(body_->distance(x)));
}

double GoodBadSplit::weight_good(const Eigen::Ref<const Eigen::VectorXd>& x) const { return 1.0 - weight_bad(x); }

double GoodBadSplit::log_density_ratio_bad_dilated(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return -cutoff_->value(body_->distance(x)) + dilation_log_ratio(x, n_);
}

DeltaPrimeEstimate estimate_delta_prime(const GoodBadSplit& split, std::size_t sample_count, double confidence,
                                        const RngStream& rng) {
  if (sample_count < 1000) throw PreconditionError("estimate_delta_prime needs at least 1000 samples");
  const double z = special::normal_critical_value(confidence);
  const auto dim = static_cast<Eigen::Index>(split.dim());

  auto parts = map_batches(batch_count(sample_count), [&](std::size_t b) {
    RngStream stream = rng.substream(b);
    RunningMoments moments;
    Eigen::VectorXd x(dim);
    for (std::size_t j = 0, m = batch_length(sample_count, b); j < m; ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) x[i] = stream.normal();
      moments.push(split.weight_bad(x));
    }
    return moments;
  });
  RunningMoments total;
  for (const auto& part : parts) total.merge(part);

  DeltaPrimeEstimate estimate;
  estimate.point_estimate = total.mean();
  estimate.standard_error = total.standard_error();
  estimate.ci_low = estimate.point_estimate - z * estimate.standard_error;
  estimate.ci_high = estimate.point_estimate + z * estimate.standard_error;
  estimate.confidence = confidence;
  estimate.sample_count = total.count();
  return estimate;
}

RejectionSample sample_bad(const GoodBadSplit& split, std::size_t count, const RngStream& rng,
                           std::optional<double> delta_prime) {
  const double rate =
      delta_prime ? *delta_prime
                  : estimate_delta_prime(split, kPilotSamples, 0.99, rng.substream(kPilotStream)).point_estimate;
  return rejection_sample(split.dim(), count, rng, rate,
                          [&](const Eigen::VectorXd& x) { return split.weight_bad(x); }, "sample_bad");
}

RejectionSample sample_good(const GoodBadSplit& split, std::size_t count, const RngStream& rng,
                            std::optional<double> delta_prime) {
  const double rate =
      delta_prime ? *delta_prime
                  : estimate_delta_prime(split, kPilotSamples, 0.99, rng.substream(kPilotStream)).point_estimate;
  return rejection_sample(split.dim(), count, rng, 1.0 - rate,
                          [&](const Eigen::VectorXd& x) { return split.weight_good(x); }, "sample_good");
}

}  // namespace gbsplit
