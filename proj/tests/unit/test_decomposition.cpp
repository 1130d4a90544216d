#include "gbsplit/decomposition.hpp"
#include "gbsplit/error.hpp"
#include "gbsplit/gaussian.hpp"

#include "quadrature.hpp"
#include "test_doubles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gbsplit;
using gbsplit::testing::ConstantCutoff;

TEST(GoodBadSplit, WeightsPartitionUnity) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  RngStream rng(1, 0);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x(3);
    for (Eigen::Index k = 0; k < 3; ++k) x[k] = 8.0 * rng.normal();
    const double bad = split.weight_bad(x);
    EXPECT_GE(bad, 0.0);
    EXPECT_LE(bad, 1.0);
    EXPECT_DOUBLE_EQ(bad + split.weight_good(x), 1.0);
  }
}

TEST(GoodBadSplit, WeightsOnAndFarFromTheBody) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  const CutoffSigma& sigma = *split.sigma();
  EXPECT_NEAR(split.weight_bad(Eigen::Vector3d::Zero()), 0.01, 1e-15);
  EXPECT_NEAR(split.weight_bad(Eigen::Vector3d(gbsplit::testing::kReferenceRadius + 0.9, 0.0, 0.0)), 0.01, 1e-15);
  const double far = gbsplit::testing::kReferenceRadius + sigma.ramp_end() + 1e-9;
  EXPECT_EQ(split.weight_bad(Eigen::Vector3d(0.0, far, 0.0)), 1.0);
  EXPECT_EQ(split.weight_good(Eigen::Vector3d(0.0, 0.0, -far)), 0.0);
}

TEST(GoodBadSplit, BadLogRatioIsMinusConvexObjective) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  const Eigen::Vector3d x(4.0, -3.0, 2.0);
  const double d = split.body().distance(x);
  EXPECT_NEAR(split.log_density_ratio_bad_dilated(x), -split.sigma()->value(d) - (3.0 / 8.0) * x.squaredNorm(), 1e-12);
}

TEST(GoodBadSplit, ExposesConstants) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  EXPECT_DOUBLE_EQ(split.cutoff_constant(), 32.0 / 3.0);
  EXPECT_DOUBLE_EQ(split.support_constant(), 128.0 / 3.0);
  EXPECT_EQ(split.dim(), 3u);
  const GoodBadSplit custom(gbsplit::testing::reference_ball(), std::make_shared<ConstantCutoff>(1.0), 0.01, 2.0);
  EXPECT_EQ(custom.sigma(), nullptr);
}

TEST(GoodBadSplit, RejectsBadDelta) {
  EXPECT_THROW(GoodBadSplit(gbsplit::testing::reference_ball(), 0.1, 2.0), PreconditionError);
  EXPECT_THROW(GoodBadSplit(gbsplit::testing::reference_ball(), 0.01, 1.0), PreconditionError);
  EXPECT_THROW(GoodBadSplit(nullptr, 0.01, 2.0), PreconditionError);
}

TEST(DeltaPrime, OneDimensionalQuadratureOracle) {
  const double r = 2.8;
  const GoodBadSplit split(std::make_shared<L2Ball>(1, r), 0.01, 2.0);
  const CutoffSigma& sigma = *split.sigma();
  const double exact = gbsplit::testing::integrate_pieces(
      [&](double x) { return gbsplit::testing::bad_density_1d(sigma, r, x); }, -40.0, 40.0,
      gbsplit::testing::bad_breaks_1d(sigma, r));
  const DeltaPrimeEstimate est = estimate_delta_prime(split, 400000, 0.99, RngStream(3, 0));
  EXPECT_NEAR(est.point_estimate, exact, 4.0 * est.standard_error);
  EXPECT_LE(est.ci_low, est.point_estimate);
  EXPECT_GE(est.ci_high, est.point_estimate);
  EXPECT_EQ(est.sample_count, 400000u);
}

TEST(DeltaPrime, ReferenceScenarioWithinTwoDelta) {
  const DeltaPrimeEstimate est = estimate_delta_prime(gbsplit::testing::reference_split(), 100000, 0.99, RngStream(4, 0));
  EXPECT_LE(est.ci_high, 0.02);
  EXPECT_GT(est.point_estimate, 0.0099);
}

TEST(DeltaPrime, DeterministicUnderSeed) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  const auto a = estimate_delta_prime(split, 50000, 0.99, RngStream(5, 1));
  const auto b = estimate_delta_prime(split, 50000, 0.99, RngStream(5, 1));
  EXPECT_EQ(a.point_estimate, b.point_estimate);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(DeltaPrime, NeedsEnoughSamples) {
  EXPECT_THROW(estimate_delta_prime(gbsplit::testing::reference_split(), 999, 0.99, RngStream(1, 0)), PreconditionError);
}

TEST(Samplers, GoodSamplesStayInDilatedBody) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  const RejectionSample good = sample_good(split, 20000, RngStream(6, 0));
  ASSERT_EQ(good.points.cols(), 20000);
  EXPECT_GE(good.proposals, 20000u);
  const BodyPtr outer = scale(split.body_ptr(), split.support_constant());
  for (Eigen::Index j = 0; j < good.points.cols(); ++j) ASSERT_TRUE(outer->contains(good.points.col(j)));
}

TEST(Samplers, BadSamplesAreDeterministic) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  const RejectionSample a = sample_bad(split, 500, RngStream(7, 0));
  const RejectionSample b = sample_bad(split, 500, RngStream(7, 0));
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.proposals, b.proposals);
}

TEST(Samplers, BadMeanAbsoluteValueMatchesQuadrature) {
  const double r = 2.8;
  const GoodBadSplit split(std::make_shared<L2Ball>(1, r), 0.01, 2.0);
  const CutoffSigma& sigma = *split.sigma();
  const auto breaks = gbsplit::testing::bad_breaks_1d(sigma, r);
  auto density = [&](double x) { return gbsplit::testing::bad_density_1d(sigma, r, x); };
  const double mass = gbsplit::testing::integrate_pieces(density, -40.0, 40.0, breaks);
  const double first = gbsplit::testing::integrate_pieces([&](double x) { return std::abs(x) * density(x); }, -40.0, 40.0, breaks) / mass;
  const double second = gbsplit::testing::integrate_pieces([&](double x) { return x * x * density(x); }, -40.0, 40.0, breaks) / mass;
  const RejectionSample bad = sample_bad(split, 40000, RngStream(8, 0));
  const double mean_abs = bad.points.cwiseAbs().mean();
  const double sd = std::sqrt(second - first * first);
  EXPECT_NEAR(mean_abs, first, 5.0 * sd / std::sqrt(40000.0));
}

TEST(Samplers, ZeroAcceptanceIsSamplingError) {
  const GoodBadSplit all_bad(gbsplit::testing::reference_ball(), std::make_shared<ConstantCutoff>(0.0), 0.01, 2.0);
  EXPECT_THROW(sample_good(all_bad, 10, RngStream(9, 0)), SamplingError);
}

TEST(Samplers, ExhaustedBudgetIsSamplingError) {
  const GoodBadSplit split = gbsplit::testing::reference_split();
  try {
    sample_bad(split, 1000, RngStream(10, 0), 1.0);
    FAIL() << "expected SamplingError";
  } catch (const SamplingError& e) {
    EXPECT_GT(e.proposals(), 0u);
    EXPECT_LT(e.accepted(), 1000u);
  }
}
