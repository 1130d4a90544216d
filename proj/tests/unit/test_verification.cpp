#include "gbsplit/error.hpp"
#include "gbsplit/hypothesis.hpp"
#include "gbsplit/verification.hpp"

#include "test_doubles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace gbsplit;
using gbsplit::testing::BumpCutoff;
using gbsplit::testing::ConstantCutoff;
using gbsplit::testing::reference_ball;
using gbsplit::testing::reference_split;

namespace {

GoodBadSplit custom_split(std::shared_ptr<const Cutoff> cutoff) {
  return GoodBadSplit(reference_ball(), std::move(cutoff), 0.01, 2.0);
}

const RngStream kRng(2024, 0);

}  // namespace

TEST(Suite, ReferenceScenarioPassesAtReducedBudget) {
  VerificationOptions options;
  options.budgets = CheckBudgets{}.scaled(0.05);
  const VerificationReport report = run_verification(reference_split(), options, kRng);
  ASSERT_EQ(report.records.size(), kCheckIds.size());
  ASSERT_EQ(report.wall_clock_ms.size(), kCheckIds.size());
  for (std::size_t i = 0; i < kCheckIds.size(); ++i) {
    EXPECT_EQ(report.records[i].check_id, kCheckIds[i]);
    if (report.records[i].check_id == "gci") EXPECT_NE(report.records[i].status, CheckStatus::Fail);
    else EXPECT_TRUE(report.records[i].passed()) << report.records[i].check_id << ": " << report.records[i].notes;
  }
  EXPECT_NE(report.overall(), CheckStatus::Fail);
}

TEST(Suite, SubsetAndDeterminism) {
  VerificationOptions options;
  options.budgets = CheckBudgets{}.scaled(0.02);
  options.enabled = {"r1", "r3"};
  const VerificationReport a = run_verification(reference_split(), options, kRng);
  const VerificationReport b = run_verification(reference_split(), options, kRng);
  ASSERT_EQ(a.records.size(), 2u);
  EXPECT_EQ(a.records[0].check_id, "r1");
  EXPECT_EQ(a.records[1].check_id, "r3");
  EXPECT_EQ(a.records[0].worst_margin, b.records[0].worst_margin);
  EXPECT_EQ(a.records[1].worst_margin, b.records[1].worst_margin);
  EXPECT_NE(a.find("r3"), nullptr);
  EXPECT_EQ(a.find("r4"), nullptr);
}

TEST(Suite, CustomCutoffMakesSigmaChecksInconclusive) {
  VerificationOptions options;
  options.budgets = CheckBudgets{}.scaled(0.01);
  options.enabled = {"sigma_properties", "f_bound", "midpoint_taylor"};
  const VerificationReport report = run_verification(custom_split(std::make_shared<ConstantCutoff>(1.0)), options, kRng);
  for (const auto& r : report.records) EXPECT_EQ(r.status, CheckStatus::Inconclusive) << r.check_id;
  EXPECT_EQ(report.overall(), CheckStatus::Inconclusive);
}

TEST(Suite, SamplingFailureBecomesFailedRecord) {
  VerificationOptions options;
  options.budgets = CheckBudgets{}.scaled(0.01);
  options.enabled = {"r2"};
  const VerificationReport report = run_verification(custom_split(std::make_shared<ConstantCutoff>(0.0)), options, kRng);
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_EQ(report.records[0].status, CheckStatus::Fail);
  EXPECT_NE(report.records[0].notes.find("sampling failure"), std::string::npos);
}

TEST(Hypotheses, DeltaCondition) {
  const DeltaCondition ok = check_delta_condition(0.01);
  EXPECT_TRUE(ok.holds);
  EXPECT_NEAR(ok.slack, 45.932, 1e-3);
  EXPECT_FALSE(check_delta_condition(0.1).holds);
  EXPECT_TRUE(delta_condition_record(0.01).passed());
  EXPECT_EQ(delta_condition_record(0.1).status, CheckStatus::Fail);
  const double star = *delta_condition_record(0.01).metric("delta_star");
  EXPECT_GT(star, 0.0199);
  EXPECT_LT(star, 0.0203);
}

TEST(Hypotheses, BallContainmentMarginAndFailure) {
  const CheckRecord ok = check_ball_containment(*reference_ball(), plateau_radius(0.01));
  EXPECT_TRUE(ok.passed());
  EXPECT_NEAR(ok.worst_margin, 1.2222, 1e-4);
  const CheckRecord bad = check_ball_containment(L2Ball(3, 1.5), plateau_radius(0.01));
  EXPECT_EQ(bad.status, CheckStatus::Fail);
  EXPECT_NE(bad.notes.find("hypothesis violation"), std::string::npos);
}

TEST(Hypotheses, MassConditionVerdicts) {
  EXPECT_TRUE(check_mass_condition(*reference_ball(), 0.01, 1000, 0.99, kRng).passed());
  EXPECT_EQ(check_mass_condition(L2Ball(3, 2.0), 0.01, 20000, 0.99, kRng).status, CheckStatus::Fail);
  // l1 ball in the plane whose exact outer mass is 0.01; the analytic bound is loose.
  const LpBall diamond(2, LpBall::Norm::L1, 3.9686018991064684);
  const CheckRecord edge = check_mass_condition(diamond, 0.01, 1000, 0.99, kRng);
  EXPECT_EQ(edge.status, CheckStatus::Inconclusive);
}

TEST(Hypotheses, ErfcBoundStrictOnGrid) {
  const std::vector<double> grid = uniform_grid(0.0, 12.0, 1000);
  ASSERT_EQ(grid.size(), 1000u);
  EXPECT_EQ(grid.front(), 0.0);
  EXPECT_EQ(grid.back(), 12.0);
  const CheckRecord r = check_erfc_bound(grid);
  EXPECT_TRUE(r.passed());
  EXPECT_GT(r.worst_margin, 0.0);
  EXPECT_EQ(*r.metric("ratio_monotone"), 1.0);
}

TEST(Hypotheses, ErfcChain) {
  const CheckRecord ok = check_erfc_chain(0.01);
  EXPECT_TRUE(ok.passed());
  EXPECT_NEAR(*ok.metric("half_space_tail"), 0.5 * std::erfc(std::sqrt(std::log(100.0)) / std::sqrt(2.0)), 1e-15);
  EXPECT_EQ(check_erfc_chain(0.1).status, CheckStatus::Fail);
}

TEST(Hypotheses, HalfSpaceBound) {
  const BodyPtr ball = reference_ball();
  const CheckRecord ok = check_half_space_bound(*ball, ball->inradius(), 200000, 0.99, kRng);
  EXPECT_TRUE(ok.passed());
  // Degenerate c = 0 with a tiny body: everything is outside, the bound is 1/2.
  const CheckRecord tiny = check_half_space_bound(L2Ball(3, 1e-9), 0.0, 10000, 0.99, kRng);
  EXPECT_TRUE(tiny.passed());
  EXPECT_DOUBLE_EQ(*tiny.metric("half_space_tail"), 0.5);
  const CheckRecord wrong = check_half_space_bound(*ball, 0.0, 10000, 0.99, kRng);
  EXPECT_EQ(wrong.status, CheckStatus::Fail);
}

TEST(Cutoff, SigmaPropertiesPassWithFdAgreement) {
  const CheckRecord r = check_sigma_properties(*reference_split().sigma(), 10000);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(*r.metric("fd_first_max_error"), 1e-6);
  EXPECT_LE(*r.metric("fd_second_max_error"), 1e-6);
  EXPECT_GE(r.samples_used, 10000u);
}

TEST(Requirements, R1PassesAndFailsWithWitnessMetrics) {
  const CheckRecord ok = check_r1(reference_split(), 100000, 0.99, kRng);
  EXPECT_TRUE(ok.passed());
  EXPECT_LE(*ok.metric("ci_high"), 0.02);
  EXPECT_GE(*ok.metric("intermediate_margin"), 0.0);
  const CheckRecord bad = check_r1(custom_split(std::make_shared<ConstantCutoff>(0.5)), 10000, 0.99, kRng);
  EXPECT_EQ(bad.status, CheckStatus::Fail);
}

TEST(Requirements, R2ContainmentAndZeroWeight) {
  const CheckRecord ok = check_r2(reference_split(), 5000, 2000, kRng);
  EXPECT_TRUE(ok.passed());
  EXPECT_EQ(*ok.metric("escaped_samples"), 0.0);
  EXPECT_EQ(*ok.metric("max_weight_good_outside"), 0.0);
  EXPECT_GE(*ok.metric("ray_margin"), -1e-9);
  const CheckRecord bad = check_r2(custom_split(std::make_shared<ConstantCutoff>(std::log(100.0))), 1000, 100, kRng);
  EXPECT_EQ(bad.status, CheckStatus::Fail);
  ASSERT_TRUE(bad.witness.has_value());
  EXPECT_EQ(bad.witness->size(), 3u);
}

TEST(Requirements, R3PassesAndDetectsBump) {
  EXPECT_TRUE(check_r3(reference_split(), 2000, kRng).passed());
  const CheckRecord bad = check_r3(custom_split(std::make_shared<BumpCutoff>(3.0)), 2000, kRng);
  EXPECT_EQ(bad.status, CheckStatus::Fail);
  ASSERT_TRUE(bad.witness.has_value());
  EXPECT_EQ(bad.witness->size(), 7u);
  EXPECT_LT(bad.worst_margin, -1e-9);
}

TEST(Requirements, R4PassesWithReductionAudit) {
  const CheckRecord ok = check_r4(reference_split(), 2000, kRng);
  EXPECT_TRUE(ok.passed()) << ok.notes;
  EXPECT_LE(*ok.metric("max_identity_error"), 1e-9);
  EXPECT_GE(*ok.metric("projection_step_margin"), -1e-12);
  EXPECT_LE(*ok.metric("rewrite_error"), 1e-9);
  EXPECT_GE(*ok.metric("taylor_margin"), -1e-9);
}

TEST(Requirements, R4DetectsConcaveCutoff) {
  const CheckRecord bad = check_r4(custom_split(std::make_shared<BumpCutoff>(5.0)), 2000, kRng);
  EXPECT_EQ(bad.status, CheckStatus::Fail);
  ASSERT_TRUE(bad.witness.has_value());
}

TEST(Requirements, FBoundAndTaylor) {
  const GoodBadSplit split = reference_split();
  const CutoffSigma& sigma = *split.sigma();
  const CheckRecord f = check_f_bound(sigma, 200);
  EXPECT_TRUE(f.passed());
  EXPECT_LE(*f.metric("max_abs_f2_fd"), 2.0 / sigma.cutoff_constant() + 1e-6);
  EXPECT_LE(*f.metric("fd_vs_analytic"), 1e-5);
  EXPECT_TRUE(check_midpoint_taylor(sigma, 10000, kRng).passed());
  const CheckRecord one = check_midpoint_taylor(sigma, 0.5, -3.0, 9.0, 0.3);
  EXPECT_TRUE(one.passed());
  EXPECT_GE(*one.metric("sharp_constant_margin"), -1e-9);
}

TEST(Requirements, GciNeverFailsOnReference) {
  const CheckRecord r = gci_spot_check(reference_split(), 50000, 0.99, kRng);
  EXPECT_NE(r.status, CheckStatus::Fail);
  EXPECT_EQ(*r.metric("cap"), 10.0);
}

TEST(Requirements, DilationRatio) {
  const CheckRecord r = check_dilation_ratio(3, 2.0, 10000, kRng);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(*r.metric("max_abs_error"), 1e-12);
  EXPECT_THROW(check_dilation_ratio(3, 1.0, 10, kRng), DomainError);
}

TEST(ProofObjects, OneDReductionExample) {
  const Eigen::Vector2d x(-2.0, 1.0);
  const Eigen::Vector2d z(2.0, 1.0);
  const OneDReduction r = OneDReduction::from_segment(x, z, 0.5, Eigen::Vector2d::Zero());
  EXPECT_TRUE(r.o.isApprox(Eigen::Vector2d(0.0, 1.0)));
  EXPECT_DOUBLE_EQ(r.a, 1.0);
  EXPECT_DOUBLE_EQ(r.w_x, -2.0);
  EXPECT_DOUBLE_EQ(r.w_z, 2.0);
  EXPECT_DOUBLE_EQ(r.w_y, 0.0);
  EXPECT_DOUBLE_EQ(r.p_prime, 0.5);
}

TEST(ProofObjects, ReducedGapOfConstantIsZero) {
  const ConstantCutoff flat(2.0);
  EXPECT_DOUBLE_EQ(reduced_convexity_gap(flat, 0.3, -1.0, 4.0, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(reduced_profile(flat, 1.0, 1.0), 2.0);
}

TEST(ProofObjects, PointAtDistance) {
  const L2Ball ball(3, 2.0);
  const Eigen::Vector3d u(1.0, 2.0, 2.0);
  EXPECT_NEAR(ball.distance(point_at_distance(ball, u, 5.0)), 5.0, 1e-10);
  EXPECT_NEAR(point_at_distance(ball, u, 0.0).norm(), 2.0, 1e-12);
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.0, 0.6, 0.8, 0.0, 1.0;
  const SymmetricPolytope poly(a, Eigen::Vector3d(1.0, 1.2, 0.7));
  EXPECT_NEAR(poly.distance(point_at_distance(poly, Eigen::Vector2d(0.3, 1.0), 3.0)), 3.0, 1e-9);
}

TEST(ProofObjects, SegmentStrata) {
  const GoodBadSplit split = reference_split();
  RngStream rng(99, 0);
  const SegmentBatch batch = make_segments(split, 400, rng, 2);
  ASSERT_EQ(batch.size(), 800u);
  int counts[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < batch.size(); ++i) ++counts[static_cast<int>(batch.stratum[i])];
  for (int c : counts) EXPECT_EQ(c, 200);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double dx = split.body().distance(batch.x[i]);
    const double dz = split.body().distance(batch.z[i]);
    switch (batch.stratum[i]) {
      case SegmentBatch::Stratum::InsideBody: EXPECT_EQ(dx + dz, 0.0); break;
      case SegmentBatch::Stratum::Ramp:
        EXPECT_GE(std::min(dx, dz), 1.0 - 1e-9);
        EXPECT_LE(std::max(dx, dz), split.cutoff().support_end() + 1e-9);
        break;
      case SegmentBatch::Stratum::Straddling: EXPECT_EQ(dx, 0.0); break;
      case SegmentBatch::Stratum::FarField: EXPECT_GE(std::min(dx, dz), split.cutoff().support_end() - 1e-9); break;
    }
    EXPECT_GT(batch.p[i], 0.0);
    EXPECT_LT(batch.p[i], 1.0);
  }
}

TEST(Budgets, ScalingRespectsMinimums) {
  const CheckBudgets tiny = CheckBudgets{}.scaled(1e-9);
  EXPECT_EQ(tiny.r1, 1000u);
  EXPECT_EQ(tiny.r3_segments, 4u);
  const CheckBudgets twice = CheckBudgets{}.scaled(2.0);
  EXPECT_EQ(twice.r1, 2000000u);
  EXPECT_EQ(CheckBudgets{}.scaled(1.0), CheckBudgets{});
}

TEST(Budgets, StreamIdsAreDistinct) {
  std::set<std::uint64_t> ids;
  for (const auto id : kCheckIds) ids.insert(check_stream_id(id));
  EXPECT_EQ(ids.size(), kCheckIds.size());
}
