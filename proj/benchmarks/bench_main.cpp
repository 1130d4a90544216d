#include "gbsplit/convex_body.hpp"
#include "gbsplit/cutoff.hpp"
#include "gbsplit/decomposition.hpp"
#include "gbsplit/rng.hpp"
#include "gbsplit/special.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace gbsplit;

namespace {

Eigen::VectorXd gaussian_point(Eigen::Index d, RngStream& rng, double scale) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

BodyPtr reference_ball() {
  return std::make_shared<L2Ball>(3, std::sqrt(special::chi_square_upper_quantile(3.0, 0.01)));
}

void project_body(benchmark::State& state, const ConvexBody& body) {
  RngStream rng(1, 0);
  const auto d = static_cast<Eigen::Index>(body.dim());
  for (auto _ : state) {
    const Eigen::VectorXd y = gaussian_point(d, rng, 6.0);
    benchmark::DoNotOptimize(body.distance(y));
  }
}

void BM_DistanceL2(benchmark::State& state) { project_body(state, L2Ball(3, 3.0)); }
void BM_DistanceLInf(benchmark::State& state) { project_body(state, LpBall(3, LpBall::Norm::LInf, 3.0)); }
void BM_DistanceL1(benchmark::State& state) { project_body(state, LpBall(8, LpBall::Norm::L1, 3.0)); }

void BM_DistanceEllipsoid(benchmark::State& state) {
  Eigen::Matrix3d m;
  m << 2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5;
  project_body(state, Ellipsoid(m));
}

void BM_DistancePolytope(benchmark::State& state) {
  RngStream rng(2, 0);
  const auto m = static_cast<Eigen::Index>(state.range(0));
  Eigen::MatrixXd normals(m, 3);
  for (Eigen::Index i = 0; i < m; ++i) normals.row(i) = gaussian_point(3, rng, 1.0).normalized().transpose();
  project_body(state, SymmetricPolytope(normals, Eigen::VectorXd::Constant(m, 3.0)));
}

void BM_SigmaValue(benchmark::State& state) {
  const CutoffSigma sigma = CutoffSigma::build(0.01, 2.0);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sigma.value(x));
    x = x > 25.0 ? 0.0 : x + 0.001;
  }
}

void BM_DeltaPrime(benchmark::State& state) {
  const GoodBadSplit split(reference_ball(), 0.01, 2.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_delta_prime(split, n, 0.99, RngStream(3, id++)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_SampleBad(benchmark::State& state) {
  const GoodBadSplit split(reference_ball(), 0.01, 2.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_bad(split, n, RngStream(4, id++), 0.01));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_SampleGood(benchmark::State& state) {
  const GoodBadSplit split(reference_ball(), 0.01, 2.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_good(split, n, RngStream(5, id++), 0.01));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_DistanceL2);
BENCHMARK(BM_DistanceLInf);
BENCHMARK(BM_DistanceL1);
BENCHMARK(BM_DistanceEllipsoid);
BENCHMARK(BM_DistancePolytope)->Arg(6)->Arg(20);
BENCHMARK(BM_SigmaValue);
BENCHMARK(BM_DeltaPrime)->Arg(1 << 16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleBad)->Arg(1 << 12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleGood)->Arg(1 << 16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
