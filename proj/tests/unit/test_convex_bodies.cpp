#include "gbsplit/convex_body.hpp"
#include "gbsplit/error.hpp"
#include "gbsplit/gaussian.hpp"
#include "gbsplit/special.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

using namespace gbsplit;

namespace {

Eigen::VectorXd gaussian_vector(Eigen::Index d, RngStream& rng, double scale = 1.0) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

Eigen::MatrixXd random_normals(Eigen::Index m, Eigen::Index d, RngStream& rng) {
  Eigen::MatrixXd a(m, d);
  for (Eigen::Index i = 0; i < m; ++i) a.row(i) = gaussian_vector(d, rng).normalized().transpose();
  return a;
}

// Exact projection onto {|a_i . x| <= b_i} by enumerating every assignment of
// each slab to {inactive, upper face, lower face}.
Eigen::VectorXd enumerate_projection(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& y) {
  const Eigen::Index m = a.rows();
  const Eigen::Index d = a.cols();
  Eigen::VectorXd best = y;
  double best_dist = std::numeric_limits<double>::infinity();
  std::size_t states = 1;
  for (Eigen::Index i = 0; i < m; ++i) states *= 3;
  for (std::size_t code = 0; code < states; ++code) {
    std::vector<Eigen::Index> rows;
    std::vector<double> signs;
    std::size_t c = code;
    for (Eigen::Index i = 0; i < m; ++i, c /= 3) {
      if (c % 3 == 0) continue;
      rows.push_back(i);
      signs.push_back(c % 3 == 1 ? 1.0 : -1.0);
    }
    if (static_cast<Eigen::Index>(rows.size()) > d) continue;
    Eigen::VectorXd x = y;
    if (!rows.empty()) {
      Eigen::MatrixXd g(static_cast<Eigen::Index>(rows.size()), d);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t k = 0; k < rows.size(); ++k) {
        g.row(static_cast<Eigen::Index>(k)) = signs[k] * a.row(rows[k]);
        rhs[static_cast<Eigen::Index>(k)] = b[rows[k]];
      }
      // Minimum-norm correction onto the affine face.
      const Eigen::VectorXd correction = g.transpose() * (g * g.transpose()).ldlt().solve(g * y - rhs);
      x = y - correction;
    }
    if (((a * x).cwiseAbs() - b).maxCoeff() > 1e-12) continue;
    const double dist = (x - y).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

// l1-ball projection by bisection on the soft threshold.
Eigen::VectorXd bisect_l1_projection(const Eigen::VectorXd& y, double r) {
  if (y.lpNorm<1>() <= r) return y;
  double lo = 0.0;
  double hi = y.cwiseAbs().maxCoeff();
  for (int i = 0; i < 200; ++i) {
    const double tau = 0.5 * (lo + hi);
    const double mass = (y.cwiseAbs().array() - tau).max(0.0).sum();
    if (mass > r) lo = tau; else hi = tau;
  }
  const double tau = 0.5 * (lo + hi);
  return (y.array().sign() * (y.cwiseAbs().array() - tau).max(0.0)).matrix();
}

// Nearest boundary point of the 2-D ellipsoid x^T A x <= 1 by dense angle
// search refined by golden section.
Eigen::Vector2d ellipse_projection(const Eigen::Matrix2d& shape, const Eigen::Vector2d& y) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(shape);
  const Eigen::Matrix2d root_inv = eig.operatorInverseSqrt();
  auto point = [&](double t) { return Eigen::Vector2d(root_inv * Eigen::Vector2d(std::cos(t), std::sin(t))); };
  auto dist = [&](double t) { return (point(t) - y).squaredNorm(); };
  const int grid = 20000;
  double best_t = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = 2.0 * std::numbers::pi * i / grid;
    if (dist(t) < dist(best_t)) best_t = t;
  }
  double lo = best_t - 2.0 * std::numbers::pi / grid;
  double hi = best_t + 2.0 * std::numbers::pi / grid;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double m1 = hi - phi * (hi - lo);
    const double m2 = lo + phi * (hi - lo);
    if (dist(m1) < dist(m2)) hi = m2; else lo = m1;
  }
  return point(0.5 * (lo + hi));
}

std::vector<BodyPtr> sample_bodies() {
  RngStream rng(77, 0);
  Eigen::Matrix3d shape;
  shape << 0.5, 0.1, 0.0, 0.1, 0.3, -0.05, 0.0, -0.05, 0.9;
  return {std::make_shared<L2Ball>(3, 2.0),
          std::make_shared<LpBall>(3, LpBall::Norm::LInf, 1.5),
          std::make_shared<LpBall>(3, LpBall::Norm::L1, 2.5),
          std::make_shared<Ellipsoid>(shape),
          std::make_shared<SymmetricPolytope>(random_normals(6, 3, rng), Eigen::VectorXd::Constant(6, 1.2)),
          scale(std::make_shared<L2Ball>(3, 1.0), 1.7)};
}

}  // namespace

TEST(ConvexBody, MembershipSymmetricAndConvex) {
  RngStream rng(1, 0);
  for (const auto& body : sample_bodies()) {
    for (int i = 0; i < 2000; ++i) {
      const Eigen::VectorXd x = gaussian_vector(3, rng, 1.5);
      const Eigen::VectorXd z = gaussian_vector(3, rng, 1.5);
      ASSERT_EQ(body->contains(x), body->contains(-x)) << body->describe();
      if (body->contains(x) && body->contains(z)) ASSERT_TRUE(body->contains(0.5 * (x + z))) << body->describe();
    }
  }
}

TEST(ConvexBody, GaugeIsConsistentWithMembership) {
  RngStream rng(2, 0);
  for (const auto& body : sample_bodies()) {
    for (int i = 0; i < 500; ++i) {
      const Eigen::VectorXd x = gaussian_vector(3, rng, 2.0);
      const double g = body->gauge(x);
      EXPECT_NEAR(body->gauge(2.5 * x), 2.5 * g, 1e-12 * (1.0 + g));
      if (std::abs(g - 1.0) > 1e-6) EXPECT_EQ(body->contains(x), g <= 1.0) << body->describe();
      EXPECT_TRUE(body->contains(x / g * (1.0 - 1e-12)));
    }
  }
}

TEST(ConvexBody, ProjectionProperties) {
  RngStream rng(3, 0);
  for (const auto& body : sample_bodies()) {
    std::vector<Eigen::VectorXd> inside;
    while (inside.size() < 50) {
      const Eigen::VectorXd k = gaussian_vector(3, rng);
      if (body->contains(k)) inside.push_back(k);
    }
    for (int i = 0; i < 300; ++i) {
      const Eigen::VectorXd x = gaussian_vector(3, rng, 3.0);
      const Eigen::VectorXd p = body->project(x);
      ASSERT_TRUE(body->contains(p)) << body->describe();
      EXPECT_TRUE(body->project(p).isApprox(p, 1e-9));
      EXPECT_EQ(body->distance(x) == 0.0, body->contains(x));
      EXPECT_NEAR(body->distance(x), (x - p).norm(), 1e-12);
      for (const auto& k : inside) {
        // Variational inequality of the Euclidean projection.
        ASSERT_LE((x - p).dot(k - p), 1e-8 * (1.0 + x.squaredNorm())) << body->describe();
        ASSERT_LE((x - p).norm(), (x - k).norm() + 1e-9);
      }
    }
  }
}

TEST(ConvexBody, DistanceIsOneLipschitz) {
  RngStream rng(4, 0);
  for (const auto& body : sample_bodies()) {
    for (int i = 0; i < 500; ++i) {
      const Eigen::VectorXd x = gaussian_vector(3, rng, 4.0);
      const Eigen::VectorXd y = x + gaussian_vector(3, rng, 0.3);
      EXPECT_LE(std::abs(body->distance(x) - body->distance(y)), (x - y).norm() + 1e-9);
    }
  }
}

TEST(ConvexBody, InradiusBallIsInsideAndTight) {
  RngStream rng(5, 0);
  for (const auto& body : sample_bodies()) {
    const double r = body->inradius();
    double min_boundary = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20000; ++i) {
      const Eigen::VectorXd u = gaussian_vector(3, rng).normalized();
      ASSERT_TRUE(body->contains(r * (1.0 - 1e-12) * u)) << body->describe();
      min_boundary = std::min(min_boundary, 1.0 / body->gauge(u));
    }
    EXPECT_GE(min_boundary, r * (1.0 - 1e-12));
    EXPECT_LE(min_boundary, r * 1.05) << body->describe();
  }
}

TEST(L2Ball, ReferenceValues) {
  const L2Ball ball(3, 2.0);
  EXPECT_TRUE(ball.project(Eigen::Vector3d(3.0, 4.0, 0.0)).isApprox(Eigen::Vector3d(1.2, 1.6, 0.0)));
  EXPECT_DOUBLE_EQ(ball.distance(Eigen::Vector3d(3.0, 4.0, 0.0)), 3.0);
  EXPECT_EQ(ball.distance(Eigen::Vector3d(1.0, 1.0, 1.0)), 0.0);
  EXPECT_THROW(L2Ball(3, -1.0), PreconditionError);
  EXPECT_THROW(ball.contains(Eigen::Vector2d(0.0, 0.0)), DimensionError);
}

TEST(LpBall, L1ProjectionMatchesThresholdBisection) {
  RngStream rng(6, 0);
  for (Eigen::Index d : {2, 5, 9}) {
    const LpBall ball(static_cast<std::size_t>(d), LpBall::Norm::L1, 1.3);
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd y = gaussian_vector(d, rng, 2.0);
      EXPECT_LT((ball.project(y) - bisect_l1_projection(y, 1.3)).norm(), 1e-12);
    }
  }
}

TEST(LpBall, BoxProjectionClamps) {
  const LpBall box(2, LpBall::Norm::LInf, 1.0);
  EXPECT_TRUE(box.project(Eigen::Vector2d(3.0, -0.5)).isApprox(Eigen::Vector2d(1.0, -0.5)));
  EXPECT_DOUBLE_EQ(box.distance(Eigen::Vector2d(4.0, 5.0)), 5.0);
}

TEST(Ellipsoid, ProjectionMatchesAngleSearch) {
  Eigen::Matrix2d shape;
  shape << 1.0 / 9.0, 0.05, 0.05, 1.0;
  const Ellipsoid ellipse(shape);
  RngStream rng(7, 0);
  for (int i = 0; i < 40; ++i) {
    Eigen::Vector2d y(4.0 * rng.normal(), 2.0 * rng.normal());
    if (ellipse.contains(y)) continue;
    EXPECT_LT((ellipse.project(y) - ellipse_projection(shape, y)).norm(), 1e-7);
  }
}

TEST(Ellipsoid, InradiusIsShortestSemiAxis) {
  Eigen::Matrix3d shape = Eigen::Vector3d(1.0 / 4.0, 1.0 / 9.0, 1.0).asDiagonal();
  EXPECT_NEAR(Ellipsoid(shape).inradius(), 1.0, 1e-14);
}

TEST(Polytope, ProjectionMatchesActiveSetEnumeration) {
  RngStream rng(8, 0);
  for (Eigen::Index d : {2, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::Index m = 3 + trial % 3;
      const Eigen::MatrixXd a = random_normals(m, d, rng);
      Eigen::VectorXd b(m);
      for (Eigen::Index i = 0; i < m; ++i) b[i] = 0.5 + rng.uniform();
      const SymmetricPolytope poly(a, b);
      for (int i = 0; i < 60; ++i) {
        const Eigen::VectorXd y = gaussian_vector(d, rng, 3.0);
        const Eigen::VectorXd exact = enumerate_projection(a, b, y);
        ASSERT_LT((poly.project(y) - exact).norm(), 1e-9) << "d=" << d << " m=" << m;
      }
    }
  }
}

TEST(Polytope, ProjectionIsExactFarFromBody) {
  RngStream rng(18, 0);
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::MatrixXd a = random_normals(6, 3, rng);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(6);
    const SymmetricPolytope poly(a, b);
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd y = gaussian_vector(3, rng, 60.0);
      const Eigen::VectorXd x = poly.project(y);
      ASSERT_LE(((a * x).cwiseAbs() - b).maxCoeff(), 1e-10);
      const Eigen::VectorXd e = enumerate_projection(a, b, y);
      ASSERT_LT((x - e).norm(), 1e-9 * y.norm()) << (x - y).norm() << " vs " << (e - y).norm() << " viol_e "
                                                 << ((a * e).cwiseAbs() - b).maxCoeff();
    }
  }
}

TEST(Polytope, DykstraWithoutPolishConverges) {
  RngStream rng(9, 0);
  const Eigen::MatrixXd a = random_normals(4, 3, rng);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(4, 1.0);
  const SymmetricPolytope poly(a, b);
  const Eigen::VectorXd y = Eigen::Vector3d(3.0, -2.0, 4.0);
  const DykstraResult r = dykstra_project(poly, y, 1e-10);
  EXPECT_LT((r.point - enumerate_projection(a, b, y)).norm(), 1e-8);
}

TEST(Polytope, ConvergenceFailureCarriesIterate) {
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 0.0, 1.0, 1e-3, 0.0, 1.0;
  const SymmetricPolytope poly(a, Eigen::Vector3d(1.0, 1.0, 1.0));
  try {
    dykstra_project(poly, Eigen::Vector2d(50.0, 80.0), 1e-14, 1);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.last_iterate().size(), 2);
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(Polytope, RejectsDegenerateInput) {
  Eigen::MatrixXd zero_row(2, 2);
  zero_row << 1.0, 0.0, 0.0, 0.0;
  EXPECT_THROW(SymmetricPolytope(zero_row, Eigen::Vector2d(1.0, 1.0)), PreconditionError);
  EXPECT_THROW(SymmetricPolytope(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1.0, -1.0)), PreconditionError);
  Eigen::MatrixXd flat(2, 2);
  flat << 1.0, 1.0, 2.0, 2.0;
  EXPECT_THROW(SymmetricPolytope(flat, Eigen::Vector2d(1.0, 1.0)), PreconditionError);
}

TEST(Scaling, FoldsAndValidates) {
  const BodyPtr ball = std::make_shared<L2Ball>(2, 1.0);
  const BodyPtr twice = scale(scale(ball, 2.0), 3.0);
  const auto* scaled = dynamic_cast<const ScaledBody*>(twice.get());
  ASSERT_NE(scaled, nullptr);
  EXPECT_DOUBLE_EQ(scaled->factor(), 6.0);
  EXPECT_EQ(scaled->inner(), ball);
  EXPECT_DOUBLE_EQ(twice->inradius(), 6.0);
  EXPECT_TRUE(twice->contains(Eigen::Vector2d(5.9, 0.0)));
  EXPECT_FALSE(twice->contains(Eigen::Vector2d(6.1, 0.0)));
  EXPECT_THROW(scale(ball, 0.0), DomainError);
  EXPECT_THROW(scale(ball, -1.0), DomainError);
}

TEST(MassBound, ExactForBallAndBox) {
  const L2Ball ball(3, 2.0);
  EXPECT_TRUE(ball.gaussian_mass_outside().exact);
  EXPECT_NEAR(ball.gaussian_mass_outside().value, special::chi_square_survival(3.0, 4.0), 1e-16);
  const LpBall box(4, LpBall::Norm::LInf, 2.0);
  const double slab = 1.0 - 2.0 * special::normal_upper_tail(2.0);
  EXPECT_TRUE(box.gaussian_mass_outside().exact);
  EXPECT_NEAR(box.gaussian_mass_outside().value, 1.0 - std::pow(slab, 4), 1e-15);
  const SymmetricPolytope axis(Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Constant(4, 2.0));
  EXPECT_TRUE(axis.gaussian_mass_outside().exact);
  EXPECT_NEAR(axis.gaussian_mass_outside().value, box.gaussian_mass_outside().value, 1e-15);
}

TEST(MassBound, UpperBoundsMonteCarlo) {
  RngStream rng(10, 0);
  for (const auto& body : sample_bodies()) {
    const MassBound bound = body->gaussian_mass_outside();
    int outside = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) outside += !body->contains(gaussian_vector(3, rng));
    const double p = static_cast<double>(outside) / n;
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-6) / n);
    if (bound.exact) EXPECT_NEAR(p, bound.value, 5.0 * se) << body->describe();
    else EXPECT_GE(bound.value, p - 5.0 * se) << body->describe();
  }
}

TEST(MassBound, ScaleToOuterMassHitsTarget) {
  RngStream rng(11, 0);
  const BodyPtr poly = std::make_shared<SymmetricPolytope>(random_normals(6, 3, rng), Eigen::VectorXd::Ones(6));
  for (double target : {0.02, 0.01, 0.001}) {
    const BodyPtr scaled = scale_to_outer_mass(poly, target);
    EXPECT_LE(scaled->gaussian_mass_outside().value, target);
    EXPECT_GT(scale(scaled, 1.0 - 1e-9)->gaussian_mass_outside().value, target);
  }
  const BodyPtr box = scale_to_outer_mass(std::make_shared<LpBall>(3, LpBall::Norm::LInf, 1.0), 0.01);
  EXPECT_NEAR(box->gaussian_mass_outside().value, 0.01, 1e-12);
}

TEST(Pullback, MembershipCommutesWithFactor) {
  RngStream rng(12, 0);
  Eigen::Matrix3d cov;
  cov << 2.0, 0.4, -0.2, 0.4, 1.0, 0.1, -0.2, 0.1, 0.7;
  const Eigen::MatrixXd l = whiten(cov).cov_factor();
  for (const auto& body : sample_bodies()) {
    const BodyPtr pulled = body->pullback(l);
    for (int i = 0; i < 2000; ++i) {
      const Eigen::VectorXd z = gaussian_vector(3, rng);
      const Eigen::VectorXd x = l * z;
      if (std::abs(body->gauge(x) - 1.0) < 1e-6) continue;
      ASSERT_EQ(pulled->contains(z), body->contains(x)) << body->describe();
      ASSERT_NEAR(pulled->gauge(z), body->gauge(x), 1e-10 * (1.0 + body->gauge(x))) << body->describe();
    }
  }
}

TEST(Pullback, IdentityKeepsType) {
  const L2Ball ball(2, 1.0);
  EXPECT_NE(dynamic_cast<const L2Ball*>(ball.pullback(Eigen::Matrix2d::Identity()).get()), nullptr);
}
