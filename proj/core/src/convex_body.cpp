#include "gbsplit/convex_body.hpp"

#include "gbsplit/error.hpp"
#include "gbsplit/special.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace gbsplit {

namespace {

bool is_identity(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.rows() == m.cols() && m.isIdentity(0.0);
}

void require_square_factor(const Eigen::Ref<const Eigen::MatrixXd>& factor, std::size_t dim) {
  if (static_cast<std::size_t>(factor.rows()) != dim || factor.rows() != factor.cols())
    throw DimensionError(dim, static_cast<std::size_t>(factor.rows()));
}

// -expm1(d log1p(-p)) = 1 - (1 - p)^d without cancellation for small p.
double complement_power(double p, double d) { return -std::expm1(d * std::log1p(-p)); }

}  // namespace

// ---------------------------------------------------------------------------

ConvexBody::ConvexBody(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw PreconditionError("convex body dimension must be positive");
}

void ConvexBody::check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionError(dim_, static_cast<std::size_t>(x.size()));
}

bool ConvexBody::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dim(x);
  return contains_impl(x);
}

Eigen::VectorXd ConvexBody::project(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dim(x);
  if (contains_impl(x)) return x;
  return project_impl(x);
}

double ConvexBody::distance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dim(x);
  if (contains_impl(x)) return 0.0;
  return (x - project_impl(x)).norm();
}

double ConvexBody::gauge(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dim(x);
  return gauge_impl(x);
}

// --- L2Ball ----------------------------------------------------------------

L2Ball::L2Ball(std::size_t dim, double radius) : ConvexBody(dim), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("L2Ball radius must be positive");
}

bool L2Ball::contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return x.norm() - radius_ <= kMembershipTolerance;
}

Eigen::VectorXd L2Ball::project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double norm = x.norm();
  if (norm <= radius_) return x;
  return (radius_ / norm) * x;
}

double L2Ball::gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const { return x.norm() / radius_; }

MassBound L2Ball::gaussian_mass_outside(double s) const {
  const double r = s * radius_;
  return {special::chi_square_survival(static_cast<double>(dim()), r * r), true};
}

BodyPtr L2Ball::pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const {
  require_square_factor(factor, dim());
  if (is_identity(factor)) return std::make_shared<L2Ball>(*this);
  return std::make_shared<Ellipsoid>(factor.transpose() * factor / (radius_ * radius_));
}

std::string L2Ball::describe() const {
  std::ostringstream os;
  os << "L2Ball(d=" << dim() << ", r=" << radius_ << ")";
  return os.str();
}

// --- LpBall ----------------------------------------------------------------

LpBall::LpBall(std::size_t dim, Norm norm, double radius) : ConvexBody(dim), norm_(norm), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("LpBall radius must be positive");
}

double LpBall::inradius() const {
  return norm_ == Norm::LInf ? radius_ : radius_ / std::sqrt(static_cast<double>(dim()));
}

bool LpBall::contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double value = norm_ == Norm::LInf ? x.lpNorm<Eigen::Infinity>() : x.lpNorm<1>();
  return value - radius_ <= kMembershipTolerance;
}

double LpBall::gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return (norm_ == Norm::LInf ? x.lpNorm<Eigen::Infinity>() : x.lpNorm<1>()) / radius_;
}

Eigen::VectorXd LpBall::project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (norm_ == Norm::LInf) return x.cwiseMax(-radius_).cwiseMin(radius_);

  // Sort-based soft threshold onto the l1 sphere.
  const Eigen::VectorXd magnitude = x.cwiseAbs();
  if (magnitude.sum() <= radius_) return x;
  std::vector<double> sorted(magnitude.data(), magnitude.data() + magnitude.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    running += sorted[j];
    const double candidate = (running - radius_) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) threshold = candidate;
  }
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[i] = std::copysign(std::max(magnitude[i] - threshold, 0.0), x[i]);
  return out;
}

MassBound LpBall::gaussian_mass_outside(double s) const {
  const double d = static_cast<double>(dim());
  const double r = s * radius_;
  if (norm_ == Norm::LInf) return {complement_power(2.0 * special::normal_upper_tail(r), d), true};
  if (dim() == 1) return {2.0 * special::normal_upper_tail(r), true};
  // Union over the 2^{d-1} facet slabs |<s, x>| <= r (|s| = sqrt d), or the inscribed ball.
  const double union_bound = std::ldexp(2.0 * special::normal_upper_tail(r / std::sqrt(d)), static_cast<int>(dim()) - 1);
  const double ball_bound = special::chi_square_survival(d, r * r / d);
  return {std::min({1.0, union_bound, ball_bound}), false};
}

BodyPtr LpBall::pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const {
  require_square_factor(factor, dim());
  if (is_identity(factor)) return std::make_shared<LpBall>(*this);
  const auto d = static_cast<Eigen::Index>(dim());
  if (norm_ == Norm::LInf) {
    return std::make_shared<SymmetricPolytope>(factor, Eigen::VectorXd::Constant(d, radius_));
  }
  if (dim() > 16) throw PreconditionError("l1 ball pullback supports d <= 16 (2^{d-1} facet slabs)");
  const Eigen::Index facets = Eigen::Index{1} << (d - 1);
  Eigen::MatrixXd normals(facets, d);
  for (Eigen::Index mask = 0; mask < facets; ++mask) {
    Eigen::RowVectorXd signs = Eigen::RowVectorXd::Ones(d);
    for (Eigen::Index i = 1; i < d; ++i)
      if ((mask >> (i - 1)) & 1) signs[i] = -1.0;
    normals.row(mask) = signs * factor;
  }
  return std::make_shared<SymmetricPolytope>(std::move(normals), Eigen::VectorXd::Constant(facets, radius_));
}

std::string LpBall::describe() const {
  std::ostringstream os;
  os << (norm_ == Norm::LInf ? "LInfBall" : "L1Ball") << "(d=" << dim() << ", r=" << radius_ << ")";
  return os.str();
}

// --- Ellipsoid -------------------------------------------------------------

Ellipsoid::Ellipsoid(Eigen::MatrixXd shape)
    : ConvexBody(static_cast<std::size_t>(shape.rows())), shape_(std::move(shape)) {
  if (shape_.rows() != shape_.cols()) throw PreconditionError("ellipsoid shape must be square");
  const double scale = shape_.cwiseAbs().maxCoeff();
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw PreconditionError("ellipsoid shape must be symmetric");
  shape_ = 0.5 * (shape_ + shape_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(shape_);
  eigvals_ = eig.eigenvalues();
  eigvecs_ = eig.eigenvectors();
  if (!(eigvals_.minCoeff() > 0.0)) throw PreconditionError("ellipsoid shape must be positive definite");
}

double Ellipsoid::inradius() const { return 1.0 / std::sqrt(eigvals_.maxCoeff()); }

bool Ellipsoid::contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return gauge_impl(x) - 1.0 <= kMembershipTolerance;
}

double Ellipsoid::gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::sqrt(std::max(0.0, x.dot(shape_ * x)));
}

Eigen::VectorXd Ellipsoid::project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  // P(x) = (I + m A)^{-1} x with m >= 0 the root of the decreasing convex
  // secular function phi(m) = sum_i a_i y_i^2 / (1 + m a_i)^2 - 1.
  const Eigen::VectorXd y = eigvecs_.transpose() * x;
  const Eigen::ArrayXd a = eigvals_.array();
  const Eigen::ArrayXd y2 = y.array().square();
  auto phi = [&](double m) { return (a * y2 / (1.0 + m * a).square()).sum() - 1.0; };
  auto dphi = [&](double m) { return (-2.0 * a.square() * y2 / (1.0 + m * a).cube()).sum(); };

  if (phi(0.0) <= 0.0) return x;
  double lo = 0.0;
  double hi = y.norm() / std::sqrt(a.minCoeff());
  double m = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double value = phi(m);
    if (value > 0.0) lo = m; else hi = m;
    if (value == 0.0 || hi - lo <= 1e-16 * std::max(1.0, hi)) break;
    double next = m - value / dphi(m);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - m) <= 1e-16 * std::max(1.0, m)) {
      m = next;
      break;
    }
    m = next;
  }
  const Eigen::VectorXd projected_eig = (y.array() / (1.0 + m * a)).matrix();
  return eigvecs_ * projected_eig;
}

MassBound Ellipsoid::gaussian_mass_outside(double s) const {
  const double r = s * inradius();
  const bool round = eigvals_.maxCoeff() - eigvals_.minCoeff() <= 1e-14 * eigvals_.maxCoeff();
  return {special::chi_square_survival(static_cast<double>(dim()), r * r), round};
}

BodyPtr Ellipsoid::pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const {
  require_square_factor(factor, dim());
  if (is_identity(factor)) return std::make_shared<Ellipsoid>(*this);
  return std::make_shared<Ellipsoid>(factor.transpose() * shape_ * factor);
}

std::string Ellipsoid::describe() const {
  std::ostringstream os;
  os << "Ellipsoid(d=" << dim() << ", inradius=" << inradius() << ")";
  return os.str();
}

// --- SymmetricPolytope -----------------------------------------------------

SymmetricPolytope::SymmetricPolytope(Eigen::MatrixXd normals, Eigen::VectorXd bounds)
    : ConvexBody(static_cast<std::size_t>(normals.cols())), normals_(std::move(normals)), bounds_(std::move(bounds)) {
  if (normals_.rows() == 0) throw PreconditionError("polytope needs at least one slab");
  if (bounds_.size() != normals_.rows()) throw PreconditionError("polytope needs one bound per slab");
  row_norms_ = normals_.rowwise().norm();
  for (Eigen::Index i = 0; i < normals_.rows(); ++i) {
    if (!(row_norms_[i] > 0.0)) throw PreconditionError("polytope slab normal " + std::to_string(i) + " is zero");
    if (!(bounds_[i] > 0.0)) throw PreconditionError("polytope slab bound " + std::to_string(i) + " must be positive");
  }
  // Bounded iff the normals span R^d.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normals_);
  if (static_cast<std::size_t>(lu.rank()) < dim()) throw PreconditionError("polytope slabs do not bound a compact body");
}

double SymmetricPolytope::inradius() const { return (bounds_.array() / row_norms_.array()).minCoeff(); }

bool SymmetricPolytope::contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::ArrayXd excess = ((normals_ * x).array().abs() - bounds_.array()) / row_norms_.array();
  return excess.maxCoeff() <= kMembershipTolerance;
}

double SymmetricPolytope::gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return ((normals_ * x).array().abs() / bounds_.array()).maxCoeff();
}

Eigen::VectorXd SymmetricPolytope::project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return dykstra_project(*this, x).point;
}

MassBound SymmetricPolytope::gaussian_mass_outside(double s) const {
  const Eigen::ArrayXd widths = s * bounds_.array() / row_norms_.array();
  Eigen::ArrayXd slab_tail(widths.size());
  for (Eigen::Index i = 0; i < widths.size(); ++i) slab_tail[i] = 2.0 * special::normal_upper_tail(widths[i]);

  const Eigen::MatrixXd unit = row_norms_.asDiagonal().inverse() * normals_;
  const Eigen::MatrixXd gram = unit * unit.transpose();
  const bool orthogonal = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-14;
  if (orthogonal) {
    // Independent coordinates: P(inside) is the product of slab masses.
    double log_inside = 0.0;
    for (Eigen::Index i = 0; i < slab_tail.size(); ++i) log_inside += std::log1p(-slab_tail[i]);
    return {-std::expm1(log_inside), true};
  }
  const double r = s * inradius();
  const double ball_bound = special::chi_square_survival(static_cast<double>(dim()), r * r);
  return {std::min({1.0, slab_tail.sum(), ball_bound}), false};
}

BodyPtr SymmetricPolytope::pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const {
  require_square_factor(factor, dim());
  if (is_identity(factor)) return std::make_shared<SymmetricPolytope>(*this);
  return std::make_shared<SymmetricPolytope>(normals_ * factor, bounds_);
}

std::string SymmetricPolytope::describe() const {
  std::ostringstream os;
  os << "SymmetricPolytope(d=" << dim() << ", slabs=" << slab_count() << ", inradius=" << inradius() << ")";
  return os.str();
}

// --- ScaledBody ------------------------------------------------------------

ScaledBody::ScaledBody(BodyPtr inner, double factor)
    : ConvexBody(inner ? inner->dim() : 0), inner_(std::move(inner)), factor_(factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("scale factor must be positive");
}

bool ScaledBody::contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return inner_->contains(x / factor_);
}

Eigen::VectorXd ScaledBody::project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return factor_ * inner_->project(x / factor_);
}

double ScaledBody::gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return inner_->gauge(x) / factor_;
}

MassBound ScaledBody::gaussian_mass_outside(double s) const { return inner_->gaussian_mass_outside(s * factor_); }

BodyPtr ScaledBody::pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const {
  return scale(inner_->pullback(factor), factor_);
}

std::string ScaledBody::describe() const {
  std::ostringstream os;
  os << factor_ << " * " << inner_->describe();
  return os.str();
}

BodyPtr scale(const BodyPtr& body, double t) {
  if (!body) throw PreconditionError("scale: null body");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("scale factor must be positive");
  if (const auto* scaled = dynamic_cast<const ScaledBody*>(body.get()))
    return std::make_shared<ScaledBody>(scaled->inner(), scaled->factor() * t);
  return std::make_shared<ScaledBody>(body, t);
}

BodyPtr scale_to_outer_mass(const BodyPtr& body, double target) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("target outer mass must lie in (0,1)");
  auto mass = [&](double s) { return body->gaussian_mass_outside(s).value; };
  double hi = 1.0;
  while (mass(hi) > target) hi *= 2.0;
  double lo = hi;
  while (mass(lo) <= target && lo > 1e-12) lo *= 0.5;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (mass(mid) <= target) hi = mid; else lo = mid;
  }
  return scale(body, hi);
}

// --- Dykstra ---------------------------------------------------------------

Eigen::VectorXd project_onto_slab(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& normal, double bound) {
  const double value = normal.dot(x);
  if (value > bound) return x - ((value - bound) / normal.squaredNorm()) * normal;
  if (value < -bound) return x - ((value + bound) / normal.squaredNorm()) * normal;
  return x;
}

namespace {

// Solve the projection restricted to the given active slabs (as equalities with
// the given signs) and accept it only if it satisfies the KKT conditions of the
// full problem.
bool polish_active_set(const SymmetricPolytope& polytope, const Eigen::Ref<const Eigen::VectorXd>& y,
                       const std::vector<Eigen::Index>& active, const std::vector<double>& signs,
                       Eigen::VectorXd& out) {
  if (active.empty()) return false;
  const auto k = static_cast<Eigen::Index>(active.size());
  const auto d = static_cast<Eigen::Index>(polytope.dim());
  Eigen::MatrixXd rows(k, d);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    rows.row(i) = signs[static_cast<std::size_t>(i)] * polytope.normals().row(active[static_cast<std::size_t>(i)]);
    rhs[i] = polytope.bounds()[active[static_cast<std::size_t>(i)]];
  }
  // x = y - rows^T lambda, rows x = rhs  =>  (rows rows^T) lambda = rows y - rhs.
  const Eigen::MatrixXd gram = rows * rows.transpose();
  const Eigen::VectorXd lambda = gram.completeOrthogonalDecomposition().solve(rows * y - rhs);
  const Eigen::VectorXd x = y - rows.transpose() * lambda;

  const double scale = std::max(1.0, y.norm());
  if ((rows * x - rhs).cwiseAbs().maxCoeff() > 1e-11 * scale) return false;
  if (lambda.minCoeff() < -1e-12 * scale) return false;
  const Eigen::ArrayXd excess = (polytope.normals() * x).array().abs() - polytope.bounds().array();
  if ((excess / polytope.normals().rowwise().norm().array()).maxCoeff() > 1e-12 * scale) return false;
  out = x;
  return true;
}

bool try_polish(const SymmetricPolytope& polytope, const Eigen::Ref<const Eigen::VectorXd>& y,
                const Eigen::VectorXd& iterate, const std::vector<Eigen::VectorXd>& increments,
                Eigen::VectorXd& out) {
  const Eigen::VectorXd values = polytope.normals() * iterate;
  const Eigen::VectorXd norms = polytope.normals().rowwise().norm();
  std::vector<Eigen::Index> by_increment;
  std::vector<Eigen::Index> by_value;
  std::vector<double> sign_increment;
  std::vector<double> sign_value;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double sign = values[i] >= 0.0 ? 1.0 : -1.0;
    if (increments[static_cast<std::size_t>(i)].norm() > 1e-14 * std::max(1.0, y.norm())) {
      by_increment.push_back(i);
      sign_increment.push_back(sign);
    }
    if (std::abs(values[i]) >= polytope.bounds()[i] - 1e-7 * norms[i] * std::max(1.0, y.norm())) {
      by_value.push_back(i);
      sign_value.push_back(sign);
    }
  }
  return polish_active_set(polytope, y, by_increment, sign_increment, out) ||
         (by_value != by_increment && polish_active_set(polytope, y, by_value, sign_value, out));
}

bool try_polish_subsets(const SymmetricPolytope& polytope, const Eigen::Ref<const Eigen::VectorXd>& y,
                        const Eigen::VectorXd& iterate, Eigen::VectorXd& out) {
  const Eigen::VectorXd values = polytope.normals() * iterate;
  const Eigen::VectorXd norms = polytope.normals().rowwise().norm();
  // Degenerate vertex or slow progress between nearly parallel faces: try
  // every subset of at most dim faces near the iterate. The KKT test decides.
  std::vector<Eigen::Index> near;
  std::vector<double> near_sign;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) >= polytope.bounds()[i] - 1e-2 * norms[i] * std::max(1.0, y.norm())) {
      near.push_back(i);
      near_sign.push_back(values[i] >= 0.0 ? 1.0 : -1.0);
    }
  }
  const std::size_t k = near.size();
  if (k > 12) return false;
  for (std::size_t size = 1; size <= std::min(k, polytope.dim()); ++size) {
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != size) continue;
      std::vector<Eigen::Index> active;
      std::vector<double> signs;
      for (std::size_t j = 0; j < k; ++j) {
        if (mask & (1u << j)) {
          active.push_back(near[j]);
          signs.push_back(near_sign[j]);
        }
      }
      if (polish_active_set(polytope, y, active, signs, out)) return true;
    }
  }
  return false;
}

// The increments q_i = u_i a_i are dual variables, so y - sum q_i together with
// u gives a dual bound. Scaling that point into K gives a feasible p, and
// strong convexity gives |p - P(y)|^2 <= 2 (f(p) - dual).
double certified_error(const SymmetricPolytope& polytope, const Eigen::Ref<const Eigen::VectorXd>& y,
                       const std::vector<Eigen::VectorXd>& increments, Eigen::VectorXd& feasible) {
  const Eigen::MatrixXd& a = polytope.normals();
  const Eigen::VectorXd& b = polytope.bounds();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(y.size());
  for (const auto& q : increments) sum += q;
  const Eigen::VectorXd x = y - sum;
  const Eigen::VectorXd values = a * x;
  double gap = 0.0;
  double worst = 1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double u = a.row(i).dot(increments[static_cast<std::size_t>(i)]) / a.row(i).squaredNorm();
    gap += std::abs(u) * b[i] - u * values[i];
    worst = std::max(worst, std::abs(values[i]) / b[i]);
  }
  feasible = x / worst;
  gap += (feasible - x).dot(0.5 * (feasible + x) - y);
  return std::sqrt(2.0 * std::max(gap, 0.0));
}

}  // namespace

DykstraResult dykstra_project(const SymmetricPolytope& polytope, const Eigen::Ref<const Eigen::VectorXd>& x,
                              double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw DomainError("dykstra tolerance must be positive");
  if (static_cast<std::size_t>(x.size()) != polytope.dim()) throw DimensionError(polytope.dim(), x.size());

  const auto slabs = static_cast<std::size_t>(polytope.normals().rows());
  DykstraResult result;
  result.point = x;
  if (polytope.contains(x)) return result;

  std::vector<Eigen::VectorXd> increments(slabs, Eigen::VectorXd::Zero(x.size()));
  Eigen::VectorXd iterate = x;
  double polish_gate = 1e-4;
  double subset_gate = 1e-6;
  for (std::size_t sweep = 1; sweep <= max_iter; ++sweep) {
    const Eigen::VectorXd previous = iterate;
    for (std::size_t i = 0; i < slabs; ++i) {
      const Eigen::VectorXd shifted = iterate + increments[i];
      iterate = project_onto_slab(shifted, polytope.normals().row(static_cast<Eigen::Index>(i)).transpose(),
                                  polytope.bounds()[static_cast<Eigen::Index>(i)]);
      increments[i] = shifted - iterate;
    }
    const double change = (iterate - previous).norm();
    result.sweeps = sweep;
    result.residual = change;

    // The change can plateau above a shrunken gate, so retry periodically too.
    if (change <= polish_gate || slabs == 1 || sweep % 32 == 0) {
      Eigen::VectorXd polished;
      if (try_polish(polytope, x, iterate, increments, polished)) {
        result.point = polished;
        result.polished = true;
        result.residual = 0.0;
        return result;
      }
      polish_gate = change * 0.1;
    }
    if (change <= subset_gate || sweep % 256 == 0) {
      Eigen::VectorXd polished;
      if (try_polish_subsets(polytope, x, iterate, polished)) {
        result.point = polished;
        result.polished = true;
        result.residual = 0.0;
        return result;
      }
      subset_gate = change * 1e-2;
    }
    // A small change per sweep does not bound the error; the duality gap does.
    Eigen::VectorXd feasible;
    const double bound = certified_error(polytope, x, increments, feasible);
    if (bound <= tol) {
      result.point = feasible;
      result.residual = bound;
      return result;
    }
  }
  throw ConvergenceError("Dykstra projection exceeded " + std::to_string(max_iter) + " sweeps", iterate,
                         result.residual);
}

}  // namespace gbsplit
