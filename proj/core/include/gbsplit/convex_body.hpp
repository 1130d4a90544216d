#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace gbsplit {

/// Boundary tolerance for membership tests.
inline constexpr double kMembershipTolerance = 1e-9;

inline constexpr double kDykstraTolerance = 1e-10;
inline constexpr std::size_t kDykstraMaxIter = 100000;

/// Upper bound on the standard normal mass outside a body; `exact` when the
/// value is the true mass rather than a bound.
struct MassBound {
  double value = 1.0;
  bool exact = false;
};

class ConvexBody;
using BodyPtr = std::shared_ptr<const ConvexBody>;

/// Origin-symmetric closed convex body in R^d with non-empty interior.
///
/// The public members validate dimensions and delegate to the variant. All
/// oracles are const and hold no mutable state, so a body can be shared
/// across threads.
class ConvexBody {
 public:
  virtual ~ConvexBody() = default;

  std::size_t dim() const noexcept { return dim_; }

  /// x in K, with the boundary (and a 1e-9 band around it) counted as inside.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Euclidean projection P(x) onto K.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// d(x, K) = |x - P(x)|; exactly zero iff contains(x).
  double distance(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Minkowski functional inf{t > 0 : x in tK}.
  double gauge(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Largest r with the centered Euclidean ball B(r) inside K (exact per variant).
  virtual double inradius() const = 0;

  /// Bound on N(0, I)((s K)^c).
  virtual MassBound gaussian_mass_outside(double s = 1.0) const = 0;

  /// The body {z : L z in K} for a lower-triangular whitening factor L.
  virtual BodyPtr pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const = 0;

  virtual std::string describe() const = 0;

 protected:
  explicit ConvexBody(std::size_t dim);
  void check_dim(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  virtual bool contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual Eigen::VectorXd project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual double gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;

 private:
  std::size_t dim_;
};

class L2Ball final : public ConvexBody {
 public:
  L2Ball(std::size_t dim, double radius);
  double radius() const noexcept { return radius_; }

  double inradius() const override { return radius_; }
  MassBound gaussian_mass_outside(double s = 1.0) const override;
  BodyPtr pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const override;
  std::string describe() const override;

 protected:
  bool contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::VectorXd project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  double gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  double radius_;
};

/// l_p ball of radius r for p in {1, infinity}.
class LpBall final : public ConvexBody {
 public:
  enum class Norm { L1, LInf };

  LpBall(std::size_t dim, Norm norm, double radius);
  Norm norm() const noexcept { return norm_; }
  double radius() const noexcept { return radius_; }

  double inradius() const override;
  MassBound gaussian_mass_outside(double s = 1.0) const override;
  BodyPtr pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const override;
  std::string describe() const override;

 protected:
  bool contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::VectorXd project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  double gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  Norm norm_;
  double radius_;
};

/// {x : x^T A x <= 1} for SPD A.
class Ellipsoid final : public ConvexBody {
 public:
  explicit Ellipsoid(Eigen::MatrixXd shape);
  const Eigen::MatrixXd& shape() const noexcept { return shape_; }

  double inradius() const override;
  MassBound gaussian_mass_outside(double s = 1.0) const override;
  BodyPtr pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const override;
  std::string describe() const override;

 protected:
  bool contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::VectorXd project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  double gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  Eigen::MatrixXd shape_;
  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_;
};

/// Intersection of symmetric slabs {x : |<a_i, x>| <= b_i}; rows of `normals` are the a_i.
class SymmetricPolytope final : public ConvexBody {
 public:
  SymmetricPolytope(Eigen::MatrixXd normals, Eigen::VectorXd bounds);
  const Eigen::MatrixXd& normals() const noexcept { return normals_; }
  const Eigen::VectorXd& bounds() const noexcept { return bounds_; }
  std::size_t slab_count() const noexcept { return static_cast<std::size_t>(normals_.rows()); }

  double inradius() const override;
  MassBound gaussian_mass_outside(double s = 1.0) const override;
  BodyPtr pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const override;
  std::string describe() const override;

 protected:
  bool contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::VectorXd project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  double gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  Eigen::MatrixXd normals_;
  Eigen::VectorXd bounds_;
  Eigen::VectorXd row_norms_;
};

/// t K.
class ScaledBody final : public ConvexBody {
 public:
  ScaledBody(BodyPtr inner, double factor);
  const BodyPtr& inner() const noexcept { return inner_; }
  double factor() const noexcept { return factor_; }

  double inradius() const override { return factor_ * inner_->inradius(); }
  MassBound gaussian_mass_outside(double s = 1.0) const override;
  BodyPtr pullback(const Eigen::Ref<const Eigen::MatrixXd>& factor) const override;
  std::string describe() const override;

 protected:
  bool contains_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::VectorXd project_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  double gauge_impl(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  BodyPtr inner_;
  double factor_;
};

/// t K for t > 0; nested scalings are folded into one factor.
BodyPtr scale(const BodyPtr& body, double t);

/// Largest s (found by bisection in log s) with gaussian_mass_outside(s) <= target,
/// returned as the scaled body.
BodyPtr scale_to_outer_mass(const BodyPtr& body, double target);

struct DykstraResult {
  Eigen::VectorXd point;
  std::size_t sweeps = 0;
  double residual = 0.0;
  /// True when the final point was certified by solving the KKT system on the
  /// active slabs identified by the iteration.
  bool polished = false;
};

/// Dykstra's alternating projections over the slabs of `polytope`, each slab
/// projected in closed form, followed by an active-set polish. Throws
/// ConvergenceError after `max_iter` sweeps.
DykstraResult dykstra_project(const SymmetricPolytope& polytope, const Eigen::Ref<const Eigen::VectorXd>& x,
                              double tol = kDykstraTolerance, std::size_t max_iter = kDykstraMaxIter);

/// Closed-form projection onto one slab {|<a, x>| <= b}.
Eigen::VectorXd project_onto_slab(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& normal, double bound);

}  // namespace gbsplit
