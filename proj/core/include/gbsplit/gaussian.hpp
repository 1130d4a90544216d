#pragma once

#include "gbsplit/rng.hpp"

#include <Eigen/Core>

#include <cstddef>

namespace gbsplit {

/// Samples are stored column-wise: column j is the j-th d-vector.
using SampleMatrix = Eigen::MatrixXd;

/// Relative eigenvalue floor (w.r.t. the largest eigenvalue) below which a
/// covariance is not accepted as SPD.
inline constexpr double kSpdTolerance = 1e-10;

/// x -> L^{-1} x pushes N(0, L L^T) to the standard normal; unapply is z -> L z.
class WhiteningTransform {
 public:
  explicit WhiteningTransform(Eigen::MatrixXd cov_factor);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(factor_.rows()); }
  const Eigen::MatrixXd& cov_factor() const noexcept { return factor_; }

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd unapply(const Eigen::Ref<const Eigen::VectorXd>& z) const;

 private:
  Eigen::MatrixXd factor_;
};

/// Cholesky-based whitening of a symmetric positive definite covariance.
/// Throws FactorizationError naming the first leading minor that fails.
WhiteningTransform whiten(const Eigen::Ref<const Eigen::MatrixXd>& cov);

/// Lower Cholesky factor with explicit pivot checks against `pivot_floor`.
Eigen::MatrixXd cholesky_lower(const Eigen::Ref<const Eigen::MatrixXd>& cov, double pivot_floor);

/// Centered Gaussian N(0, L L^T) on R^d.
class GaussianMeasure {
 public:
  static GaussianMeasure standard(std::size_t dim);
  static GaussianMeasure from_covariance(const Eigen::Ref<const Eigen::MatrixXd>& cov);
  /// `cov_factor` must be lower triangular with positive diagonal.
  explicit GaussianMeasure(Eigen::MatrixXd cov_factor);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(factor_.rows()); }
  const Eigen::MatrixXd& cov_factor() const noexcept { return factor_; }
  Eigen::MatrixXd covariance() const { return factor_ * factor_.transpose(); }
  WhiteningTransform whitening() const { return WhiteningTransform(factor_); }

  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  SampleMatrix sample(std::size_t count, RngStream& rng) const;

 private:
  Eigen::MatrixXd factor_;
  double log_det_factor_ = 0.0;
};

/// mu^{x n}: the law of n Z with Z ~ base, i.e. mu^{x n}(B) = mu(B / n).
class DilatedGaussian {
 public:
  /// n >= 1; n == 1 is the base measure itself.
  DilatedGaussian(GaussianMeasure base, double n);

  const GaussianMeasure& base() const noexcept { return base_; }
  double factor() const noexcept { return n_; }
  std::size_t dim() const noexcept { return base_.dim(); }

  /// log density at x: base log density at x/n minus d log n.
  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  GaussianMeasure base_;
  double n_;
};

/// `count` i.i.d. standard normal d-vectors, drawn in column order from `rng`.
SampleMatrix sample_std_normal(std::size_t dim, std::size_t count, RngStream& rng);

/// n times the base samples drawn with the same stream.
SampleMatrix sample_dilated(const DilatedGaussian& dilated, std::size_t count, RngStream& rng);

/// log(d mu / d mu^{x n})(x) for standard normal mu, normalised to 0 at x = 0:
/// -((n^2 - 1) / (2 n^2)) |x|^2. Throws DomainError unless n > 1.
double dilation_log_ratio(const Eigen::Ref<const Eigen::VectorXd>& x, double n);

/// (n^2 - 1) / (2 n^2), the curvature of the dilation log-ratio.
double dilation_curvature(double n);

}  // namespace gbsplit
