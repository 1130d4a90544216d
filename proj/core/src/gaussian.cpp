#include "gbsplit/gaussian.hpp"

#include "gbsplit/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace gbsplit {

namespace {

void require_lower_factor(const Eigen::MatrixXd& factor) {
  if (factor.rows() == 0 || factor.rows() != factor.cols())
    throw PreconditionError("covariance factor must be a non-empty square matrix");
  for (Eigen::Index i = 0; i < factor.rows(); ++i) {
    if (!(factor(i, i) > 0.0))
      throw PreconditionError("covariance factor needs a strictly positive diagonal (entry " +
                              std::to_string(i) + ")");
    for (Eigen::Index j = i + 1; j < factor.cols(); ++j)
      if (factor(i, j) != 0.0) throw PreconditionError("covariance factor must be lower triangular");
  }
}

}  // namespace

WhiteningTransform::WhiteningTransform(Eigen::MatrixXd cov_factor) : factor_(std::move(cov_factor)) {
  require_lower_factor(factor_);
}

Eigen::VectorXd WhiteningTransform::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) throw DimensionError(dim(), x.size());
  return factor_.triangularView<Eigen::Lower>().solve(x);
}

Eigen::VectorXd WhiteningTransform::unapply(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (static_cast<std::size_t>(z.size()) != dim()) throw DimensionError(dim(), z.size());
  return factor_.triangularView<Eigen::Lower>() * z;
}

Eigen::MatrixXd cholesky_lower(const Eigen::Ref<const Eigen::MatrixXd>& cov, double pivot_floor) {
  const Eigen::Index d = cov.rows();
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = cov(j, j) - factor.row(j).head(j).squaredNorm();
    if (!(pivot > pivot_floor)) {
      throw FactorizationError(static_cast<std::size_t>(j + 1), pivot,
                               "covariance is not positive definite: leading minor of order " +
                                   std::to_string(j + 1) + " has pivot " + std::to_string(pivot));
    }
    factor(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      factor(i, j) = (cov(i, j) - factor.row(i).head(j).dot(factor.row(j).head(j))) / factor(j, j);
    }
  }
  return factor;
}

WhiteningTransform whiten(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  if (cov.rows() == 0 || cov.rows() != cov.cols())
    throw PreconditionError("covariance must be a non-empty square matrix");
  const double scale = cov.cwiseAbs().maxCoeff();
  if (!std::isfinite(scale) || (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw PreconditionError("covariance must be symmetric and finite");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (!(lambda_max > 0.0)) throw FactorizationError(1, cov(0, 0), "covariance has no positive eigenvalue");
  const double floor = kSpdTolerance * lambda_max;

  Eigen::MatrixXd factor = cholesky_lower(cov, floor);

  // Pivots can all clear the floor while the spectrum does not; name the first
  // leading minor whose smallest eigenvalue is below it (these decrease with order).
  if (eig.eigenvalues().minCoeff() <= floor) {
    for (Eigen::Index k = 1; k <= cov.rows(); ++k) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> minor(cov.topLeftCorner(k, k), Eigen::EigenvaluesOnly);
      const double lambda_min = minor.eigenvalues().minCoeff();
      if (lambda_min <= floor)
        throw FactorizationError(static_cast<std::size_t>(k), lambda_min,
                                 "covariance is numerically singular: leading minor of order " +
                                     std::to_string(k) + " has smallest eigenvalue " +
                                     std::to_string(lambda_min));
    }
  }
  return WhiteningTransform(std::move(factor));
}

GaussianMeasure GaussianMeasure::standard(std::size_t dim) {
  if (dim == 0) throw PreconditionError("dimension must be positive");
  return GaussianMeasure(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

GaussianMeasure GaussianMeasure::from_covariance(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  return GaussianMeasure(whiten(cov).cov_factor());
}

GaussianMeasure::GaussianMeasure(Eigen::MatrixXd cov_factor) : factor_(std::move(cov_factor)) {
  require_lower_factor(factor_);
  log_det_factor_ = factor_.diagonal().array().log().sum();
}

double GaussianMeasure::log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) throw DimensionError(dim(), x.size());
  const Eigen::VectorXd z = factor_.triangularView<Eigen::Lower>().solve(x);
  const double d = static_cast<double>(dim());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) - log_det_factor_ - 0.5 * z.squaredNorm();
}

SampleMatrix GaussianMeasure::sample(std::size_t count, RngStream& rng) const {
  SampleMatrix z = sample_std_normal(dim(), count, rng);
  return factor_.triangularView<Eigen::Lower>() * z;
}

DilatedGaussian::DilatedGaussian(GaussianMeasure base, double n) : base_(std::move(base)), n_(n) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw DomainError("dilation factor must satisfy n >= 1");
}

double DilatedGaussian::log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return base_.log_density(x / n_) - static_cast<double>(dim()) * std::log(n_);
}

SampleMatrix sample_std_normal(std::size_t dim, std::size_t count, RngStream& rng) {
  if (dim == 0 || count == 0) throw PreconditionError("sample_std_normal: dim and count must be positive");
  SampleMatrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  double* data = out.data();
  for (std::size_t i = 0; i < dim * count; ++i) data[i] = rng.normal();
  return out;
}

SampleMatrix sample_dilated(const DilatedGaussian& dilated, std::size_t count, RngStream& rng) {
  return dilated.factor() * dilated.base().sample(count, rng);
}

double dilation_curvature(double n) {
  if (!(n > 1.0) || !std::isfinite(n)) throw DomainError("dilation ratio requires n > 1");
  return (n * n - 1.0) / (2.0 * n * n);
}

double dilation_log_ratio(const Eigen::Ref<const Eigen::VectorXd>& x, double n) {
  return -dilation_curvature(n) * x.squaredNorm();
}

}  // namespace gbsplit
