#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gbsplit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (x < 0 for the cutoff, n <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of a construction is violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  DimensionError(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Cholesky factorization failed; `minor()` is the 1-based order of the first
/// leading principal minor that is not (numerically) positive.
class FactorizationError : public Error {
 public:
  FactorizationError(std::size_t minor, double pivot, const std::string& what)
      : Error(what), minor_(minor), pivot_(pivot) {}

  std::size_t minor() const noexcept { return minor_; }
  double pivot() const noexcept { return pivot_; }

 private:
  std::size_t minor_;
  double pivot_;
};

/// Iterative projection did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double residual)
      : Error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
};

/// Rejection sampler exhausted its proposal budget.
class SamplingError : public Error {
 public:
  SamplingError(const std::string& what, std::size_t proposals, std::size_t accepted)
      : Error(what), proposals_(proposals), accepted_(accepted) {}

  std::size_t proposals() const noexcept { return proposals_; }
  std::size_t accepted() const noexcept { return accepted_; }

 private:
  std::size_t proposals_;
  std::size_t accepted_;
};

}  // namespace gbsplit
