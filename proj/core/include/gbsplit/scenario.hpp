#pragma once

#include "gbsplit/convex_body.hpp"
#include "gbsplit/decomposition.hpp"
#include "gbsplit/gaussian.hpp"
#include "gbsplit/verification.hpp"

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gbsplit {

/// Body description in original (unwhitened) coordinates.
struct BodySpec {
  enum class Type { L2Ball, LInfBall, L1Ball, Ellipsoid, Polytope, Scaled };

  Type type = Type::L2Ball;
  double radius = 1.0;
  /// Ellipsoid shape matrix or polytope normals (one row per slab).
  std::vector<std::vector<double>> matrix;
  /// Polytope slab bounds.
  std::vector<double> bounds;
  /// Scaled: factor and inner body.
  double factor = 1.0;
  std::shared_ptr<const BodySpec> inner;
  /// Rescale the whitened body so its Gaussian outer mass bound equals delta.
  bool scale_to_delta = false;

  bool operator==(const BodySpec& other) const;
};

std::string_view to_string(BodySpec::Type type) noexcept;

struct CovarianceSpec {
  enum class Kind { Identity, Diagonal, Full };

  Kind kind = Kind::Identity;
  std::vector<double> diagonal;
  std::vector<std::vector<double>> matrix;

  bool operator==(const CovarianceSpec&) const = default;
};

struct Scenario {
  std::string name;
  std::size_t dim = 1;
  BodySpec body;
  double delta = 0.01;
  double n = 2.0;
  CovarianceSpec covariance;
  std::uint64_t seed = 0;
  double confidence = 0.99;
  CheckBudgets budgets;
  /// Empty means all checks.
  std::set<std::string> checks;

  bool operator==(const Scenario&) const = default;
};

/// Invalid configuration; each diagnostic names a line or a field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Parses and validates a JSON scenario. Throws ConfigError.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::string& path);

/// Canonical JSON form; parse_scenario(scenario_to_json(s)) == s.
std::string scenario_to_json(const Scenario& scenario, int indent = 2);

/// Hypothesis and precondition checks on a parsed scenario (delta, n,
/// dimensions, check ids). Throws ConfigError.
void validate_scenario(const Scenario& scenario);

/// Measure, body and split in whitened coordinates.
struct BuiltScenario {
  GaussianMeasure measure;
  BodyPtr original_body;
  BodyPtr body;
  std::shared_ptr<const GoodBadSplit> split;

  Eigen::VectorXd to_original(const Eigen::Ref<const Eigen::VectorXd>& z) const { return measure.cov_factor() * z; }
};

/// Whitens the covariance, pulls K back, and builds the split. Construction
/// failures (non-SPD covariance, degenerate body, cutoff preconditions) are
/// reported as ConfigError.
BuiltScenario build_scenario(const Scenario& scenario);

}  // namespace gbsplit
