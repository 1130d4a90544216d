#include "gbsplit/scenario.hpp"

#include "gbsplit/cutoff.hpp"
#include "gbsplit/error.hpp"
#include "gbsplit/hypothesis.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gbsplit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct BodyTypeName {
  BodySpec::Type type;
  std::string_view name;
};

constexpr BodyTypeName kBodyTypes[] = {
    {BodySpec::Type::L2Ball, "l2_ball"},     {BodySpec::Type::LInfBall, "linf_ball"},
    {BodySpec::Type::L1Ball, "l1_ball"},     {BodySpec::Type::Ellipsoid, "ellipsoid"},
    {BodySpec::Type::Polytope, "polytope"},  {BodySpec::Type::Scaled, "scaled"}};

struct BudgetField {
  std::string_view name;
  std::size_t CheckBudgets::*member;
  std::size_t minimum;
};

constexpr BudgetField kBudgetFields[] = {
    {"mass", &CheckBudgets::mass, 1000},
    {"half_space", &CheckBudgets::half_space, 1000},
    {"r1", &CheckBudgets::r1, 1000},
    {"r2_samples", &CheckBudgets::r2_samples, 1},
    {"r2_outside", &CheckBudgets::r2_outside, 1},
    {"r3_segments", &CheckBudgets::r3_segments, 4},
    {"r4_segments", &CheckBudgets::r4_segments, 4},
    {"gci", &CheckBudgets::gci, 1000},
    {"dilation_pairs", &CheckBudgets::dilation_pairs, 1},
    {"sigma_grid", &CheckBudgets::sigma_grid, 100},
    {"erfc_grid", &CheckBudgets::erfc_grid, 2},
    {"f_grid", &CheckBudgets::f_grid, 2},
    {"taylor_tuples", &CheckBudgets::taylor_tuples, 1}};

std::string value_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Collects field diagnostics while reading a json tree.
class Reader {
 public:
  std::vector<std::string> errors;

  void error(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

  void reject_unknown(const json& object, const std::string& path, std::initializer_list<std::string_view> known) {
    for (const auto& item : object.items()) {
      if (std::find(known.begin(), known.end(), item.key()) == known.end())
        error(join(path, item.key()), "unknown field");
    }
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }

  const json* field(const json& object, const std::string& path, std::string_view key, bool required) {
    const auto it = object.find(std::string(key));
    if (it == object.end()) {
      if (required) error(join(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  bool number(const json& object, const std::string& path, std::string_view key, double& out, bool required) {
    const json* v = field(object, path, key, required);
    if (v == nullptr) return false;
    if (!v->is_number()) {
      error(join(path, key), "expected a number");
      return false;
    }
    out = v->get<double>();
    if (!std::isfinite(out)) {
      error(join(path, key), "must be finite");
      return false;
    }
    return true;
  }

  bool unsigned_integer(const json& object, const std::string& path, std::string_view key, std::uint64_t& out,
                        bool required) {
    const json* v = field(object, path, key, required);
    if (v == nullptr) return false;
    if (!v->is_number_unsigned()) {
      error(join(path, key), "expected a non-negative integer");
      return false;
    }
    out = v->get<std::uint64_t>();
    return true;
  }

  bool vector(const json& value, const std::string& path, std::vector<double>& out) {
    if (!value.is_array()) {
      error(path, "expected an array of numbers");
      return false;
    }
    out.clear();
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_number() || !std::isfinite(value[i].get<double>())) {
        error(path + "[" + std::to_string(i) + "]", "expected a finite number");
        return false;
      }
      out.push_back(value[i].get<double>());
    }
    return true;
  }

  bool matrix(const json& value, const std::string& path, std::vector<std::vector<double>>& out) {
    if (!value.is_array() || value.empty()) {
      error(path, "expected a non-empty array of rows");
      return false;
    }
    out.assign(value.size(), {});
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!vector(value[i], path + "[" + std::to_string(i) + "]", out[i])) return false;
      if (out[i].size() != out[0].size()) {
        error(path + "[" + std::to_string(i) + "]", "row length differs from row 0");
        return false;
      }
    }
    return true;
  }

  BodySpec body(const json& value, const std::string& path) {
    BodySpec spec;
    if (!value.is_object()) {
      error(path, "expected an object");
      return spec;
    }
    const json* type = field(value, path, "type", true);
    if (type == nullptr) return spec;
    if (!type->is_string()) {
      error(join(path, "type"), "expected a string");
      return spec;
    }
    const std::string name = type->get<std::string>();
    const auto it = std::find_if(std::begin(kBodyTypes), std::end(kBodyTypes),
                                 [&](const BodyTypeName& t) { return t.name == name; });
    if (it == std::end(kBodyTypes)) {
      error(join(path, "type"), "unknown body type '" + name + "'");
      return spec;
    }
    spec.type = it->type;
    if (const json* flag = field(value, path, "scale_to_delta", false)) {
      if (flag->is_boolean()) spec.scale_to_delta = flag->get<bool>();
      else error(join(path, "scale_to_delta"), "expected a boolean");
    }
    switch (spec.type) {
      case BodySpec::Type::L2Ball:
      case BodySpec::Type::LInfBall:
      case BodySpec::Type::L1Ball:
        reject_unknown(value, path, {"type", "radius", "scale_to_delta"});
        if (number(value, path, "radius", spec.radius, true) && !(spec.radius > 0.0))
          error(join(path, "radius"), "must be positive");
        break;
      case BodySpec::Type::Ellipsoid:
        reject_unknown(value, path, {"type", "shape", "scale_to_delta"});
        if (const json* m = field(value, path, "shape", true)) matrix(*m, join(path, "shape"), spec.matrix);
        break;
      case BodySpec::Type::Polytope:
        reject_unknown(value, path, {"type", "normals", "bounds", "scale_to_delta"});
        if (const json* m = field(value, path, "normals", true)) matrix(*m, join(path, "normals"), spec.matrix);
        if (const json* b = field(value, path, "bounds", true)) {
          if (vector(*b, join(path, "bounds"), spec.bounds) && spec.bounds.size() != spec.matrix.size() &&
              !spec.matrix.empty())
            error(join(path, "bounds"), "expected one bound per normal");
        }
        break;
      case BodySpec::Type::Scaled:
        reject_unknown(value, path, {"type", "factor", "inner", "scale_to_delta"});
        if (number(value, path, "factor", spec.factor, true) && !(spec.factor > 0.0))
          error(join(path, "factor"), "must be positive");
        if (const json* inner = field(value, path, "inner", true)) {
          BodySpec child = body(*inner, join(path, "inner"));
          if (child.scale_to_delta) error(join(path, "inner.scale_to_delta"), "only allowed on the outermost body");
          spec.inner = std::make_shared<const BodySpec>(std::move(child));
        }
        break;
    }
    return spec;
  }

  CovarianceSpec covariance(const json& value, const std::string& path) {
    CovarianceSpec spec;
    if (!value.is_object()) {
      error(path, "expected an object");
      return spec;
    }
    const json* type = field(value, path, "type", true);
    if (type == nullptr) return spec;
    const std::string name = type->is_string() ? type->get<std::string>() : std::string();
    if (name == "identity") {
      reject_unknown(value, path, {"type"});
    } else if (name == "diagonal") {
      spec.kind = CovarianceSpec::Kind::Diagonal;
      reject_unknown(value, path, {"type", "diag"});
      if (const json* d = field(value, path, "diag", true)) vector(*d, join(path, "diag"), spec.diagonal);
    } else if (name == "full") {
      spec.kind = CovarianceSpec::Kind::Full;
      reject_unknown(value, path, {"type", "matrix"});
      if (const json* m = field(value, path, "matrix", true)) matrix(*m, join(path, "matrix"), spec.matrix);
    } else {
      error(join(path, "type"), "expected one of identity, diagonal, full");
    }
    return spec;
  }
};

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

ordered_json body_to_json(const BodySpec& spec) {
  ordered_json out;
  out["type"] = std::string(to_string(spec.type));
  switch (spec.type) {
    case BodySpec::Type::L2Ball:
    case BodySpec::Type::LInfBall:
    case BodySpec::Type::L1Ball:
      out["radius"] = spec.radius;
      break;
    case BodySpec::Type::Ellipsoid:
      out["shape"] = spec.matrix;
      break;
    case BodySpec::Type::Polytope:
      out["normals"] = spec.matrix;
      out["bounds"] = spec.bounds;
      break;
    case BodySpec::Type::Scaled:
      out["factor"] = spec.factor;
      out["inner"] = spec.inner ? body_to_json(*spec.inner) : ordered_json(nullptr);
      break;
  }
  if (spec.scale_to_delta) out["scale_to_delta"] = true;
  return out;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

BodyPtr make_body(const BodySpec& spec, std::size_t dim) {
  switch (spec.type) {
    case BodySpec::Type::L2Ball: return std::make_shared<L2Ball>(dim, spec.radius);
    case BodySpec::Type::LInfBall: return std::make_shared<LpBall>(dim, LpBall::Norm::LInf, spec.radius);
    case BodySpec::Type::L1Ball: return std::make_shared<LpBall>(dim, LpBall::Norm::L1, spec.radius);
    case BodySpec::Type::Ellipsoid: return std::make_shared<Ellipsoid>(to_matrix(spec.matrix));
    case BodySpec::Type::Polytope: {
      const Eigen::VectorXd bounds = Eigen::Map<const Eigen::VectorXd>(spec.bounds.data(), static_cast<Eigen::Index>(spec.bounds.size()));
      return std::make_shared<SymmetricPolytope>(to_matrix(spec.matrix), bounds);
    }
    case BodySpec::Type::Scaled: return scale(make_body(*spec.inner, dim), spec.factor);
  }
  throw PreconditionError("unknown body type");
}

void check_body_dims(const BodySpec& spec, std::size_t dim, const std::string& path, std::vector<std::string>& errors) {
  switch (spec.type) {
    case BodySpec::Type::Ellipsoid:
      if (spec.matrix.size() != dim || spec.matrix[0].size() != dim)
        errors.push_back(path + ".shape: expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
      break;
    case BodySpec::Type::Polytope:
      if (!spec.matrix.empty() && spec.matrix[0].size() != dim)
        errors.push_back(path + ".normals: rows must have length dim = " + std::to_string(dim));
      if (spec.matrix.size() < dim)
        errors.push_back(path + ".normals: need at least dim = " + std::to_string(dim) + " slabs for a bounded body");
      break;
    case BodySpec::Type::Scaled:
      if (spec.inner) check_body_dims(*spec.inner, dim, path + ".inner", errors);
      break;
    default:
      break;
  }
}

}  // namespace

bool BodySpec::operator==(const BodySpec& other) const {
  if (type != other.type || scale_to_delta != other.scale_to_delta) return false;
  switch (type) {
    case Type::L2Ball:
    case Type::LInfBall:
    case Type::L1Ball: return radius == other.radius;
    case Type::Ellipsoid: return matrix == other.matrix;
    case Type::Polytope: return matrix == other.matrix && bounds == other.bounds;
    case Type::Scaled:
      if (factor != other.factor || !inner != !other.inner) return false;
      return !inner || *inner == *other.inner;
  }
  return false;
}

std::string_view to_string(BodySpec::Type type) noexcept {
  for (const auto& entry : kBodyTypes)
    if (entry.type == type) return entry.name;
  return "unknown";
}

namespace {
std::string join_diagnostics(const std::vector<std::string>& diagnostics) {
  std::string out = "invalid scenario";
  for (const auto& d : diagnostics) out += "\n  " + d;
  return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

Scenario parse_scenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(json_text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError({"line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"line 1: top-level value must be an object"});

  Reader reader;
  Scenario s;
  reader.reject_unknown(root, "", {"name", "dim", "body", "delta", "n", "covariance", "seed", "confidence", "budgets", "checks"});
  if (const json* name = reader.field(root, "", "name", false)) {
    if (name->is_string()) s.name = name->get<std::string>();
    else reader.error("name", "expected a string");
  }
  std::uint64_t dim = 0;
  if (reader.unsigned_integer(root, "", "dim", dim, true)) {
    if (dim == 0) reader.error("dim", "must be positive");
    s.dim = static_cast<std::size_t>(dim);
  }
  if (const json* body = reader.field(root, "", "body", true)) s.body = reader.body(*body, "body");
  reader.number(root, "", "delta", s.delta, true);
  reader.number(root, "", "n", s.n, true);
  if (const json* cov = reader.field(root, "", "covariance", false)) s.covariance = reader.covariance(*cov, "covariance");
  reader.unsigned_integer(root, "", "seed", s.seed, false);
  reader.number(root, "", "confidence", s.confidence, false);
  if (const json* budgets = reader.field(root, "", "budgets", false)) {
    if (!budgets->is_object()) {
      reader.error("budgets", "expected an object");
    } else {
      for (const auto& item : budgets->items()) {
        const auto it = std::find_if(std::begin(kBudgetFields), std::end(kBudgetFields),
                                     [&](const BudgetField& f) { return f.name == item.key(); });
        if (it == std::end(kBudgetFields)) {
          reader.error("budgets." + item.key(), "unknown budget");
          continue;
        }
        std::uint64_t value = 0;
        if (reader.unsigned_integer(*budgets, "budgets", it->name, value, true)) s.budgets.*(it->member) = value;
      }
    }
  }
  if (const json* checks = reader.field(root, "", "checks", false)) {
    if (!checks->is_array()) {
      reader.error("checks", "expected an array of check ids");
    } else {
      for (std::size_t i = 0; i < checks->size(); ++i) {
        if ((*checks)[i].is_string()) s.checks.insert((*checks)[i].get<std::string>());
        else reader.error("checks[" + std::to_string(i) + "]", "expected a string");
      }
    }
  }
  if (!reader.errors.empty()) throw ConfigError(reader.errors);
  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({path + ": cannot open file"});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

void validate_scenario(const Scenario& s) {
  std::vector<std::string> errors;
  if (!(s.delta > 0.0 && s.delta < 0.5)) {
    errors.push_back("delta: " + value_text(s.delta) + " must lie in (0, 1/2)");
  } else if (!delta_condition_holds(s.delta)) {
    errors.push_back("delta: " + value_text(s.delta) + " violates the pi-condition pi (2 log(1/delta) + 8) <= 1/delta (slack " +
                     value_text(delta_condition_slack(s.delta)) + ", requires delta <= " + value_text(delta_star()) + ")");
  }
  if (!(s.n > 1.0)) errors.push_back("n: " + value_text(s.n) + " violates the dilation precondition n > 1");
  if (!(s.confidence > 0.0 && s.confidence < 1.0)) errors.push_back("confidence: must lie in (0, 1)");
  check_body_dims(s.body, s.dim, "body", errors);
  if (s.body.type == BodySpec::Type::Polytope) {
    for (std::size_t i = 0; i < s.body.bounds.size(); ++i)
      if (!(s.body.bounds[i] > 0.0)) errors.push_back("body.bounds[" + std::to_string(i) + "]: must be positive");
  }
  switch (s.covariance.kind) {
    case CovarianceSpec::Kind::Identity: break;
    case CovarianceSpec::Kind::Diagonal:
      if (s.covariance.diagonal.size() != s.dim) errors.push_back("covariance.diag: expected dim entries");
      for (std::size_t i = 0; i < s.covariance.diagonal.size(); ++i)
        if (!(s.covariance.diagonal[i] > 0.0))
          errors.push_back("covariance.diag[" + std::to_string(i) + "]: must be positive");
      break;
    case CovarianceSpec::Kind::Full:
      if (s.covariance.matrix.size() != s.dim || s.covariance.matrix.empty() || s.covariance.matrix[0].size() != s.dim)
        errors.push_back("covariance.matrix: expected a " + std::to_string(s.dim) + "x" + std::to_string(s.dim) + " matrix");
      break;
  }
  for (const BudgetField& f : kBudgetFields) {
    if (s.budgets.*(f.member) < f.minimum)
      errors.push_back("budgets." + std::string(f.name) + ": must be at least " + std::to_string(f.minimum));
  }
  for (const auto& id : s.checks) {
    if (std::find(kCheckIds.begin(), kCheckIds.end(), id) == kCheckIds.end())
      errors.push_back("checks: unknown check id '" + id + "'");
  }
  if (!errors.empty()) throw ConfigError(errors);
}

std::string scenario_to_json(const Scenario& s, int indent) {
  ordered_json out;
  out["name"] = s.name;
  out["dim"] = s.dim;
  out["body"] = body_to_json(s.body);
  out["delta"] = s.delta;
  out["n"] = s.n;
  ordered_json cov;
  switch (s.covariance.kind) {
    case CovarianceSpec::Kind::Identity: cov["type"] = "identity"; break;
    case CovarianceSpec::Kind::Diagonal:
      cov["type"] = "diagonal";
      cov["diag"] = s.covariance.diagonal;
      break;
    case CovarianceSpec::Kind::Full:
      cov["type"] = "full";
      cov["matrix"] = s.covariance.matrix;
      break;
  }
  out["covariance"] = cov;
  out["seed"] = s.seed;
  out["confidence"] = s.confidence;
  ordered_json budgets;
  for (const BudgetField& f : kBudgetFields) budgets[std::string(f.name)] = s.budgets.*(f.member);
  out["budgets"] = budgets;
  out["checks"] = ordered_json::array();
  for (const auto& id : s.checks) out["checks"].push_back(id);
  return out.dump(indent);
}

BuiltScenario build_scenario(const Scenario& s) {
  validate_scenario(s);
  const auto d = static_cast<Eigen::Index>(s.dim);
  try {
    GaussianMeasure measure = GaussianMeasure::standard(s.dim);
    if (s.covariance.kind == CovarianceSpec::Kind::Diagonal) {
      const Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(s.covariance.diagonal.data(), d);
      measure = GaussianMeasure::from_covariance(diag.asDiagonal().toDenseMatrix());
    } else if (s.covariance.kind == CovarianceSpec::Kind::Full) {
      measure = GaussianMeasure::from_covariance(to_matrix(s.covariance.matrix));
    }
    BodyPtr original;
    BodyPtr body;
    try {
      original = make_body(s.body, s.dim);
      body = original->pullback(measure.cov_factor());
      if (s.body.scale_to_delta) {
        BodyPtr scaled = scale_to_outer_mass(body, s.delta);
        original = scale(original, scaled->inradius() / body->inradius());
        body = std::move(scaled);
      }
    } catch (const Error& e) {
      throw ConfigError({std::string("body: ") + e.what()});
    }
    try {
      auto split = std::make_shared<const GoodBadSplit>(body, s.delta, s.n);
      return BuiltScenario{std::move(measure), std::move(original), std::move(body), std::move(split)};
    } catch (const Error& e) {
      throw ConfigError({std::string("delta/n: ") + e.what()});
    }
  } catch (const FactorizationError& e) {
    throw ConfigError({std::string("covariance: ") + e.what()});
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError({std::string("covariance: ") + e.what()});
  }
}

}  // namespace gbsplit
