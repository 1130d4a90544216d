#include "gbsplit/harness.hpp"

#include "gbsplit/error.hpp"
#include "gbsplit/version.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace gbsplit {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDumpStream = 0x64756d70;  // "dump"

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json record_to_json(const CheckRecord& r) {
  ordered_json out;
  out["check_id"] = r.check_id;
  out["status"] = std::string(to_string(r.status));
  out["worst_margin"] = number_or_null(r.worst_margin + 0.0);
  out["samples_used"] = r.samples_used;
  out["tolerance"] = number_or_null(r.tolerance);
  out["notes"] = r.notes;
  if (r.witness) {
    ordered_json w = ordered_json::array();
    for (const double v : *r.witness) w.push_back(number_or_null(v));
    out["witness"] = w;
  } else {
    out["witness"] = nullptr;
  }
  ordered_json metrics = ordered_json::object();
  for (const auto& [key, value] : r.metrics) metrics[key] = number_or_null(value);
  out["metrics"] = metrics;
  return out;
}

void write_row(std::ostream& out, const Eigen::VectorXd& x, double weight) {
  char buffer[40];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buffer, sizeof buffer, "%.17g", x[i]);
    out << buffer << ',';
  }
  std::snprintf(buffer, sizeof buffer, "%.17g", weight);
  out << buffer << "\r\n";
}

}  // namespace

int exit_code_for(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::Pass: return kExitPass;
    case CheckStatus::Inconclusive: return kExitInconclusive;
    case CheckStatus::Fail: return kExitFail;
  }
  return kExitFail;
}

Scenario apply_overrides(Scenario scenario, const RunOptions& options) {
  if (options.seed) scenario.seed = *options.seed;
  if (!(options.samples_scale > 0.0)) throw ConfigError({"--samples-scale: must be positive"});
  if (options.samples_scale != 1.0) scenario.budgets = scenario.budgets.scaled(options.samples_scale);
  if (options.checks) scenario.checks = *options.checks;
  validate_scenario(scenario);
  return scenario;
}

std::string render_report(const Scenario& effective, const VerificationReport& report, bool include_timing) {
  ordered_json out;
  out["tool"] = "gbsplit";
  out["version"] = std::string(version_string());
  out["scenario"] = ordered_json::parse(scenario_to_json(effective));
  const CheckStatus overall = report.overall();
  out["overall"] = std::string(to_string(overall));
  out["exit_code"] = exit_code_for(overall);
  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) records.push_back(record_to_json(r));
  out["records"] = records;
  if (include_timing) {
    ordered_json timing;
    double total = 0.0;
    ordered_json per_check = ordered_json::object();
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      per_check[report.records[i].check_id] = report.wall_clock_ms[i];
      total += report.wall_clock_ms[i];
    }
    timing["total_ms"] = total;
    timing["per_check_ms"] = per_check;
    out["timing"] = timing;
  }
  return out.dump(2) + "\n";
}

RunOutcome run_scenario(const Scenario& scenario, const RunOptions& options) {
  RunOutcome outcome;
  outcome.effective = apply_overrides(scenario, options);
  const BuiltScenario built = build_scenario(outcome.effective);
  VerificationOptions vo;
  vo.budgets = outcome.effective.budgets;
  vo.confidence = outcome.effective.confidence;
  vo.enabled = outcome.effective.checks;
  outcome.report = run_verification(*built.split, vo, RngStream(outcome.effective.seed, 0));
  outcome.exit_code = exit_code_for(outcome.report.overall());
  outcome.report_json = render_report(outcome.effective, outcome.report, options.include_timing);
  return outcome;
}

std::optional<SampleKind> parse_sample_kind(std::string_view name) noexcept {
  if (name == "mu") return SampleKind::Mu;
  if (name == "good") return SampleKind::Good;
  if (name == "bad") return SampleKind::Bad;
  if (name == "dilated") return SampleKind::Dilated;
  return std::nullopt;
}

void dump_samples(const Scenario& scenario, SampleKind which, std::size_t count, std::ostream& out,
                  std::optional<std::uint64_t> seed) {
  const BuiltScenario built = build_scenario(scenario);
  const GoodBadSplit& split = *built.split;
  const RngStream root = RngStream(seed.value_or(scenario.seed), 0).substream(kDumpStream);
  SampleMatrix z;
  switch (which) {
    case SampleKind::Mu: {
      RngStream rng = root.substream(0);
      z = sample_std_normal(split.dim(), count, rng);
      break;
    }
    case SampleKind::Dilated: {
      RngStream rng = root.substream(1);
      z = split.n() * sample_std_normal(split.dim(), count, rng);
      break;
    }
    case SampleKind::Good: z = sample_good(split, count, root.substream(2)).points; break;
    case SampleKind::Bad: z = sample_bad(split, count, root.substream(3)).points; break;
  }
  for (std::size_t i = 1; i <= split.dim(); ++i) out << 'x' << i << ',';
  out << "weight_bad\r\n";
  for (Eigen::Index j = 0; j < z.cols(); ++j) write_row(out, built.to_original(z.col(j)), split.weight_bad(z.col(j)));
}

std::string summarize(const VerificationReport& report) {
  std::ostringstream os;
  for (const auto& r : report.records) {
    char margin[32];
    std::snprintf(margin, sizeof margin, "%.6g", r.worst_margin + 0.0);
    os << to_string(r.status) << "  " << r.check_id << "  margin=" << margin << "  samples=" << r.samples_used << '\n';
  }
  os << "overall: " << to_string(report.overall()) << '\n';
  return os.str();
}

}  // namespace gbsplit
