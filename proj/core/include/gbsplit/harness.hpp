#pragma once

#include "gbsplit/scenario.hpp"
#include "gbsplit/verification.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>

namespace gbsplit {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitConfig = 64;

int exit_code_for(CheckStatus status) noexcept;

struct RunOptions {
  std::optional<std::uint64_t> seed;
  double samples_scale = 1.0;
  /// Replaces the scenario's check list when set.
  std::optional<std::set<std::string>> checks;
  /// Off makes the report byte-identical across runs with the same seed.
  bool include_timing = true;
};

/// Scenario after command-line overrides; this is what the report echoes.
Scenario apply_overrides(Scenario scenario, const RunOptions& options);

struct RunOutcome {
  int exit_code = kExitPass;
  Scenario effective;
  VerificationReport report;
  std::string report_json;
};

/// Builds the split, runs the enabled checks and renders the JSON report.
/// Throws ConfigError for invalid scenarios.
RunOutcome run_scenario(const Scenario& scenario, const RunOptions& options = {});

std::string render_report(const Scenario& effective, const VerificationReport& report, bool include_timing);

enum class SampleKind { Mu, Good, Bad, Dilated };

std::optional<SampleKind> parse_sample_kind(std::string_view name) noexcept;

/// CSV in original coordinates with header x1,...,xd,weight_bad.
void dump_samples(const Scenario& scenario, SampleKind which, std::size_t count, std::ostream& out,
                  std::optional<std::uint64_t> seed = std::nullopt);

/// One-line summary per record, for terminal output.
std::string summarize(const VerificationReport& report);

}  // namespace gbsplit
