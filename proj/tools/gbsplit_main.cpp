#include "gbsplit/error.hpp"
#include "gbsplit/harness.hpp"
#include "gbsplit/version.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::set<std::string> split_checks(const std::string& list) {
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    const auto end = item.find_last_not_of(" \t");
    if (begin != std::string::npos) out.insert(item.substr(begin, end - begin + 1));
  }
  return out;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Good/bad Gaussian mixture decomposition and its numerical certificate"};
  app.set_version_flag("--version", std::string(gbsplit::version_string()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  double samples_scale = 1.0;
  std::string checks;
  bool quiet = false;
  bool no_timing = false;

  CLI::App* run = app.add_subcommand("run", "Run the verification suite on a scenario");
  run->add_option("--config", config_path, "Scenario JSON")->required();
  run->add_option("--out", out_path, "Report JSON path (stdout when omitted)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--samples-scale", samples_scale, "Multiply all sample budgets");
  CLI::Option* checks_opt = run->add_option("--checks", checks, "Comma-separated subset of check ids");
  run->add_flag("--quiet", quiet, "Suppress the terminal summary");
  run->add_flag("--no-timing", no_timing, "Omit wall-clock timings from the report");

  std::string which = "mu";
  std::size_t count = 1000;
  std::string dump_config;
  std::string dump_out;
  CLI::App* dump = app.add_subcommand("dump", "Write samples as CSV");
  dump->add_option("--config", dump_config, "Scenario JSON")->required();
  dump->add_option("--which", which, "mu, good, bad or dilated")->check(CLI::IsMember({"mu", "good", "bad", "dilated"}));
  dump->add_option("--count", count, "Number of samples")->check(CLI::PositiveNumber);
  dump->add_option("--out", dump_out, "CSV path (stdout when omitted)");
  CLI::Option* dump_seed_opt = dump->add_option("--seed", seed, "Override the scenario seed");
  dump->add_flag("--quiet", quiet, "Suppress warnings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gbsplit::kExitConfig;
  }

  try {
    if (run->parsed()) {
      const gbsplit::Scenario scenario = gbsplit::load_scenario(config_path);
      gbsplit::RunOptions options;
      if (*seed_opt) options.seed = seed;
      options.samples_scale = samples_scale;
      if (*checks_opt) options.checks = split_checks(checks);
      options.include_timing = !no_timing;
      if (scenario.delta < 1e-3 && !quiet)
        std::cerr << "warning: delta < 1e-3; bad-sample budgets grow like 1/delta'\n";
      const gbsplit::RunOutcome outcome = gbsplit::run_scenario(scenario, options);
      if (out_path.empty()) {
        std::cout << outcome.report_json;
      } else if (!write_file(out_path, outcome.report_json)) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return gbsplit::kExitFail;
      }
      if (!quiet) std::cerr << gbsplit::summarize(outcome.report);
      for (const auto& record : outcome.report.records)
        if (record.notes.rfind("sampling failure", 0) == 0)
          std::cerr << "error: check '" << record.check_id << "' " << record.notes << '\n';
      return outcome.exit_code;
    }
    const gbsplit::Scenario scenario = gbsplit::load_scenario(dump_config);
    const auto kind = gbsplit::parse_sample_kind(which);
    if (scenario.delta < 1e-3 && which == "bad" && !quiet)
      std::cerr << "warning: delta < 1e-3; bad-sample budgets grow like 1/delta'\n";
    std::optional<std::uint64_t> override_seed;
    if (*dump_seed_opt) override_seed = seed;
    std::ostringstream csv;
    gbsplit::dump_samples(scenario, *kind, count, csv, override_seed);
    if (dump_out.empty()) {
      std::cout << csv.str();
    } else if (!write_file(dump_out, csv.str())) {
      std::cerr << "error: cannot write " << dump_out << '\n';
      return gbsplit::kExitFail;
    }
    return gbsplit::kExitPass;
  } catch (const gbsplit::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gbsplit::kExitConfig;
  } catch (const gbsplit::SamplingError& e) {
    std::cerr << "error: sampling failure: " << e.what() << '\n';
    return gbsplit::kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gbsplit::kExitFail;
  }
}
