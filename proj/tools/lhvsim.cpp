// lhvsim: run hidden-variable / Kolmogorov-dynamics scenarios from config files.
//
//   lhvsim run --config <path> [--seed N] [--threads K] [--out DIR]
//   lhvsim list-scenarios        (also: lhvsim --list-scenarios)
//   lhvsim check
//
// Exit codes: 0 success, 1 invalid configuration or usage, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lhv/cli/config.hpp"
#include "lhv/cli/scenarios.hpp"
#include "lhv/error.hpp"

namespace {

constexpr int exit_validation = 1;
constexpr int exit_runtime = 2;

void list_scenarios() {
  for (const std::string& name : lhv::cli::scenario_names()) {
    std::printf("%-20s %s\n", name.c_str(), lhv::cli::scenario_summary(name).c_str());
  }
}

int run(const std::string& config_path, std::optional<std::uint64_t> seed, unsigned threads,
        const std::optional<std::string>& out) {
  lhv::cli::RawConfig raw = lhv::cli::load_raw(config_path);
  if (seed) raw["scenario"]["seed"] = std::to_string(*seed);
  if (out) raw["output"]["dir"] = *out;
  const lhv::cli::ScenarioConfig cfg = lhv::cli::validate(raw);
  const lhv::cli::RunReport report = lhv::cli::execute(cfg, threads);
  for (const auto& f : report.files) std::printf("wrote %s\n", f.string().c_str());
  std::printf("wrote %s\n", report.manifest.string().c_str());
  return 0;
}

int check() {
  bool ok = true;
  for (const lhv::cli::CheckLine& line : lhv::cli::self_check()) {
    std::printf("[%s] %s: %s\n", line.passed ? "PASS" : "FAIL", line.name.c_str(), line.detail.c_str());
    ok = ok && line.passed;
  }
  return ok ? 0 : exit_runtime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chameleon-model, Kolmogorov-dynamics and EPR-Bohm scenario runner"};
  app.set_version_flag("--version", std::string(LHV_VERSION));
  app.require_subcommand(0, 1);

  bool list_flag = false;
  app.add_flag("--list-scenarios", list_flag, "List the available scenarios");

  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::string> out;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("--config", config_path, "INI config or run manifest (JSON)")->required();
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--threads", threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
  run_cmd->add_option("--out", out, "Output directory (overrides output.dir)");

  CLI::App* list_cmd = app.add_subcommand("list-scenarios", "List the available scenarios");
  CLI::App* check_cmd = app.add_subcommand("check", "Run the oracle self-test");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_validation;
  }

  try {
    if (list_flag || list_cmd->parsed()) {
      list_scenarios();
      return 0;
    }
    if (check_cmd->parsed()) return check();
    if (run_cmd->parsed()) return run(config_path, seed, threads, out);
    std::cerr << app.help();
    return exit_validation;
  } catch (const lhv::cli::ConfigError& e) {
    std::cerr << "lhvsim: " << e.what() << "\n";
    return exit_validation;
  } catch (const lhv::Error& e) {
    std::cerr << "lhvsim: " << lhv::to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == lhv::ErrorCode::config ? exit_validation : exit_runtime;
  } catch (const std::exception& e) {
    std::cerr << "lhvsim: " << e.what() << "\n";
    return exit_runtime;
  }
}
