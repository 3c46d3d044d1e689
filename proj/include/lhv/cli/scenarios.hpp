#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lhv/cli/config.hpp"
#include "lhv/cli/output.hpp"

namespace lhv::cli {

struct ScenarioResult {
  std::vector<Table> tables;
  nlohmann::json provenance = nlohmann::json::object();
};

/// Runs a validated scenario. Results do not depend on `threads`.
ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned threads = 1);

struct RunReport {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
  double duration_seconds = 0.0;
};

/// Runs the scenario and writes its tables (csv or json) and
/// <scenario>.manifest.json into cfg.output_dir.
RunReport execute(const ScenarioConfig& cfg, unsigned threads = 1);

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Oracle self-test: OU moments, conjugation defect, CHSH values.
std::vector<CheckLine> self_check();

}  // namespace lhv::cli
