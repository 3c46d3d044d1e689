#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lhv/cli/config.hpp"
#include "lhv/cli/output.hpp"
#include "lhv/cli/scenarios.hpp"

namespace cli = lhv::cli;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> issue_keys(std::string_view text) {
  try {
    cli::parse_config(text);
  } catch (const cli::ConfigError& e) {
    std::vector<std::string> keys;
    for (const cli::Issue& i : e.issues()) keys.push_back(i.key);
    return keys;
  }
  return {};
}

bool has(const std::vector<std::string>& keys, const std::string& key) {
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lhv-cli-test-" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesScenarioWithDefaultsAndDegrees) {
  const cli::ScenarioConfig cfg = cli::parse_config(
      "[scenario]\nname = epr-chsh\n\n[params]\nmodel = outcome\nb = deg:45\n\n[output]\ndir = out\n");
  EXPECT_EQ(cfg.scenario, "epr-chsh");
  EXPECT_FALSE(cfg.seed.has_value());
  EXPECT_NEAR(cfg.real("b"), std::numbers::pi / 4.0, 1e-15);
  EXPECT_NEAR(cfg.real("b_prime"), 3.0 * std::numbers::pi / 4.0, 1e-15);
  EXPECT_EQ(cfg.text("model"), "outcome");
  EXPECT_EQ(cfg.output_dir, "out");
  EXPECT_EQ(cfg.format, cli::OutputFormat::csv);
  EXPECT_FALSE(cfg.needs_seed());
}

TEST(Config, CountsAcceptScientificNotation) {
  const cli::ScenarioConfig cfg =
      cli::parse_config("[scenario]\nname = loophole\nseed = 3\n[params]\npairs = 1e6\n");
  EXPECT_EQ(cfg.count("pairs"), 1'000'000u);
  EXPECT_TRUE(has(issue_keys("[scenario]\nname = loophole\nseed = 3\n[params]\npairs = 1.5\n"), "params.pairs"));
}

TEST(Config, ReportsEveryIssueWithItsKey) {
  const auto keys = issue_keys("[scenario]\nname = loophole\n[params]\npairs = 0\nbogus = 1\n[output]\nformat = xml\n");
  EXPECT_TRUE(has(keys, "scenario.seed"));
  EXPECT_TRUE(has(keys, "params.pairs"));
  EXPECT_TRUE(has(keys, "params.bogus"));
  EXPECT_TRUE(has(keys, "output.format"));
}

TEST(Config, NonPositiveStepIsRejected) {
  EXPECT_TRUE(has(issue_keys("[scenario]\nname = ou-oracle\n[params]\ndt = 0\n"), "params.dt"));
  EXPECT_TRUE(has(issue_keys("[scenario]\nname = ou-oracle\n[params]\nlower = 3\nupper = 1\n"), "params.upper"));
}

TEST(Config, UnknownScenarioAndSection) {
  EXPECT_TRUE(has(issue_keys("[scenario]\nname = teleport\n"), "scenario.name"));
  EXPECT_TRUE(has(issue_keys("[scenario]\nname = epr-chsh\n[extra]\nx = 1\n"), "extra"));
  EXPECT_TRUE(has(issue_keys("[params]\na = 1\n"), "scenario.name"));
}

TEST(Config, MonteCarloNeedsSeed) {
  EXPECT_TRUE(has(issue_keys("[scenario]\nname = epr-correlation\n[params]\nmethod = monte-carlo\n"), "scenario.seed"));
  EXPECT_TRUE(issue_keys("[scenario]\nname = epr-correlation\n[params]\nmethod = quadrature\n").empty());
}

TEST(Config, CanonicalTextRoundTrips) {
  for (double x : {0.1, std::numbers::pi / 3.0, -1e-300, 12345.678}) {
    EXPECT_EQ(std::stod(cli::format_real(x)), x);
  }
  const cli::ScenarioConfig a = cli::parse_config("[scenario]\nname = conjugation\n[params]\ncells_list = 64, 128\n");
  EXPECT_EQ(a.counts("cells_list"), (std::vector<std::uint64_t>{64, 128}));
  cli::RawConfig raw = cli::echo(a);
  const cli::ScenarioConfig b = cli::validate(raw);
  EXPECT_EQ(cli::echo(b), raw);
}

TEST(Config, ManifestConfigIsAccepted) {
  const cli::RawConfig raw = cli::read_manifest(
      R"({"tool":"lhvsim","config":{"scenario":{"name":"fair-sampling"},"params":{"model":"no-loss"}}})");
  EXPECT_EQ(cli::validate(raw).text("model"), "no-loss");
}

TEST(Scenarios, ListsSevenScenarios) {
  const auto& names = cli::scenario_names();
  EXPECT_EQ(names.size(), 7u);
  for (const std::string& n : names) EXPECT_FALSE(cli::scenario_summary(n).empty()) << n;
}

TEST(Output, CsvHeaderCarriesUnits) {
  cli::Table t{"demo", {{"angle", "rad"}, {"correlation", "1"}, {"label", "1"}}, {}};
  t.add_row({0.5, -0.25, std::string("a,b")});
  EXPECT_EQ(cli::header_line(t), "angle [rad],correlation [1],label [1]");
  const std::string csv = cli::to_csv(t);
  EXPECT_NE(csv.find("0.5,-0.25,\"a,b\""), std::string::npos) << csv;
}

TEST(Execute, ManifestRerunIsByteIdentical) {
  const fs::path first = scratch("first"), second = scratch("second");
  cli::ScenarioConfig cfg =
      cli::parse_config("[scenario]\nname = loophole\nseed = 5\n[params]\npairs = 20000\n");
  cfg.output_dir = first.string();
  const cli::RunReport run1 = cli::execute(cfg, 3);
  ASSERT_FALSE(run1.files.empty());

  cli::RawConfig raw = cli::load_raw(run1.manifest.string());
  raw["output"]["dir"] = second.string();
  const cli::RunReport run2 = cli::execute(cli::validate(raw), 1);
  ASSERT_EQ(run1.files.size(), run2.files.size());
  for (std::size_t k = 0; k < run1.files.size(); ++k) {
    EXPECT_EQ(run1.files[k].filename(), run2.files[k].filename());
    EXPECT_EQ(slurp(run1.files[k]), slurp(run2.files[k])) << run1.files[k];
  }
  fs::remove_all(first);
  fs::remove_all(second);
}

TEST(Execute, JsonFormatWritesOneDocument) {
  const fs::path dir = scratch("json");
  cli::ScenarioConfig cfg = cli::parse_config("[scenario]\nname = epr-chsh\n[output]\nformat = json\n");
  cfg.output_dir = dir.string();
  const cli::RunReport r = cli::execute(cfg);
  ASSERT_EQ(r.files.size(), 1u);
  EXPECT_EQ(r.files[0].filename(), "epr-chsh.json");
  const auto doc = nlohmann::json::parse(slurp(r.files[0]));
  EXPECT_TRUE(doc.contains("tables"));
  EXPECT_TRUE(fs::exists(r.manifest));
  fs::remove_all(dir);
}

TEST(Execute, EveryScenarioRunsWithSmallInputs) {
  const std::map<std::string, std::string> params{
      {"ou-oracle", "cells = 128\npaths = 2000\npath_dt = 0.01\n"},
      {"conjugation", "cells_list = 64,128\n"},
      {"chameleon-averages", "cells = 96\n"},
      {"epr-correlation", "points = 5\nmethod = monte-carlo\nsamples = 10000\n"},
      {"epr-chsh", ""},
      {"loophole", "pairs = 5000\n"},
      {"fair-sampling", "cells = 720\n"},
  };
  for (const std::string& name : cli::scenario_names()) {
    const cli::ScenarioConfig cfg =
        cli::parse_config("[scenario]\nname = " + name + "\nseed = 1\n[params]\n" + params.at(name));
    const cli::ScenarioResult r = cli::run_scenario(cfg, 2);
    ASSERT_FALSE(r.tables.empty()) << name;
    for (const cli::Table& t : r.tables) EXPECT_FALSE(t.rows.empty()) << name << "/" << t.name;
  }
}

TEST(SelfCheck, AllLinesPass) {
  for (const cli::CheckLine& line : cli::self_check()) EXPECT_TRUE(line.passed) << line.name << ": " << line.detail;
}
