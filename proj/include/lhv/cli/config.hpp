#pragma once

// Scenario configuration. Configs are INI documents:
//
//   [scenario]
//   name = epr-chsh
//   seed = 42
//
//   [params]
//   a = 0
//   b = deg:45
//
//   [output]
//   dir = out
//   format = csv
//
// A run manifest (JSON) is accepted in place of an INI file; its "config"
// object holds the same three sections. Every problem found is reported, each
// with its key path.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lhv/error.hpp"

namespace lhv::cli {

enum class OutputFormat { csv, json };

struct Issue {
  std::string key;  // e.g. "params.dt"
  std::string message;
};

/// Thrown with every validation problem at once.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

using ParamValue = std::variant<double, std::uint64_t, std::string, std::vector<std::uint64_t>>;

struct ScenarioConfig {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  /// Every parameter of the scenario, defaults filled in.
  std::map<std::string, ParamValue> params;
  std::string output_dir = ".";
  OutputFormat format = OutputFormat::csv;

  double real(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  const std::vector<std::uint64_t>& counts(const std::string& key) const;

  /// True when the scenario (with these params) draws random numbers.
  bool needs_seed() const;
};

const std::vector<std::string>& scenario_names();
/// One-line description per scenario.
std::string scenario_summary(const std::string& name);

/// Raw sectioned key/value input, before validation.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

RawConfig read_ini(std::string_view text);
/// Extracts the "config" object of a run manifest.
RawConfig read_manifest(std::string_view text);

ScenarioConfig validate(const RawConfig& raw);
ScenarioConfig parse_config(std::string_view text);
/// Reads a file; JSON (manifest) when it starts with '{', INI otherwise.
RawConfig load_raw(const std::string& path);
ScenarioConfig load_config(const std::string& path);

/// Canonical text of a parameter value; parsing it back gives the same value.
std::string canonical(const ParamValue& value);
/// Round-trip formatting of a double (%.17g).
std::string format_real(double x);

/// Canonical echo of a validated config, in the RawConfig shape.
RawConfig echo(const ScenarioConfig& cfg);

}  // namespace lhv::cli
