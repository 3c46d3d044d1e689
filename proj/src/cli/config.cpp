#include "lhv/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

namespace lhv::cli {
namespace {

enum class Kind { real, positive, angle, count, choice, count_list };

struct ParamSpec {
  std::string key;
  Kind kind;
  std::string fallback;
  std::vector<std::string> choices = {};
  std::uint64_t min_count = 1;
};

struct ScenarioSpec {
  std::string name;
  std::string summary;
  std::vector<ParamSpec> params;
};

const std::string sqrt2_text = "1.4142135623730951";

std::vector<ParamSpec> ou_params() {
  return {
      {"theta", Kind::positive, "1"},
      {"sigma", Kind::positive, sqrt2_text},
      {"initial_mean", Kind::real, "2"},
      {"initial_variance", Kind::positive, "0.25"},
      {"lower", Kind::real, "-8"},
      {"upper", Kind::real, "8"},
      {"dt", Kind::positive, "0.001"},
      {"horizon", Kind::positive, "1"},
      {"scheme", Kind::choice, "crank-nicolson", {"crank-nicolson", "explicit-euler"}},
  };
}

std::vector<ParamSpec> with(std::vector<ParamSpec> base, std::vector<ParamSpec> extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

const std::vector<ScenarioSpec>& scenarios() {
  static const std::vector<ScenarioSpec> table = [] {
    std::vector<ScenarioSpec> t;
    t.push_back({"ou-oracle", "OU forward/backward solves against closed-form moments",
                 with(ou_params(), {{"cells", Kind::count, "512", {}, 3},
                                    {"paths", Kind::count, "0", {}, 0},
                                    {"path_dt", Kind::positive, "0.001"}})});
    t.push_back({"conjugation", "conjugation defect <U g>_p0 - <g>_{V p0} across grid sizes",
                 with(ou_params(), {{"cells_list", Kind::count_list, "128,256,512", {}, 3},
                                    {"adjoint", Kind::choice, "direct", {"direct", "transpose"}}})});
    t.push_back({"chameleon-averages", "classical vs observational averages for every dual-pair model",
                 with(ou_params(), {{"cells", Kind::count, "256", {}, 3},
                                    {"a", Kind::angle, "0"},
                                    {"b", Kind::angle, "deg:45"},
                                    {"hidden_cells", Kind::count, "360", {}, 360}})});
    t.push_back({"epr-correlation", "singlet correlation E(a, b) for the functional or outcome model",
                 {{"model", Kind::choice, "functional", {"functional", "outcome"}},
                  {"a", Kind::angle, "0"},
                  {"b", Kind::angle, "deg:45"},
                  {"points", Kind::count, "1"},
                  {"method", Kind::choice, "quadrature", {"quadrature", "monte-carlo"}},
                  {"samples", Kind::count, "1000000", {}, 2},
                  {"cells", Kind::count, "360", {}, 360}}});
    t.push_back({"epr-chsh", "CHSH statistic S for the functional or outcome model",
                 {{"model", Kind::choice, "functional", {"functional", "outcome"}},
                  {"a", Kind::angle, "0"},
                  {"a_prime", Kind::angle, "deg:90"},
                  {"b", Kind::angle, "deg:45"},
                  {"b_prime", Kind::angle, "deg:135"},
                  {"method", Kind::choice, "quadrature", {"quadrature", "monte-carlo"}},
                  {"samples", Kind::count, "1000000", {}, 2},
                  {"cells", Kind::count, "360", {}, 360}}});
    t.push_back({"loophole", "event-by-event detection-loophole experiment at the four CHSH settings",
                 {{"model", Kind::choice, "standard", {"standard", "no-loss", "zero-detection"}},
                  {"a", Kind::angle, "0"},
                  {"a_prime", Kind::angle, "deg:90"},
                  {"b", Kind::angle, "deg:45"},
                  {"b_prime", Kind::angle, "deg:135"},
                  {"pairs", Kind::count, "1000000"}}});
    t.push_back({"fair-sampling", "L1 distance between detected sub-ensembles of two setting pairs",
                 {{"model", Kind::choice, "standard", {"standard", "no-loss"}},
                  {"a", Kind::angle, "0"},
                  {"b", Kind::angle, "deg:45"},
                  {"c", Kind::angle, "deg:90"},
                  {"d", Kind::angle, "deg:45"},
                  {"cells", Kind::count, "3600", {}, 3}}});
    return t;
  }();
  return table;
}

const ScenarioSpec* find_scenario(const std::string& name) {
  for (const ScenarioSpec& s : scenarios()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> to_real(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return x;
}

std::optional<std::uint64_t> to_count(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::uint64_t n = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, n);
  if (ec == std::errc() && ptr == end) return n;
  // Scientific notation for integral values, e.g. 1e6.
  const std::optional<double> x = to_real(text);
  if (x && *x >= 0.0 && *x <= 9007199254740992.0 && std::floor(*x) == *x) {
    return static_cast<std::uint64_t>(*x);
  }
  return std::nullopt;
}

// Returns the parsed value or an error message.
std::variant<ParamValue, std::string> parse_value(const ParamSpec& spec, const std::string& text) {
  switch (spec.kind) {
    case Kind::real:
    case Kind::positive: {
      const std::optional<double> x = to_real(text);
      if (!x || !std::isfinite(*x)) return "expected a finite real number, got '" + text + "'";
      if (spec.kind == Kind::positive && !(*x > 0.0)) return "must be > 0, got " + text;
      return ParamValue{*x};
    }
    case Kind::angle: {
      const bool degrees = text.rfind("deg:", 0) == 0;
      const std::optional<double> x = to_real(degrees ? trim(text.substr(4)) : text);
      if (!x || !std::isfinite(*x)) {
        return "expected a finite angle in radians (or deg:<degrees>), got '" + text + "'";
      }
      return ParamValue{degrees ? *x * std::numbers::pi / 180.0 : *x};
    }
    case Kind::count: {
      const std::optional<std::uint64_t> n = to_count(text);
      if (!n) return "expected a nonnegative integer, got '" + text + "'";
      if (*n < spec.min_count) return "must be >= " + std::to_string(spec.min_count) + ", got " + text;
      return ParamValue{*n};
    }
    case Kind::count_list: {
      std::vector<std::uint64_t> out;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const std::optional<std::uint64_t> n = to_count(trim(item));
        if (!n || *n < spec.min_count) {
          return "expected a comma-separated list of integers >= " + std::to_string(spec.min_count) +
                 ", got '" + text + "'";
        }
        out.push_back(*n);
      }
      if (out.empty()) return std::string("list must not be empty");
      return ParamValue{out};
    }
    case Kind::choice: {
      for (const std::string& c : spec.choices) {
        if (c == text) return ParamValue{text};
      }
      std::string options;
      for (const std::string& c : spec.choices) options += (options.empty() ? "" : ", ") + c;
      return "expected one of {" + options + "}, got '" + text + "'";
    }
  }
  return std::string("unsupported parameter kind");
}

std::string join_issues(const std::vector<Issue>& issues) {
  std::string out = "invalid configuration:";
  for (const Issue& i : issues) out += "\n  " + i.key + ": " + i.message;
  return out;
}

template <class T>
const T& get_param(const ScenarioConfig& cfg, const std::string& key) {
  const auto it = cfg.params.find(key);
  if (it == cfg.params.end()) {
    throw Error(ErrorCode::config, "scenario '" + cfg.scenario + "' has no parameter '" + key + "'");
  }
  const T* v = std::get_if<T>(&it->second);
  if (v == nullptr) throw Error(ErrorCode::config, "parameter '" + key + "' has another type");
  return *v;
}

}  // namespace

ConfigError::ConfigError(std::vector<Issue> issues)
    : Error(ErrorCode::config, join_issues(issues)), issues_(std::move(issues)) {}

double ScenarioConfig::real(const std::string& key) const { return get_param<double>(*this, key); }

std::uint64_t ScenarioConfig::count(const std::string& key) const {
  return get_param<std::uint64_t>(*this, key);
}

const std::string& ScenarioConfig::text(const std::string& key) const {
  return get_param<std::string>(*this, key);
}

const std::vector<std::uint64_t>& ScenarioConfig::counts(const std::string& key) const {
  return get_param<std::vector<std::uint64_t>>(*this, key);
}

bool ScenarioConfig::needs_seed() const {
  if (scenario == "loophole") return true;
  if (scenario == "ou-oracle") return count("paths") > 0;
  if (scenario == "epr-correlation" || scenario == "epr-chsh") return text("method") == "monte-carlo";
  return false;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const ScenarioSpec& s : scenarios()) n.push_back(s.name);
    return n;
  }();
  return names;
}

std::string scenario_summary(const std::string& name) {
  const ScenarioSpec* s = find_scenario(name);
  if (s == nullptr) throw Error(ErrorCode::config, "unknown scenario '" + name + "'");
  return s->summary;
}

RawConfig read_ini(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::vector<Issue>{{"<document>", "line " + std::to_string(e.line()) + ": " + e.message()}});
  }
  RawConfig raw;
  std::vector<Issue> issues;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      issues.push_back({section, "key outside any section"});
      continue;
    }
    auto& out = raw[section];
    for (const auto& [key, value] : body) out[key] = trim(value.data());
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return raw;
}

RawConfig read_manifest(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::vector<Issue>{{"<document>", std::string("malformed JSON: ") + e.what()}});
  }
  if (!doc.is_object() || !doc.contains("config") || !doc["config"].is_object()) {
    throw ConfigError(std::vector<Issue>{{"config", "manifest has no config object"}});
  }
  RawConfig raw;
  std::vector<Issue> issues;
  for (const auto& [section, body] : doc["config"].items()) {
    if (!body.is_object()) {
      issues.push_back({section, "expected an object"});
      continue;
    }
    auto& out = raw[section];
    for (const auto& [key, value] : body.items()) {
      out[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return raw;
}

ScenarioConfig validate(const RawConfig& raw) {
  std::vector<Issue> issues;
  ScenarioConfig cfg;

  for (const auto& [section, body] : raw) {
    if (section != "scenario" && section != "params" && section != "output") {
      issues.push_back({section, "unknown section"});
    }
  }

  const auto section = [&](const std::string& name) -> const std::map<std::string, std::string>& {
    static const std::map<std::string, std::string> empty;
    const auto it = raw.find(name);
    return it == raw.end() ? empty : it->second;
  };

  const auto& head = section("scenario");
  for (const auto& [key, value] : head) {
    if (key != "name" && key != "seed") issues.push_back({"scenario." + key, "unknown key"});
  }
  const ScenarioSpec* spec = nullptr;
  if (const auto it = head.find("name"); it == head.end() || it->second.empty()) {
    issues.push_back({"scenario.name", "missing scenario name"});
  } else if ((spec = find_scenario(it->second)) == nullptr) {
    std::string options;
    for (const std::string& n : scenario_names()) options += (options.empty() ? "" : ", ") + n;
    issues.push_back({"scenario.name", "unknown scenario '" + it->second + "' (one of " + options + ")"});
  } else {
    cfg.scenario = spec->name;
  }
  if (const auto it = head.find("seed"); it != head.end()) {
    std::uint64_t seed = 0;
    const std::string& t = it->second;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), seed);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      issues.push_back({"scenario.seed", "expected an unsigned 64-bit integer, got '" + t + "'"});
    } else {
      cfg.seed = seed;
    }
  }

  const auto& params = section("params");
  if (spec != nullptr) {
    for (const auto& [key, value] : params) {
      const bool known = std::any_of(spec->params.begin(), spec->params.end(),
                                     [&](const ParamSpec& p) { return p.key == key; });
      if (!known) issues.push_back({"params." + key, "unknown key for scenario '" + spec->name + "'"});
    }
    for (const ParamSpec& p : spec->params) {
      const auto it = params.find(p.key);
      const std::string text = it == params.end() ? p.fallback : it->second;
      auto parsed = parse_value(p, text);
      if (const auto* message = std::get_if<std::string>(&parsed)) {
        issues.push_back({"params." + p.key, *message});
      } else {
        cfg.params[p.key] = std::get<ParamValue>(std::move(parsed));
      }
    }
  }

  const auto& output = section("output");
  for (const auto& [key, value] : output) {
    if (key == "dir") {
      if (value.empty()) issues.push_back({"output.dir", "must not be empty"});
      cfg.output_dir = value;
    } else if (key == "format") {
      if (value == "csv") {
        cfg.format = OutputFormat::csv;
      } else if (value == "json") {
        cfg.format = OutputFormat::json;
      } else {
        issues.push_back({"output.format", "expected csv or json, got '" + value + "'"});
      }
    } else {
      issues.push_back({"output." + key, "unknown key"});
    }
  }

  // Cross-field checks, where the fields involved parsed.
  if (spec != nullptr) {
    if (cfg.params.count("lower") && cfg.params.count("upper") &&
        !(cfg.real("lower") < cfg.real("upper"))) {
      issues.push_back({"params.upper", "must exceed params.lower"});
    }
    try {
      if (cfg.needs_seed() && !cfg.seed) {
        issues.push_back({"scenario.seed", "required: scenario '" + cfg.scenario + "' is stochastic"});
      }
    } catch (const Error&) {
      // The parameter deciding stochasticity is itself invalid and already reported.
    }
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

ScenarioConfig parse_config(std::string_view text) { return validate(read_ini(text)); }

RawConfig load_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = first != std::string::npos && text[first] == '{';
  return json ? read_manifest(text) : read_ini(text);
}

ScenarioConfig load_config(const std::string& path) { return validate(load_raw(path)); }

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string canonical(const ParamValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_real(v);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          std::string out;
          for (std::uint64_t n : v) out += (out.empty() ? "" : ",") + std::to_string(n);
          return out;
        }
      },
      value);
}

RawConfig echo(const ScenarioConfig& cfg) {
  RawConfig raw;
  raw["scenario"]["name"] = cfg.scenario;
  if (cfg.seed) raw["scenario"]["seed"] = std::to_string(*cfg.seed);
  for (const auto& [key, value] : cfg.params) raw["params"][key] = canonical(value);
  raw["output"]["dir"] = cfg.output_dir;
  raw["output"]["format"] = cfg.format == OutputFormat::csv ? "csv" : "json";
  return raw;
}

}  // namespace lhv::cli
