#include "lhv/cli/output.hpp"

#include <fstream>

#include "lhv/error.hpp"

namespace lhv::cli {
namespace {

std::string cell_text(const Cell& cell) {
  if (const auto* x = std::get_if<double>(&cell)) return format_real(*x);
  if (const auto* n = std::get_if<std::int64_t>(&cell)) return std::to_string(*n);
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw Error(ErrorCode::invalid_argument, "row width " + std::to_string(row.size()) +
                                                 " does not match table '" + name + "'");
  }
  rows.push_back(std::move(row));
}

std::string header_line(const Table& table) {
  std::string out;
  for (const Column& c : table.columns) {
    if (!out.empty()) out += ',';
    out += c.name + " [" + c.unit + "]";
  }
  return out;
}

std::string to_csv(const Table& table) {
  std::string out = header_line(table) + "\n";
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out += ',';
      out += cell_text(row[k]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const Table& table) {
  nlohmann::json j;
  j["name"] = table.name;
  j["columns"] = nlohmann::json::array();
  for (const Column& c : table.columns) j["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
  j["rows"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const Cell& cell : row) std::visit([&](const auto& v) { r.push_back(v); }, cell);
    j["rows"].push_back(std::move(r));
  }
  return j;
}

nlohmann::json to_json(const Manifest& m) {
  nlohmann::json j;
  j["tool"] = "lhvsim";
  j["version"] = m.version;
  j["scenario"] = m.config.scenario;
  j["seed"] = m.config.seed ? nlohmann::json(*m.config.seed) : nlohmann::json(nullptr);
  j["threads"] = m.threads;
  j["duration_seconds"] = m.duration_seconds;
  j["kernel_isa"] = m.kernel_isa;
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [section, body] : echo(m.config)) {
    for (const auto& [key, value] : body) config[section][key] = value;
  }
  j["config"] = std::move(config);
  j["provenance"] = m.provenance;
  j["files"] = m.files;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::io, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

}  // namespace lhv::cli
