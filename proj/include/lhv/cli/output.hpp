#pragma once

// Result tables and run manifests. Reals are written with %.17g so a table
// read back gives the same doubles.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lhv/cli/config.hpp"

namespace lhv::cli {

struct Column {
  std::string name;
  /// Printed in the header as "name [unit]"; "1" for dimensionless.
  std::string unit;
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

std::string header_line(const Table& table);
std::string to_csv(const Table& table);
nlohmann::json to_json(const Table& table);

struct Manifest {
  ScenarioConfig config;
  std::string version;
  unsigned threads = 1;
  double duration_seconds = 0.0;
  std::string kernel_isa;
  /// Per-result provenance: method, tolerances, notes.
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<std::string> files;
};

nlohmann::json to_json(const Manifest& manifest);

/// Writes text to a file, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lhv::cli
