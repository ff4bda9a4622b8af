#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace fkpp {

struct CsvColumn {
  std::string name;  // header entry, including units, e.g. "x [length]"
  std::span<const double> values;
};

/// Writes "# config_hash: <hash>", a header row and one row per index, all
/// numbers with 17 significant digits ("%.17g"), so values round-trip.
void write_csv(const std::filesystem::path& path, const std::string& config_hash,
               const std::vector<CsvColumn>& columns);

/// Pretty-printed JSON (nlohmann emits shortest round-trip doubles); the
/// object gains a "config_hash" member.
void write_json(const std::filesystem::path& path, const std::string& config_hash,
                nlohmann::ordered_json body);

/// Reads back a CSV written by write_csv: column names and values.
struct CsvTable {
  std::string config_hash;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};
CsvTable read_csv(const std::filesystem::path& path);

/// "%.17g" rendering.
std::string format_double(double v);

}  // namespace fkpp
