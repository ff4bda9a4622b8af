#include "fkpp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fkpp/error.hpp"

namespace fkpp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::string& config_hash,
               const std::vector<CsvColumn>& columns) {
  if (columns.empty()) throw InvalidArgument("CSV needs at least one column");
  const std::size_t rows = columns.front().values.size();
  for (const CsvColumn& c : columns)
    if (c.values.size() != rows) throw InvalidArgument("CSV columns differ in length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# config_hash: " << config_hash << '\n';
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j].name;
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j)
      out << (j ? "," : "") << format_double(columns[j].values[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const std::string& config_hash,
                nlohmann::ordered_json body) {
  body["config_hash"] = config_hash;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  std::getline(in, line);
  const std::string tag = "# config_hash: ";
  if (line.rfind(tag, 0) != 0) throw InvalidArgument("CSV lacks the config hash line");
  t.config_hash = line.substr(tag.size());
  std::getline(in, line);
  {
    std::istringstream is(line);
    std::string name;
    while (std::getline(is, name, ',')) t.names.push_back(name);
  }
  t.columns.resize(t.names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    for (std::size_t j = 0; j < t.names.size(); ++j) {
      if (!std::getline(is, cell, ',')) throw InvalidArgument("short CSV row");
      t.columns[j].push_back(std::stod(cell));
    }
  }
  return t;
}

}  // namespace fkpp
