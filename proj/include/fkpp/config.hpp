#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fkpp/error.hpp"
#include "fkpp/geometry.hpp"

namespace fkpp {

/// Raised for any malformed or out-of-range configuration entry.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Experiment parameters: typed accessors over the [experiment] section
/// with per-key defaults. Unknown keys are rejected at parse time.
class ExperimentBlock {
 public:
  ExperimentBlock() = default;
  explicit ExperimentBlock(std::map<std::string, std::string> values);

  double number(const std::string& key, double fallback) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

struct RunConfig {
  // [geometry]
  int dimension = 1;
  double period = 8.0;
  std::vector<Interval> components{{0.0, 4.0}};
  double window = 256.0;  // half-width of the Dirichlet window
  double torus = 32.0;    // half-width of the periodic torus
  double spacing = 1.0 / 64.0;
  // [operator]
  double alpha = 0.5;
  // [solver]
  double dt = 0.05;
  double T = 20.0;
  std::vector<double> snapshots;  // explicit times, or generated from snapshot_every
  double cg_tolerance = 1e-13;
  double eig_tolerance = 1e-10;
  double stationary_tolerance = 1e-7;
  double K = 2.0;
  // [experiment]
  ExperimentBlock experiment;

  /// Sorted, whitespace-normalised rendering of the parsed config.
  std::string canonical_text;
  /// Hex SHA-256 of canonical_text.
  std::string hash;

  PeriodicGeometry geometry() const { return PeriodicGeometry(period, components); }
};

/// Parses INI-style text ([geometry], [operator], [solver], [experiment])
/// and validates every field. Throws ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace fkpp
