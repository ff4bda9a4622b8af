#include "fkpp/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace fkpp {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"geometry", {"dimension", "period", "components", "window", "torus", "spacing"}},
      {"operator", {"alpha"}},
      {"solver",
       {"dt", "T", "snapshots", "snapshot_every", "cg_tolerance", "eig_tolerance",
        "stationary_tolerance", "K"}},
      {"experiment",
       {ExperimentBlock::known_keys().begin(), ExperimentBlock::known_keys().end()}},
  };
  return s;
}

double parse_number(const std::string& where, const std::string& value) {
  std::istringstream is(value);
  is.imbue(std::locale::classic());
  double v = 0.0;
  is >> v;
  if (is.fail() || !is.eof() || !std::isfinite(v))
    throw ConfigError(where + ": expected a finite number, got '" + value + "'");
  return v;
}

std::vector<double> parse_numbers(const std::string& where, const std::string& value) {
  std::istringstream is(value);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_number(where, tok));
  return out;
}

std::string normalise(const std::string& value) {
  std::istringstream is(value);
  std::string tok, out;
  while (is >> tok) out += (out.empty() ? "" : " ") + tok;
  return out;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

bool is_multiple(double value, double unit) {
  const double q = value / unit;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

}  // namespace

ExperimentBlock::ExperimentBlock(std::map<std::string, std::string> values)
    : values_(std::move(values)) {}

const std::vector<std::string>& ExperimentBlock::known_keys() {
  static const std::vector<std::string> keys{
      "reaction",        "M",                  "bump_center",      "bump_width",
      "bump_amplitude",  "nu_list",            "nu",               "level",
      "fit_lo",          "fit_hi",             "tail_lo",          "tail_hi",
      "ratio_lo",        "ratio_limit",        "ratio_drift",      "t_min",
      "speed_tolerance", "tail_tolerance",     "epsilon",          "cm_scale",
      "mu",              "plateau_rate",       "decay_rate",       "plateau_dt_halving",
      "restarts",        "barrier_nu",         "lemma_dt",         "scaling_half_width",
      "scaling_spacing", "comparison_pairs",   "comparison_T",     "include_front",
      "shape_spread",    "window_diagnostic",
  };
  return keys;
}

double ExperimentBlock::number(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number("experiment." + key, it->second);
}

std::vector<double> ExperimentBlock::numbers(const std::string& key,
                                             std::vector<double> fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_numbers("experiment." + key, it->second);
}

std::string ExperimentBlock::text(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

bool ExperimentBlock::flag(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("experiment." + key + ": expected a boolean, got '" + it->second + "'");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream is{std::string(text)};
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  // Reject unknown sections/keys and build the canonical text.
  std::map<std::string, std::map<std::string, std::string>> entries;
  for (const auto& [section, body] : tree) {
    require(!(body.empty() && !body.data().empty()), "key outside a section: " + section);
    auto known = schema().find(section);
    require(known != schema().end(), "unknown config section [" + section + "]");
    for (const auto& [key, node] : body) {
      require(known->second.count(key) > 0, "unknown key '" + key + "' in [" + section + "]");
      entries[section][key] = normalise(node.data());
    }
  }
  RunConfig c;
  std::ostringstream canon;
  for (const auto& [section, keys] : entries) {
    canon << '[' << section << "]\n";
    for (const auto& [key, value] : keys) canon << key << " = " << value << '\n';
  }
  c.canonical_text = canon.str();
  c.hash = sha256_hex(c.canonical_text);

  auto get = [&](const std::string& section, const std::string& key) -> const std::string* {
    auto s = entries.find(section);
    if (s == entries.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  };
  auto num = [&](const std::string& section, const std::string& key, double& target) {
    if (const std::string* v = get(section, key)) target = parse_number(section + "." + key, *v);
  };

  double dim = 1.0;
  num("geometry", "dimension", dim);
  require(dim == 1.0 || dim == 2.0, "geometry.dimension must be 1 or 2");
  require(dim == 1.0, "geometry.dimension = 2 is not supported by this build");
  c.dimension = 1;
  num("geometry", "period", c.period);
  num("geometry", "window", c.window);
  num("geometry", "torus", c.torus);
  num("geometry", "spacing", c.spacing);
  if (const std::string* v = get("geometry", "components")) {
    c.components.clear();
    std::istringstream is(*v);
    std::string piece;
    while (std::getline(is, piece, ',')) {
      const std::vector<double> ends = parse_numbers("geometry.components", piece);
      require(ends.size() == 2, "geometry.components: each interval needs 'lo hi'");
      c.components.push_back({ends[0], ends[1]});
    }
    require(!c.components.empty(), "geometry.components is empty");
  }
  num("operator", "alpha", c.alpha);
  num("solver", "dt", c.dt);
  num("solver", "T", c.T);
  num("solver", "cg_tolerance", c.cg_tolerance);
  num("solver", "eig_tolerance", c.eig_tolerance);
  num("solver", "stationary_tolerance", c.stationary_tolerance);
  num("solver", "K", c.K);
  const std::string* snaps = get("solver", "snapshots");
  const std::string* every = get("solver", "snapshot_every");
  require(!(snaps && every), "give either solver.snapshots or solver.snapshot_every");
  if (entries.count("experiment")) c.experiment = ExperimentBlock(entries["experiment"]);

  // Validation.
  try {
    (void)c.geometry();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  require(c.alpha > 0.0 && c.alpha < 1.0, "operator.alpha must lie in (0, 1)");
  require(c.spacing > 0.0, "geometry.spacing must be positive");
  require(is_multiple(c.period, c.spacing), "geometry.spacing must divide the period");
  require(c.window >= c.period && is_multiple(c.window, c.period),
          "geometry.window must be a positive whole number of periods");
  require(c.torus >= c.period && is_multiple(c.torus, c.period),
          "geometry.torus must be a positive whole number of periods");
  require(c.window / c.spacing <= (1 << 22), "geometry.window / spacing is too large");
  require(c.dt > 0.0 && c.dt <= 0.1, "solver.dt must lie in (0, 0.1]");
  require(c.T > 0.0, "solver.T must be positive");
  require(c.cg_tolerance > 0.0 && c.cg_tolerance < 1e-3, "solver.cg_tolerance out of range");
  require(c.eig_tolerance > 0.0 && c.eig_tolerance < 1e-3, "solver.eig_tolerance out of range");
  require(c.stationary_tolerance > 0.0 && c.stationary_tolerance < 1e-2,
          "solver.stationary_tolerance out of range");
  require(c.K >= 2.0, "solver.K must be at least 2");
  if (snaps) {
    c.snapshots = parse_numbers("solver.snapshots", *snaps);
  } else {
    double step = 1.0;
    if (every) step = parse_number("solver.snapshot_every", *every);
    require(step > 0.0, "solver.snapshot_every must be positive");
    const long count = std::lround(std::floor(c.T / step + 1e-9));
    for (long k = 0; k <= count; ++k) c.snapshots.push_back(static_cast<double>(k) * step);
  }
  for (double t : c.snapshots)
    require(t >= 0.0 && t <= c.T + 1e-12, "snapshot times must lie in [0, T]");

  // Experiment values: parse everything once so type errors surface here.
  const ExperimentBlock& e = c.experiment;
  const PeriodicGeometry geom = c.geometry();
  const std::string reaction = e.text("reaction", "kpp");
  require(reaction == "kpp" || reaction == "heat" || reaction == "linear",
          "experiment.reaction must be kpp, heat or linear");
  require(e.number("M", 1.0) >= 0.0, "experiment.M must be non-negative");
  const double bc = e.number("bump_center", 0.5 * (c.components[0].lo + c.components[0].hi));
  const double bw = e.number("bump_width", 0.25 * c.components[0].length());
  require(e.number("bump_amplitude", 0.5) > 0.0, "experiment.bump_amplitude must be positive");
  require(bw > 0.0 && geom.boundary_distance(bc) > bw,
          "experiment bump must lie strictly inside one component");
  require(std::abs(bc) + bw <= c.window, "experiment bump leaves the window");
  for (double nu : e.numbers("nu_list", {})) {
    require(nu < 0.5 * geom.min_length(), "experiment.nu_list: erosion empties the domain");
    require(-2.0 * nu < geom.min_gap(), "experiment.nu_list: dilation merges components");
  }
  const double nu = e.number("nu", 0.5);
  require(nu > 0.0 && nu < 0.5 * geom.min_length() && 2.0 * nu < geom.min_gap(),
          "experiment.nu must be positive and admissible for erosion and dilation");
  const double level = e.number("level", 0.1);
  require(level > 0.0 && level < 1.0, "experiment.level must lie in (0, 1)");
  require(e.number("epsilon", 0.05) > 0.0, "experiment.epsilon must be positive");
  require(e.number("cm_scale", 1.0) > 0.0, "experiment.cm_scale must be positive");
  require(e.number("mu", 0.1) > 0.0, "experiment.mu must be positive");
  require(e.number("restarts", 5) >= 0.0, "experiment.restarts must be non-negative");
  require(e.number("barrier_nu", 1.0) >= 4.0 * c.spacing, "experiment.barrier_nu must be >= 4h");
  require(e.number("lemma_dt", 1.0 / 256.0) > 0.0, "experiment.lemma_dt must be positive");
  require(e.number("comparison_pairs", 10) >= 0.0, "experiment.comparison_pairs must be >= 0");
  for (const char* key :
       {"fit_lo", "fit_hi", "tail_lo", "tail_hi", "ratio_lo", "ratio_limit", "ratio_drift",
        "t_min", "speed_tolerance", "tail_tolerance", "plateau_rate", "decay_rate",
        "scaling_half_width", "scaling_spacing", "comparison_T", "shape_spread"})
    require(e.number(key, 0.0) >= 0.0, std::string("experiment.") + key + " must be non-negative");
  (void)e.flag("plateau_dt_halving", false);
  (void)e.flag("include_front", false);
  (void)e.flag("window_diagnostic", true);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace fkpp
