#pragma once

// Flat run configuration: every Params field plus numerical and output
// controls, loaded from an INI-style file without sections and overridden by
// command-line flags.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "photobio/photobio.hpp"

namespace photobio::app {

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

struct RunConfig {
  Params params;
  bool chi_given = false;
  bool Gc_given = false;

  // wavenumber range and sampling
  double a = 2.0;
  double a_lo = 0.1;
  double a_hi = 10.0;
  int points = 60;

  // discretisation
  int steps = 2000;
  int reorthonormalize = 50;
  int basic_intervals = 2000;
  int oracle_nodes = 80;
  double tol = 1e-8;

  // single-point evaluations
  double gamma_re = 0.0;
  double gamma_im = 0.0;
  int k = 6;

  // sweeps
  std::vector<double> RT_list{0.0, -250.0, -500.0, -1000.0};
  std::vector<double> Le_list{1.0, 4.0, 10.0, 40.0};
  int workers = 1;
  std::string vary = "none";  // neutral curves over: none | R_T | Le

  // taxis table
  bool table = false;
  double G_lo = 0.0;
  double G_hi = 1.0;
  int G_points = 201;

  // fields and phase portraits
  std::string mode = "critical";  // critical | fastest | given
  int nx = 128;
  int nz = 65;
  std::vector<double> times{0.0, 0.16, 0.32, 0.48};
  double t_end = 4.0;
  double dt = 0.01;
  std::optional<double> probe_x1;
  double probe_x3 = 0.5;
  std::vector<std::pair<double, double>> pairs;  // (a, Ra) for `phase`
  std::string growth = "leading";               // leading | neutral

  std::string output_dir = "out";
  std::string format = "csv";

  ShootingOptions shooting() const { return {steps, reorthonormalize}; }

  NeutralOptions neutral() const {
    NeutralOptions o;
    o.a_lo = a_lo;
    o.a_hi = a_hi;
    o.points = points;
    o.shooting = shooting();
    return o;
  }
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  while (used < v.size() && std::isspace(static_cast<unsigned char>(v[used]))) ++used;
  if (used != v.size()) throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
  return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double x = parse_double(key, v);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) out.push_back(parse_double(key, s));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt12(v[i]);
  return s;
}

}  // namespace detail

/// Keys accepted in config files and as --key flags, in echo order.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "Ra",         "R_T",     "R_m",   "Le",      "Pr",          "U_s",      "hbar",
      "I0",         "chi",     "G_c",   "cell_rate", "a",          "a_lo",     "a_hi",
      "points",     "steps",   "reorthonormalize", "basic_intervals", "oracle_nodes", "tol",
      "gamma_re",   "gamma_im", "k",    "RT_list", "Le_list",     "workers",  "table",
      "G_lo",       "G_hi",    "G_points", "mode",  "nx",          "nz",       "times",
      "t_end",      "dt",      "probe_x1", "probe_x3", "pairs",    "growth",   "vary",
      "output_dir", "format"};
  return keys;
}

/// Applies one key. Params keys are stored raw and resolved in finalize()
/// so that chi / G_c ordering does not matter.
inline void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  auto positive_int = [&](int lo) {
    const int v = parse_int(key, value);
    if (v < lo) throw ConfigError("key '" + key + "' must be >= " + std::to_string(lo));
    return v;
  };
  if (key == "chi") {
    c.params.chi = parse_double(key, value);
    c.chi_given = true;
  } else if (key == "G_c") {
    c.params.Gc = parse_double(key, value);
    c.Gc_given = true;
  } else if (key == "Ra" || key == "R_T" || key == "R_m" || key == "Le" || key == "Pr" || key == "U_s" ||
             key == "hbar" || key == "I0" || key == "cell_rate") {
    try {
      apply_param_key(c.params, key, value);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "a") c.a = parse_double(key, value);
  else if (key == "a_lo") c.a_lo = parse_double(key, value);
  else if (key == "a_hi") c.a_hi = parse_double(key, value);
  else if (key == "points") c.points = positive_int(2);
  else if (key == "steps") c.steps = positive_int(10);
  else if (key == "reorthonormalize") c.reorthonormalize = positive_int(1);
  else if (key == "basic_intervals") c.basic_intervals = positive_int(200);
  else if (key == "oracle_nodes") c.oracle_nodes = positive_int(32);
  else if (key == "tol") c.tol = parse_double(key, value);
  else if (key == "gamma_re") c.gamma_re = parse_double(key, value);
  else if (key == "gamma_im") c.gamma_im = parse_double(key, value);
  else if (key == "k") c.k = positive_int(1);
  else if (key == "RT_list") c.RT_list = parse_list(key, value);
  else if (key == "Le_list") c.Le_list = parse_list(key, value);
  else if (key == "workers") c.workers = positive_int(1);
  else if (key == "vary") {
    if (value != "none" && value != "R_T" && value != "Le") throw ConfigError("key 'vary' must be none, R_T or Le");
    c.vary = value;
  } else if (key == "table") c.table = parse_bool(key, value);
  else if (key == "G_lo") c.G_lo = parse_double(key, value);
  else if (key == "G_hi") c.G_hi = parse_double(key, value);
  else if (key == "G_points") c.G_points = positive_int(2);
  else if (key == "mode") {
    if (value != "critical" && value != "fastest" && value != "given") {
      throw ConfigError("key 'mode' must be critical, fastest or given");
    }
    c.mode = value;
  } else if (key == "nx") c.nx = positive_int(16);
  else if (key == "nz") c.nz = positive_int(16);
  else if (key == "times") c.times = parse_list(key, value);
  else if (key == "t_end") c.t_end = parse_double(key, value);
  else if (key == "dt") c.dt = parse_double(key, value);
  else if (key == "probe_x1") c.probe_x1 = parse_double(key, value);
  else if (key == "probe_x3") c.probe_x3 = parse_double(key, value);
  else if (key == "pairs") {
    c.pairs.clear();
    for (const auto& item : split(value, ',')) {
      const auto ar = split(item, ':');
      if (ar.size() != 2) throw ConfigError("key 'pairs': expected a:Ra entries, got '" + item + "'");
      c.pairs.emplace_back(parse_double(key, ar[0]), parse_double(key, ar[1]));
    }
  } else if (key == "growth") {
    if (value != "leading" && value != "neutral") throw ConfigError("key 'growth' must be leading or neutral");
    c.growth = value;
  } else if (key == "output_dir") c.output_dir = value;
  else if (key == "format") {
    if (value != "csv" && value != "json") throw ConfigError("key 'format' must be csv or json");
    c.format = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Reads a flat INI file (no sections; ';' or '#' comments).
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw ConfigError("config sections are not supported ('[" + key + "]')");
    out.emplace_back(key, node.data());
  }
  return out;
}

/// Resolves chi / G_c and checks cross-field invariants.
inline void finalize(RunConfig& c) {
  if (c.chi_given && c.Gc_given) throw ConfigError("set either chi or G_c, not both");
  try {
    if (c.chi_given) c.params.set_chi(c.params.chi);
    else if (c.Gc_given) c.params.set_Gc(c.params.Gc);
    else c.params.set_Gc(0.68);
    c.params.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(c.a > 0.0)) throw ConfigError("a must be positive");
  if (!(c.a_lo > 0.0 && c.a_hi > c.a_lo)) throw ConfigError("need 0 < a_lo < a_hi");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
  if (!(c.G_hi > c.G_lo && c.G_lo >= 0.0)) throw ConfigError("need 0 <= G_lo < G_hi");
  if (!(c.t_end > 0.0 && c.dt > 0.0)) throw ConfigError("t_end and dt must be positive");
  if (!(c.probe_x3 >= 0.0 && c.probe_x3 <= 1.0)) throw ConfigError("probe_x3 must lie in [0, 1]");
  if (c.times.empty()) throw ConfigError("times must be nonempty");
  if (c.output_dir.empty()) throw ConfigError("output_dir must be nonempty");
}

/// Full config echo (defaults included) in a fixed key order.
inline std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
  using detail::join;
  const Params& p = c.params;
  std::string pairs;
  for (std::size_t i = 0; i < c.pairs.size(); ++i) {
    pairs += (i ? "," : "") + fmt12(c.pairs[i].first) + ":" + fmt12(c.pairs[i].second);
  }
  return {
      {"Ra", fmt12(p.Ra)},
      {"R_T", fmt12(p.R_T)},
      {"R_m", fmt12(p.R_m)},
      {"Le", fmt12(p.Le)},
      {"Pr", fmt12(p.Pr)},
      {"U_s", fmt12(p.U_s)},
      {"hbar", fmt12(p.hbar)},
      {"I0", fmt12(p.I0)},
      {"chi", fmt12(p.chi)},
      {"G_c", fmt12(p.Gc)},
      {"cell_rate", std::string(to_string(p.cell_rate))},
      {"a", fmt12(c.a)},
      {"a_lo", fmt12(c.a_lo)},
      {"a_hi", fmt12(c.a_hi)},
      {"points", std::to_string(c.points)},
      {"steps", std::to_string(c.steps)},
      {"reorthonormalize", std::to_string(c.reorthonormalize)},
      {"basic_intervals", std::to_string(c.basic_intervals)},
      {"oracle_nodes", std::to_string(c.oracle_nodes)},
      {"tol", fmt12(c.tol)},
      {"gamma_re", fmt12(c.gamma_re)},
      {"gamma_im", fmt12(c.gamma_im)},
      {"k", std::to_string(c.k)},
      {"RT_list", join(c.RT_list)},
      {"Le_list", join(c.Le_list)},
      {"workers", std::to_string(c.workers)},
      {"vary", c.vary},
      {"table", c.table ? "true" : "false"},
      {"G_lo", fmt12(c.G_lo)},
      {"G_hi", fmt12(c.G_hi)},
      {"G_points", std::to_string(c.G_points)},
      {"mode", c.mode},
      {"nx", std::to_string(c.nx)},
      {"nz", std::to_string(c.nz)},
      {"times", join(c.times)},
      {"t_end", fmt12(c.t_end)},
      {"dt", fmt12(c.dt)},
      {"probe_x1", c.probe_x1 ? fmt12(*c.probe_x1) : "auto"},
      {"probe_x3", fmt12(c.probe_x3)},
      {"pairs", pairs},
      {"growth", c.growth},
      {"output_dir", c.output_dir},
      {"format", c.format},
  };
}

/// File entries first, then overrides (later wins).
inline RunConfig build_config(const std::optional<std::string>& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig c;
  if (file) {
    for (const auto& [k, v] : read_config_file(*file)) apply_key(c, k, v);
  }
  const auto given = [&](const char* key) {
    return std::any_of(overrides.begin(), overrides.end(), [&](const auto& kv) { return kv.first == key; });
  };
  if (given("chi") && given("G_c")) throw ConfigError("give either chi or G_c, not both");
  for (const auto& [k, v] : overrides) {
    // A flag for chi replaces a G_c from the file and vice versa.
    if (k == "chi") c.Gc_given = false;
    if (k == "G_c") c.chi_given = false;
    apply_key(c, k, v);
  }
  finalize(c);
  return c;
}

}  // namespace photobio::app
