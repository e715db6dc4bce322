#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qgdirac/concentration.hpp"
#include "qgdirac/energy.hpp"
#include "qgdirac/nehari.hpp"

namespace qgdirac {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat view of an INI-style file: `[section]` headers, `key = value` lines,
// `#` comments.  Keys are addressed as "section.key"; list values are comma
// separated.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  const std::map<std::string, std::string>& entries() const { return values_; }
  // Keys read so far; unknown-key detection for diagnostics.
  std::vector<std::string> unused_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> used_;
  std::string origin_;

  const std::string& raw(const std::string& key) const;
};

struct RunConfig {
  GraphSpec graph;
  std::string graph_preset;
  SolverParams params;
  Nonlinearity nl = Nonlinearity::pure_power(4.0);
  std::optional<Potential> potential;
  std::optional<BarycenterConfig> bary;
  SolverOptions opts;
  std::uint64_t seed = 1;
  int multistarts = 5;
  std::vector<double> lambda_grid;
  std::vector<double> eps_list;
  double lambda_single = 0.0;
  double validate_t_max = 10.0;
  std::string out_dir = "out";
  bool emit_svg = false;

  // All materialized values, for the run manifest.
  std::map<std::string, std::string> materialized;
};

RunConfig load_run_config(const ConfigFile& file);

}  // namespace qgdirac
