#include "qgdirac/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qgdirac {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
  ConfigFile cf;
  cf.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cf.values_.count(full))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + full);
    cf.values_[full] = value;
  }
  return cf;
}

bool ConfigFile::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& ConfigFile::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(origin_ + ": missing required key [" + key + "]");
  used_[key] = true;
  return it->second;
}

std::string ConfigFile::get_string(const std::string& key) const { return raw(key); }

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double ConfigFile::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key [" + key + "] is not a number: '" + v + "'");
  }
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long ConfigFile::get_int(const std::string& key) const {
  const double d = get_double(key);
  const long n = static_cast<long>(std::llround(d));
  if (std::abs(d - n) > 1e-9)
    throw ConfigError(origin_ + ": key [" + key + "] is not an integer");
  return n;
}

long ConfigFile::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> ConfigFile::get_double_list(const std::string& key) const {
  const std::string v = raw(key);
  std::vector<double> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key [" + key + "] has a non-numeric list entry: '" + item +
                        "'");
    }
  }
  if (out.empty()) throw ConfigError(origin_ + ": key [" + key + "] is an empty list");
  return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& key,
                                                const std::vector<double>& fallback) const {
  return has(key) ? get_double_list(key) : fallback;
}

std::vector<std::string> ConfigFile::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

namespace {

GraphSpec graph_from_config(const ConfigFile& f, std::string& preset_name) {
  preset_name = f.get_string("graph.preset");
  if (preset_name == "interval") {
    return preset_interval(f.get_double("graph.length", M_PI));
  }
  if (preset_name == "star") {
    return preset_star(static_cast<int>(f.get_int("graph.legs", 3)),
                       f.get_double("graph.truncation_length", 20.0));
  }
  if (preset_name == "tadpole") {
    return preset_tadpole(f.get_double("graph.loop_length", 2.0),
                          f.get_double("graph.truncation_length", 15.0));
  }
  throw ConfigError("unknown [graph.preset] '" + preset_name +
                    "' (expected interval | star | tadpole)");
}

}  // namespace

RunConfig load_run_config(const ConfigFile& f) {
  RunConfig rc;
  rc.graph = graph_from_config(f, rc.graph_preset);

  rc.params.m = f.get_double("solver.m");
  rc.params.c = f.get_double("solver.c");
  rc.params.h_target = f.get_double("solver.h_target", 0.1);
  rc.params.eig_tol = f.get_double("solver.eig_tol", 1e-9);
  rc.params.check();

  const std::string family = f.get_string("nonlinearity.family", "pure_power");
  if (family == "pure_power") {
    rc.nl = Nonlinearity::pure_power(f.get_double("nonlinearity.p", 4.0),
                                     f.get_double("nonlinearity.a", 1.0));
  } else if (family == "power_sum") {
    rc.nl = Nonlinearity::power_sum(f.get_double_list("nonlinearity.p"),
                                    f.get_double_list("nonlinearity.a"));
  } else {
    throw ConfigError("unknown [nonlinearity.family] '" + family + "'");
  }

  if (f.has("potential.v_infty")) {
    const double v_infty = f.get_double("potential.v_infty");
    const long n_wells = f.get_int("potential.wells");
    std::vector<Well> wells;
    for (long i = 1; i <= n_wells; ++i) {
      const std::string base = "potential.well." + std::to_string(i) + ".";
      Well w;
      w.center.edge = static_cast<int>(f.get_int(base + "edge"));
      w.center.s = f.get_double(base + "s");
      w.depth = f.get_double(base + "depth");
      w.width = f.get_double(base + "width");
      wells.push_back(w);
    }
    rc.potential = Potential(v_infty, std::move(wells));
  }

  rc.opts.tol_fiber = f.get_double("run.tol_fiber", 1e-10);
  rc.opts.tol_sphere = f.get_double("run.tol_sphere", 1e-8);
  rc.opts.tol_nehari = f.get_double("run.tol_nehari", 1e-7);
  rc.opts.max_iter_fiber = static_cast<int>(f.get_int("run.max_iter_fiber", 500));
  rc.opts.max_iter_sphere = static_cast<int>(f.get_int("run.max_iter_sphere", 2000));
  rc.opts.neg_band = static_cast<int>(f.get_int("run.neg_band", 0));
  rc.opts.seed_band = static_cast<int>(f.get_int("run.seed_band", 30));
  rc.seed = static_cast<std::uint64_t>(f.get_int("run.seed", 1));
  rc.multistarts = static_cast<int>(f.get_int("run.multistarts", 5));
  rc.lambda_grid = f.get_double_list("run.lambda_grid", {-0.5, -0.25, 0.0, 0.25, 0.5});
  rc.eps_list = f.get_double_list("run.eps_list", {0.4, 0.2, 0.1});
  rc.lambda_single = f.get_double("run.lambda", 0.0);
  rc.validate_t_max = f.get_double("run.validate_t_max", 10.0);
  rc.out_dir = f.get_string("run.out_dir", "out");
  rc.emit_svg = f.get_int("run.emit_svg", 0) != 0;

  const double mc2 = rc.params.mc2();
  for (double l : rc.lambda_grid)
    if (std::abs(l) >= mc2) throw ConfigError("[run.lambda_grid] entry outside (-mc^2, mc^2)");
  if (std::abs(rc.lambda_single) >= mc2)
    throw ConfigError("[run.lambda] outside (-mc^2, mc^2)");
  for (double e : rc.eps_list)
    if (!(e > 0.0)) throw ConfigError("[run.eps_list] entries must be positive");

  if (f.has("barycenter.r0") || f.has("barycenter.rho0")) {
    if (!rc.potential) throw ConfigError("[barycenter] section requires a potential");
    BarycenterConfig bc;
    // minima from the configured wells (embedded through the graph built later)
    bc.r0 = f.get_double("barycenter.r0");
    bc.rho0 = f.get_double("barycenter.rho0");
    rc.bary = bc;  // minima are filled in once the graph exists
  }

  // Materialize every value the run will use.
  auto put = [&rc](const std::string& k, const std::string& v) { rc.materialized[k] = v; };
  auto putd = [&put](const std::string& k, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    put(k, os.str());
  };
  put("graph.preset", rc.graph_preset);
  putd("solver.m", rc.params.m);
  putd("solver.c", rc.params.c);
  putd("solver.h_target", rc.params.h_target);
  putd("solver.eig_tol", rc.params.eig_tol);
  put("nonlinearity", rc.nl.describe());
  putd("run.tol_fiber", rc.opts.tol_fiber);
  putd("run.tol_sphere", rc.opts.tol_sphere);
  putd("run.tol_nehari", rc.opts.tol_nehari);
  put("run.max_iter_fiber", std::to_string(rc.opts.max_iter_fiber));
  put("run.max_iter_sphere", std::to_string(rc.opts.max_iter_sphere));
  put("run.neg_band", std::to_string(rc.opts.neg_band));
  put("run.seed", std::to_string(rc.seed));
  put("run.multistarts", std::to_string(rc.multistarts));
  put("run.out_dir", rc.out_dir);
  return rc;
}

}  // namespace qgdirac
