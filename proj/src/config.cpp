#include "dynlap/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dynlap/errors.hpp"

namespace dynlap {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& is, const std::string& source) {
  ConfigMap m;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    m.values_[key] = trim(line.substr(eq + 1));
  }
  return m;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void ConfigMap::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty())
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string ConfigMap::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string ConfigMap::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string v = require(key);
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
}

long long ConfigMap::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string v = require(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
  return out;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = require(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> ConfigMap::get_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::string> out;
  std::stringstream ss(require(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' is an empty list");
  return out;
}

std::string MeshSize::str() const { return std::to_string(nx) + "x" + std::to_string(ny); }

MeshSize MeshSize::parse(const std::string& text) {
  MeshSize m;
  const auto x = text.find('x');
  try {
    size_t pos = 0;
    if (x == std::string::npos) {
      m.nx = m.ny = std::stoi(text, &pos);
      if (pos != text.size()) throw ConfigError("");
    } else {
      m.nx = std::stoi(text.substr(0, x), &pos);
      if (pos != x) throw ConfigError("");
      const std::string rest = text.substr(x + 1);
      m.ny = std::stoi(rest, &pos);
      if (pos != rest.size()) throw ConfigError("");
    }
  } catch (const std::exception&) {
    throw ConfigError("mesh size '" + text + "' must be N or NxM");
  }
  if (m.nx < 2 || m.ny < 2) throw ConfigError("mesh size '" + text + "' needs at least 2 nodes per side");
  return m;
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::cg:
      return "cg";
    case Scheme::to_nonadaptive:
      return "to_nonadaptive";
    case Scheme::to_adaptive:
      return "to_adaptive";
  }
  return "?";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "cg") return Scheme::cg;
  if (text == "to_nonadaptive") return Scheme::to_nonadaptive;
  if (text == "to_adaptive") return Scheme::to_adaptive;
  throw ConfigError("unknown scheme '" + text + "' (cg, to_nonadaptive, to_adaptive)");
}

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& map) {
  static const std::set<std::string> known = {
      "system",         "scheme",          "schemes",          "degree",
      "degrees",        "meshes",          "quad_order",       "rel_tol",
      "abs_tol",        "max_steps",       "fd_step",          "time_samples",
      "reference_mesh", "reference_degree", "reference_quad_order",
      "reference_eigenvalue", "eigenspace_dim", "clusters",  "seed",
      "sample_grid",    "alpha",           "levels",           "trapezoid_points",
      "output_dir",     "name",            "cache",            "cache_dir"};
  for (const auto& [key, value] : map.values()) {
    if (key.rfind("param.", 0) == 0) continue;
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  ExperimentConfig c;
  c.system = map.get("system", c.system);
  static const std::set<std::string> systems = {"identity", "standard_map", "cylinder", "bickley",
                                                "shift1d"};
  if (!systems.count(c.system)) throw ConfigError("unknown system '" + c.system + "'");
  for (const auto& [key, value] : map.values())
    if (key.rfind("param.", 0) == 0) c.params[key.substr(6)] = map.get_double(key, 0.0);

  const auto schemes = map.get_list(map.has("schemes") ? "schemes" : "scheme", {"cg"});
  c.schemes.clear();
  for (const auto& s : schemes) c.schemes.push_back(parse_scheme(s));
  c.degrees.clear();
  for (const auto& d : map.get_list(map.has("degrees") ? "degrees" : "degree", {"1"})) {
    if (d != "1" && d != "2") throw ConfigError("unsupported Lagrange degree " + d);
    c.degrees.push_back(std::stoi(d));
  }
  for (const Scheme s : c.schemes)
    for (const int d : c.degrees)
      if (s == Scheme::to_adaptive && d != 1)
        throw ConfigError("adaptive TO is defined for P1 only");
  for (const auto& m : map.get_list("meshes", {})) c.meshes.push_back(MeshSize::parse(m));
  for (size_t i = 1; i < c.meshes.size(); ++i)
    if (c.meshes[i].nx <= c.meshes[i - 1].nx || c.meshes[i].ny <= c.meshes[i - 1].ny)
      throw ConfigError("mesh sizes must strictly increase");

  c.quad_order = static_cast<int>(map.get_int("quad_order", 0));
  c.integrator.rel_tol = map.get_double("rel_tol", c.integrator.rel_tol);
  c.integrator.abs_tol = map.get_double("abs_tol", c.integrator.abs_tol);
  c.integrator.max_steps = static_cast<int>(map.get_int("max_steps", c.integrator.max_steps));
  c.integrator.validate();
  c.fd.step = map.get_double("fd_step", c.fd.step);
  if (!(c.fd.step > 0.0) || c.fd.step >= 1.0) throw ConfigError("fd_step must lie in (0, 1)");
  c.time_samples = static_cast<int>(map.get_int("time_samples", c.time_samples));
  if (c.time_samples < 2) throw ConfigError("time_samples must be at least 2");

  c.reference_mesh = MeshSize::parse(map.get("reference_mesh", "257"));
  c.reference_degree = static_cast<int>(map.get_int("reference_degree", 2));
  if (c.reference_degree != 1 && c.reference_degree != 2)
    throw ConfigError("unsupported reference degree");
  c.reference_quad_order = static_cast<int>(map.get_int("reference_quad_order", 0));
  if (map.has("reference_eigenvalue")) {
    c.has_reference_eigenvalue = true;
    c.reference_eigenvalue = map.get_double("reference_eigenvalue", 0.0);
  }
  for (const auto& m : c.meshes)
    if (m.nx >= c.reference_mesh.nx || m.ny >= c.reference_mesh.ny)
      throw ConfigError("reference mesh must be finer than every test mesh");
  c.eigenspace_dim = static_cast<int>(map.get_int("eigenspace_dim", 1));
  if (c.eigenspace_dim < 1) throw ConfigError("eigenspace_dim must be positive");

  c.clusters = static_cast<int>(map.get_int("clusters", c.clusters));
  if (c.clusters < 1) throw ConfigError("clusters must be positive");
  c.seed = static_cast<std::uint64_t>(map.get_int("seed", 1));
  const MeshSize grid = MeshSize::parse(map.get("sample_grid", "200x60"));
  c.sample_nx = grid.nx;
  c.sample_ny = grid.ny;

  c.alpha = map.get_double("alpha", c.alpha);
  if (map.has("levels")) {
    c.levels.clear();
    for (const auto& l : map.get_list("levels", {})) {
      const int e = std::stoi(l);
      if (e < 1 || e > 20) throw ConfigError("levels must lie in 1..20");
      c.levels.push_back(e);
    }
  }
  c.trapezoid_points = static_cast<int>(map.get_int("trapezoid_points", c.trapezoid_points));
  if (c.trapezoid_points < 8) throw ConfigError("trapezoid_points must be at least 8");

  c.output_dir = map.get("output_dir", c.output_dir);
  c.name = map.get("name", c.system);
  c.use_cache = map.get_bool("cache", true);
  c.cache_dir = map.get("cache_dir", "");
  if (c.quad_order < 0 || c.quad_order > 8 || c.reference_quad_order < 0 ||
      c.reference_quad_order > 8)
    throw ConfigError("quadrature orders must lie in 1..8 (0 = default)");
  return c;
}

std::string ExperimentConfig::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "system=" << system;
  for (const auto& [k, v] : params) os << " param." << k << "=" << v;
  os << " schemes=";
  for (size_t i = 0; i < schemes.size(); ++i) os << (i ? "," : "") << to_string(schemes[i]);
  os << " degrees=";
  for (size_t i = 0; i < degrees.size(); ++i) os << (i ? "," : "") << degrees[i];
  os << " meshes=";
  for (size_t i = 0; i < meshes.size(); ++i) os << (i ? "," : "") << meshes[i].str();
  os << " quad_order=" << quad_order << " rel_tol=" << integrator.rel_tol
     << " abs_tol=" << integrator.abs_tol << " max_steps=" << integrator.max_steps
     << " fd_step=" << fd.step << " time_samples=" << time_samples
     << " reference_mesh=" << reference_mesh.str() << " reference_degree=" << reference_degree
     << " reference_quad_order=" << reference_quad_order;
  if (has_reference_eigenvalue) os << " reference_eigenvalue=" << reference_eigenvalue;
  os << " eigenspace_dim=" << eigenspace_dim << " clusters=" << clusters << " seed=" << seed
     << " sample_grid=" << sample_nx << "x" << sample_ny << " alpha=" << alpha << " levels=";
  for (size_t i = 0; i < levels.size(); ++i) os << (i ? "," : "") << levels[i];
  os << " trapezoid_points=" << trapezoid_points;
  return os.str();
}

}  // namespace dynlap
