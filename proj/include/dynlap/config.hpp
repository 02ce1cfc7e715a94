#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dynlap/dynamics.hpp"

namespace dynlap {

/// Flat `key = value` configuration; `#` starts a comment.
class ConfigMap {
 public:
  static ConfigMap parse(std::istream& is, const std::string& source = "<input>");
  static ConfigMap load(const std::string& path);

  /// Applies a `key=value` override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Mesh size written `N` (N x N nodes) or `NxM`.
struct MeshSize {
  int nx = 0;
  int ny = 0;
  std::string str() const;
  static MeshSize parse(const std::string& text);
};

enum class Scheme { cg, to_nonadaptive, to_adaptive };
const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& text);

struct ExperimentConfig {
  std::string system = "standard_map";
  SystemParams params;
  std::vector<Scheme> schemes = {Scheme::cg};
  std::vector<int> degrees = {1};
  std::vector<MeshSize> meshes;
  /// 0 selects 2k - 1.
  int quad_order = 0;
  IntegratorSettings integrator;
  FDSettings fd;
  /// Number of samples in [t_begin, t_end] for ODE systems (at least 2).
  int time_samples = 2;

  MeshSize reference_mesh{257, 257};
  int reference_degree = 2;
  int reference_quad_order = 0;
  /// If set, replaces the computed reference eigenvalue.
  double reference_eigenvalue = 0.0;
  bool has_reference_eigenvalue = false;
  /// Dimension of the first nontrivial eigenspace.
  int eigenspace_dim = 1;

  int clusters = 8;
  std::uint64_t seed = 1;
  int sample_nx = 200;
  int sample_ny = 60;

  // 1D shift study
  double alpha = 0.15;
  std::vector<int> levels = {4, 5, 6, 7, 8, 9};
  int trapezoid_points = 1000000;

  std::string output_dir = ".";
  std::string name = "experiment";
  bool use_cache = true;
  std::string cache_dir;

  /// Throws ConfigError on unknown keys or inconsistent values.
  static ExperimentConfig from_map(const ConfigMap& map);
  /// Canonical text form used in cache keys and output headers.
  std::string describe() const;
};

}  // namespace dynlap
