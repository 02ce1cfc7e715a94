// Command-line driver for the convergence studies and coherent-set extraction.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dynlap/errors.hpp"
#include "dynlap/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

dynlap::ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& sets,
                                     const std::string& output_dir) {
  dynlap::ConfigMap map;
  if (!path.empty()) map = dynlap::ConfigMap::load(path);
  for (const auto& s : sets) map.set(s);
  if (!output_dir.empty()) map.set("output_dir", output_dir);
  return dynlap::ExperimentConfig::from_map(map);
}

dynlap::Cache make_cache(const dynlap::ExperimentConfig& c) {
  return dynlap::Cache(c.cache_dir, c.use_cache);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-element discretizations of the dynamic Laplacian"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  std::vector<std::string> sets;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key = value config file");
    sub->add_option("-s,--set", sets, "override, key=value (repeatable)");
    sub->add_option("-o,--output", output_dir, "output directory");
  };

  auto* converge = app.add_subcommand("converge", "convergence study: CSV of errors, log-log SVG");
  add_common(converge);
  auto* coherent = app.add_subcommand("coherent-sets", "k-means partition of the leading eigenvectors");
  add_common(coherent);
  auto* shift = app.add_subcommand("shift1d", "transfer-operator study of the circle shift");
  add_common(shift);
  auto* cache_cmd = app.add_subcommand("cache", "inspect or clear the flow/eigenpair cache");
  std::string cache_action = "inspect";
  std::string cache_dir;
  cache_cmd->add_option("action", cache_action, "inspect | clear")
      ->check(CLI::IsMember({"inspect", "clear"}));
  cache_cmd->add_option("--dir", cache_dir, "cache directory (default: $DYNLAP_CACHE_DIR or ~/.cache/dynlap)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (converge->parsed()) {
      const auto config = load_config(config_path, sets, output_dir);
      auto cache = make_cache(config);
      const auto r = dynlap::run_convergence(config, cache, std::cout);
      std::cout << "wrote " << r.csv_path << " and " << r.svg_path << "\n";
      for (const auto& rec : r.records)
        if (std::isnan(rec.eigval_rel_err)) return kExitNumerical;
    } else if (shift->parsed()) {
      sets.push_back("system=shift1d");
      const auto config = load_config(config_path, sets, output_dir);
      const auto r = dynlap::run_shift1d(config, std::cout);
      std::cout << "wrote " << r.csv_path << " and " << r.svg_path << "\n";
      for (const auto& rec : r.records)
        if (std::isnan(rec.eigval_rel_err)) return kExitNumerical;
    } else if (coherent->parsed()) {
      const auto config = load_config(config_path, sets, output_dir);
      auto cache = make_cache(config);
      const auto r = dynlap::run_coherent_sets(config, cache, std::cout);
      std::cout << "wrote " << r.csv_path << " and " << r.svg_path << "\n";
    } else if (cache_cmd->parsed()) {
      dynlap::Cache cache(cache_dir);
      if (cache_action == "clear") {
        std::cout << "removed " << cache.clear() << " entries from " << cache.dir().string() << "\n";
      } else {
        const auto [n, bytes] = cache.stats();
        std::cout << cache.dir().string() << ": " << n << " entries, " << bytes << " bytes\n";
      }
    }
  } catch (const dynlap::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dynlap::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const dynlap::OutOfDomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const dynlap::GeometryError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
