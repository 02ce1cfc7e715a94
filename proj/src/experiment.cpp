#include "dynlap/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dynlap/cg.hpp"
#include "dynlap/errors.hpp"
#include "dynlap/fem1d.hpp"
#include "dynlap/output.hpp"
#include "dynlap/parallel.hpp"
#include "dynlap/to.hpp"

namespace dynlap {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Bumped whenever cached payload semantics change.
constexpr const char* kCacheSchema = "dynlap-3";

int effective_order(int requested, int degree) {
  return requested > 0 ? requested : default_quadrature_order(degree);
}

// Everything that changes flow evaluations.
CacheKey flow_key(const ExperimentConfig& c, const std::string& what) {
  CacheKey key;
  key.add(kCacheSchema).add(what).add(c.system);
  for (const auto& [k, v] : c.params) key.add(k).add(v);
  key.add(c.integrator.rel_tol).add(c.integrator.abs_tol)
      .add(static_cast<std::int64_t>(c.integrator.max_steps)).add(c.fd.step);
  return key;
}

std::vector<Point2> unpack_points(const std::vector<double>& data) {
  std::vector<Point2> out(data.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) out[i] = {data[2 * i], data[2 * i + 1]};
  return out;
}

std::string path_in(const ExperimentConfig& c, const std::string& suffix) {
  return (std::filesystem::path(c.output_dir) / (c.name + suffix)).string();
}

}  // namespace

FlowMap make_system_flow(const ExperimentConfig& config) {
  if (config.system == "shift1d") throw ConfigError("shift1d has no planar flow map");
  return make_flow(config.system, config.params, config.integrator);
}

std::vector<double> cg_times(const FlowMap& flow, const ExperimentConfig& config) {
  if (config.system == "standard_map" || config.system == "identity") return {0.0, 1.0};
  std::vector<double> t(config.time_samples);
  for (int i = 0; i < config.time_samples; ++i)
    t[i] = flow.t_begin + (flow.t_end - flow.t_begin) * i / (config.time_samples - 1);
  t.back() = flow.t_end;
  return t;
}

Discretization discretize(const ExperimentConfig& config, const FlowMap& flow, Scheme scheme,
                          int degree, const MeshSize& size, int quad_order, Cache& cache) {
  auto mesh = std::make_shared<Mesh>(build_regular_mesh(size.nx, size.ny, flow.domain));
  auto space = std::make_shared<const FESpace>(mesh, degree);
  Discretization d;
  d.space = space;
  const int order = effective_order(quad_order, degree);
  if (scheme == Scheme::cg) {
    const auto points = quadrature_points(*space, order);
    const auto times = cg_times(flow, config);
    CacheKey key = flow_key(config, "cg_tensors");
    key.add(std::span<const double>(times)).add(std::span<const Point2>(points));
    const auto data = cache.get_or_compute(key, [&] {
      const auto tensors = cg_tensors(flow, times, points, config.fd);
      std::vector<double> out;
      out.reserve(3 * tensors.size());
      for (const auto& a : tensors) {
        out.push_back(a(0, 0));
        out.push_back(a(0, 1));
        out.push_back(a(1, 1));
      }
      return out;
    });
    std::vector<Tensor2> tensors(points.size());
    for (size_t i = 0; i < tensors.size(); ++i)
      tensors[i] << data[3 * i], data[3 * i + 1], data[3 * i + 1], data[3 * i + 2];
    d.D = assemble_stiffness(*space, tensors, order);
    d.M = assemble_mass(*space);
    d.quadrature_points = static_cast<long long>(points.size());
    return d;
  }

  const bool adaptive = scheme == Scheme::to_adaptive;
  const auto& nodes = space->dof_coords();
  CacheKey key = flow_key(config, adaptive ? "forward_images" : "preimages");
  key.add(flow.t_begin).add(flow.t_end).add(std::span<const Point2>(nodes));
  const auto data = cache.get_or_compute(key, [&] {
    std::vector<double> out(2 * nodes.size());
    parallel_for(nodes.size(), [&](size_t i) {
      const Point2 q = adaptive ? flow(nodes[i]) : flow.inverse_map(nodes[i]);
      out[2 * i] = q.x();
      out[2 * i + 1] = q.y();
    });
    return out;
  });
  const auto images = unpack_points(data);
  const TOProblem p = make_to_problem(space, images,
                                      adaptive ? TOVariant::adaptive : TOVariant::non_adaptive, order);
  d.D = assemble_to_stiffness(p);
  d.M = p.M;
  return d;
}

EigenResult cached_eigenpairs(const ExperimentConfig& config, const Discretization& disc,
                              const std::string& description, int count, Cache& cache) {
  CacheKey key = flow_key(config, "eigenpairs");
  key.add(description).add(static_cast<std::int64_t>(count))
      .add(static_cast<std::int64_t>(config.seed)).add(static_cast<std::int64_t>(disc.space->n_dofs()));
  key.add(std::span<const double>(disc.D.lower().valuePtr(), disc.D.lower().nonZeros()));
  const int n = disc.space->n_dofs();
  const auto data = cache.get_or_compute(key, [&] {
    EigenSettings s;
    s.seed = config.seed;
    const EigenResult r = solve_smallest(disc.D, disc.M, count, s);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(count) * (n + 2));
    for (int i = 0; i < count; ++i) out.push_back(r.eigenvalues[i]);
    for (int i = 0; i < count; ++i) out.push_back(r.residuals[i]);
    out.insert(out.end(), r.vectors.data(), r.vectors.data() + r.vectors.size());
    return out;
  });
  if (data.size() != static_cast<size_t>(count) * (n + 2))
    throw NumericalError("cached eigenpairs have the wrong size");
  EigenResult r;
  r.eigenvalues = Eigen::Map<const Eigen::VectorXd>(data.data(), count);
  r.residuals = Eigen::Map<const Eigen::VectorXd>(data.data() + count, count);
  r.vectors = Eigen::Map<const Eigen::MatrixXd>(data.data() + 2 * count, n, count);
  return r;
}

ReferenceSolution compute_reference(const ExperimentConfig& config, const FlowMap& flow,
                                    Cache& cache) {
  const int order = effective_order(config.reference_quad_order, config.reference_degree);
  const Discretization d = discretize(config, flow, Scheme::cg, config.reference_degree,
                                      config.reference_mesh, order, cache);
  const std::string desc = "reference cg P" + std::to_string(config.reference_degree) + " " +
                           config.reference_mesh.str() + " q" + std::to_string(order);
  const EigenResult r = cached_eigenpairs(config, d, desc, config.eigenspace_dim + 1, cache);
  ReferenceSolution ref;
  ref.space = d.space;
  ref.mass = d.M;
  ref.eigenvalues = r.eigenvalues;
  ref.eigenvectors = r.vectors;
  ref.provenance = CacheKey().add(config.describe()).add(desc).digest();
  return ref;
}

namespace {

void add_slopes(ConvergenceResult& result, std::ostream& log) {
  std::vector<std::pair<std::string, int>> groups;
  for (const auto& r : result.records) {
    const std::pair<std::string, int> g{r.scheme, r.degree};
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto& [scheme, degree] : groups) {
    std::vector<ConvergenceRecord> rs;
    for (const auto& r : result.records)
      if (r.scheme == scheme && r.degree == degree) rs.push_back(r);
    SlopeSummary s{scheme, degree, std::nan(""), std::nan("")};
    try {
      s.eigval_slope = fit_slope(rs, ErrorKind::eigenvalue);
    } catch (const ConfigError& e) {
      log << "slope unavailable (" << scheme << " P" << degree << " eigenvalue): " << e.what() << "\n";
    }
    try {
      s.eigspace_slope = fit_slope(rs, ErrorKind::eigenspace);
    } catch (const ConfigError& e) {
      log << "slope unavailable (" << scheme << " P" << degree << " eigenspace): " << e.what() << "\n";
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "slope %s P%d: eigenvalue %.2f, eigenspace %.2f\n",
                  scheme.c_str(), degree, s.eigval_slope, s.eigspace_slope);
    log << buf;
    result.slopes.push_back(s);
  }
}

void write_outputs(ConvergenceResult& result, const ExperimentConfig& config,
                   const std::string& eigvec_label) {
  std::ostringstream csv;
  write_convergence_csv(csv, result.records);
  result.csv_path = path_in(config, "_convergence.csv");
  write_text_file(result.csv_path, csv.str());

  std::vector<PlotSeries> series;
  for (const auto& s : result.slopes) {
    PlotSeries ev, es;
    char buf[160];
    std::snprintf(buf, sizeof buf, "P%d %s eigenvalue (%.1f)", s.degree, s.scheme.c_str(), s.eigval_slope);
    ev.label = buf;
    std::snprintf(buf, sizeof buf, "P%d %s %s (%.1f)", s.degree, s.scheme.c_str(),
                  eigvec_label.c_str(), s.eigspace_slope);
    es.label = buf;
    es.dashed = true;
    for (const auto& r : result.records) {
      if (r.scheme != s.scheme || r.degree != s.degree) continue;
      ev.x.push_back(r.h);
      ev.y.push_back(r.eigval_rel_err);
      es.x.push_back(r.h);
      es.y.push_back(r.eigspace_err);
    }
    series.push_back(ev);
    series.push_back(es);
  }
  result.svg_path = path_in(config, "_convergence.svg");
  write_text_file(result.svg_path, loglog_svg(config.name, "h", "error", series));
}

}  // namespace

ConvergenceResult run_convergence(const ExperimentConfig& config, Cache& cache, std::ostream& log) {
  if (config.system == "shift1d") return run_shift1d(config, log);
  if (config.meshes.empty()) throw ConfigError("config lists no meshes");
  const FlowMap flow = make_system_flow(config);
  log << "# " << config.describe() << "\n";
  log << "# reference: CG P" << config.reference_degree << " on " << config.reference_mesh.str()
      << " (desk-scale reference)\n";

  auto t0 = std::chrono::steady_clock::now();
  const ReferenceSolution ref = compute_reference(config, flow, cache);
  const int dim = config.eigenspace_dim;
  ConvergenceResult result;
  result.reference_eigenvalue =
      config.has_reference_eigenvalue ? config.reference_eigenvalue : ref.eigenvalues[1];
  const Eigen::MatrixXd ref_basis = ref.eigenvectors.middleCols(1, dim);
  log << "reference eigenvalues:";
  for (int i = 0; i < ref.eigenvalues.size(); ++i) log << " " << ref.eigenvalues[i];
  log << " (" << seconds_since(t0) << " s)\n";

  for (const Scheme scheme : config.schemes) {
    for (const int degree : config.degrees) {
      for (const MeshSize& size : config.meshes) {
        t0 = std::chrono::steady_clock::now();
        ConvergenceRecord rec;
        rec.scheme = to_string(scheme);
        rec.degree = degree;
        rec.eigval_rel_err = rec.eigspace_err = std::nan("");
        try {
          const Discretization d = discretize(config, flow, scheme, degree, size, config.quad_order, cache);
          rec.h = d.space->mesh().mesh_width();
          const std::string desc = std::string(to_string(scheme)) + " P" + std::to_string(degree) +
                                   " " + size.str() + " q" + std::to_string(config.quad_order);
          const EigenResult r = cached_eigenpairs(config, d, desc, dim + 1, cache);
          rec.eigval_rel_err =
              std::abs(r.eigenvalues[1] - result.reference_eigenvalue) / std::abs(result.reference_eigenvalue);
          const Eigen::MatrixXd fine =
              interpolate_to_fine(*d.space, Eigen::MatrixXd(r.vectors.middleCols(1, dim)), *ref.space);
          rec.eigspace_err = subspace_error(ref_basis, m_orthonormalize(fine, ref.mass), ref.mass);
          log << rec.scheme << " P" << degree << " " << size.str() << " h=" << rec.h
              << " mu1=" << r.eigenvalues[1] << " eigval_err=" << rec.eigval_rel_err
              << " eigspace_err=" << rec.eigspace_err << " (" << seconds_since(t0) << " s)\n";
        } catch (const ConfigError&) {
          throw;
        } catch (const std::exception& e) {
          if (rec.h == 0.0)
            rec.h = build_regular_mesh(size.nx, size.ny, flow.domain).mesh_width();
          log << rec.scheme << " P" << degree << " " << size.str() << " failed: " << e.what() << "\n";
        }
        result.records.push_back(rec);
      }
    }
  }
  add_slopes(result, log);
  write_outputs(result, config, "eigenspace");
  return result;
}

ConvergenceResult run_shift1d(const ExperimentConfig& config, std::ostream& log) {
  log << "# " << config.describe() << "\n";
  log << "# Fourier errors by the trapezoid rule with " << config.trapezoid_points
      << " points (desk scale)\n";
  const double alpha = config.alpha;
  ConvergenceResult result;
  result.reference_eigenvalue = 4.0 * std::numbers::pi * std::numbers::pi;
  for (const int degree : config.degrees) {
    for (const int level : config.levels) {
      ConvergenceRecord rec;
      rec.scheme = "to_nonadaptive";
      rec.degree = degree;
      rec.h = std::ldexp(1.0, -level);
      rec.eigval_rel_err = rec.eigspace_err = std::nan("");
      try {
        const CircleSpace space(1 << level, degree);
        const SparseSymMatrix M = assemble_mass(space);
        const SparseSymMatrix D0 = assemble_stiffness(space);
        const auto A = collocation_matrix(space, space, [alpha](double x) { return shift_map_1d(x, -alpha); });
        const SparseSymMatrix D = to_stiffness(D0, D0, A.matrix);
        EigenSettings s;
        s.seed = config.seed;
        const EigenResult r = solve_smallest(D, M, 2, s);
        const ShiftErrors e =
            shift1d_fourier_error(space, r.vectors.col(1), r.eigenvalues[1], config.trapezoid_points);
        rec.eigval_rel_err = e.eigval_rel_error;
        rec.eigspace_err = e.eigvec_error;
        log << "P" << degree << " h=2^-" << level << " mu1=" << r.eigenvalues[1]
            << " eigval_err=" << rec.eigval_rel_err << " eigvec_err=" << rec.eigspace_err << "\n";
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        log << "P" << degree << " h=2^-" << level << " failed: " << e.what() << "\n";
      }
      result.records.push_back(rec);
    }
  }
  add_slopes(result, log);
  write_outputs(result, config, "eigenvector");
  return result;
}

CoherentSetsResult run_coherent_sets(const ExperimentConfig& config, Cache& cache, std::ostream& log) {
  if (config.meshes.empty()) throw ConfigError("config lists no meshes");
  const FlowMap flow = make_system_flow(config);
  const Scheme scheme = config.schemes.front();
  const int degree = config.degrees.front();
  const MeshSize size = config.meshes.front();
  log << "# " << config.describe() << "\n";
  const auto t0 = std::chrono::steady_clock::now();
  const Discretization d = discretize(config, flow, scheme, degree, size, config.quad_order, cache);
  const int count = std::max(config.clusters, 2);
  const std::string desc = std::string(to_string(scheme)) + " P" + std::to_string(degree) + " " +
                           size.str() + " q" + std::to_string(config.quad_order);
  const EigenResult r = cached_eigenpairs(config, d, desc, count, cache);
  CoherentSetsResult out;
  out.eigenvalues = r.eigenvalues;
  out.quadrature_points = d.quadrature_points;
  out.partition = coherent_partition(*d.space, r.vectors, config.clusters, config.seed,
                                     config.sample_nx, config.sample_ny);
  log << to_string(scheme) << " P" << degree << " on " << size.str() << ": " << d.space->n_dofs()
      << " dofs, " << d.quadrature_points << " quadrature points\n";
  log << "eigenvalues (dynamic Laplacian, lambda = -mu):";
  for (int i = 0; i < r.eigenvalues.size(); ++i) log << " " << -r.eigenvalues[i];
  log << "\n" << config.clusters << "-partition on " << config.sample_nx << "x" << config.sample_ny
      << " grid (" << seconds_since(t0) << " s)\n";

  std::ostringstream csv;
  write_partition_csv(csv, out.partition);
  out.csv_path = path_in(config, "_partition.csv");
  write_text_file(out.csv_path, csv.str());
  out.svg_path = path_in(config, "_partition.svg");
  write_text_file(out.svg_path, partition_svg(config.name, out.partition, config.sample_nx, config.sample_ny));
  return out;
}

}  // namespace dynlap
