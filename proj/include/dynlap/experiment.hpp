#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dynlap/analysis.hpp"
#include "dynlap/cache.hpp"
#include "dynlap/config.hpp"
#include "dynlap/dynamics.hpp"
#include "dynlap/eigensolver.hpp"
#include "dynlap/fem.hpp"

namespace dynlap {

/// Flow of the configured system (not valid for shift1d).
FlowMap make_system_flow(const ExperimentConfig& config);

/// Times averaged by the CG tensor: {0, 1} for the standard map, otherwise
/// `time_samples` equally spaced samples of [t_begin, t_end].
std::vector<double> cg_times(const FlowMap& flow, const ExperimentConfig& config);

/// Assembled generalized eigenproblem D u = mu M u on one mesh.
struct Discretization {
  std::shared_ptr<const FESpace> space;
  SparseSymMatrix D;
  SparseSymMatrix M;
  /// Points at which the diffusion tensor was evaluated (CG) or zero.
  long long quadrature_points = 0;
};

/// Builds the mesh, space and matrices; flow evaluations go through the cache.
Discretization discretize(const ExperimentConfig& config, const FlowMap& flow, Scheme scheme,
                          int degree, const MeshSize& mesh, int quad_order, Cache& cache);

/// `count` smallest eigenpairs, cached under the problem description.
EigenResult cached_eigenpairs(const ExperimentConfig& config, const Discretization& disc,
                              const std::string& description, int count, Cache& cache);

/// CG reference on the configured reference mesh.
ReferenceSolution compute_reference(const ExperimentConfig& config, const FlowMap& flow,
                                    Cache& cache);

struct SlopeSummary {
  std::string scheme;
  int degree = 1;
  double eigval_slope = 0.0;
  double eigspace_slope = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRecord> records;
  std::vector<SlopeSummary> slopes;
  double reference_eigenvalue = 0.0;
  std::string csv_path;
  std::string svg_path;
};

/// Error records per (scheme, degree, mesh) against the fine reference, plus
/// fitted slopes; writes <output_dir>/<name>_convergence.{csv,svg}.  Failed
/// mesh sizes are logged and recorded as nan.
ConvergenceResult run_convergence(const ExperimentConfig& config, Cache& cache, std::ostream& log);

/// Non-adaptive TO study of the circle shift with h = 2^-level.
ConvergenceResult run_shift1d(const ExperimentConfig& config, std::ostream& log);

struct CoherentSetsResult {
  Partition partition;
  Eigen::VectorXd eigenvalues;
  long long quadrature_points = 0;
  std::string csv_path;
  std::string svg_path;
};

/// k-means partition of the leading eigenvectors on the sample grid, for the
/// first scheme, degree and mesh of the config; writes <name>_partition.{csv,svg}.
CoherentSetsResult run_coherent_sets(const ExperimentConfig& config, Cache& cache, std::ostream& log);

}  // namespace dynlap
