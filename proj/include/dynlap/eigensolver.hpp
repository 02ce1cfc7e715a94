#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "dynlap/fem.hpp"

namespace dynlap {

/// Ascending generalized eigenvalues of D u = mu M u with M-orthonormal vectors
/// (one per column) and residual norms ||D u - mu M u||_2.
struct EigenResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd residuals;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

struct EigenSettings {
  std::uint64_t seed = 1;
  /// Relative residual required for locking a Ritz pair.
  double tolerance = 1e-10;
  int max_runs = 60;
};

/// k smallest eigenpairs by shift-invert Lanczos in the M inner product, with
/// locking and fresh restarts so repeated eigenvalues are resolved.
EigenResult solve_smallest(const SparseSymMatrix& D, const SparseSymMatrix& M, int k,
                           const EigenSettings& settings = {});

/// Dense oracle; dimension is capped at 2000.
EigenResult dense_solve(const SparseSymMatrix& D, const SparseSymMatrix& M, int k);

/// Residual bound used to accept a pair: tol * (||D||_inf + |mu| ||M||_inf) * ||u||_2.
double residual_bound(const SparseSymMatrix& D, const SparseSymMatrix& M, double mu,
                      const Eigen::VectorXd& u, double tol);

}  // namespace dynlap
