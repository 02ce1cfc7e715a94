#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynlap/fem.hpp"
#include "dynlap/fem1d.hpp"

namespace dynlap {

/// Fine-mesh eigenpairs used as the error reference; vectors are M-orthonormal.
struct ReferenceSolution {
  std::shared_ptr<const FESpace> space;
  SparseSymMatrix mass;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  std::string provenance;
};

struct ConvergenceRecord {
  std::string scheme;
  int degree = 1;
  double h = 0.0;
  double eigval_rel_err = 0.0;
  double eigspace_err = 0.0;
};

/// Nodal interpolation of a coarse FE function onto the dofs of `fine`.
Eigen::VectorXd interpolate_to_fine(const FESpace& coarse, const Eigen::VectorXd& coeffs,
                                    const FESpace& fine);
Eigen::MatrixXd interpolate_to_fine(const FESpace& coarse, const Eigen::MatrixXd& coeffs,
                                    const FESpace& fine);

/// Columns made M-orthonormal (Cholesky of the Gram matrix); throws
/// NumericalError when they are linearly dependent.
Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd& basis, const SparseSymMatrix& M);

/// sqrt(1 - <v_ref, v_h>_M^2); both vectors must have unit M-norm within 1e-6.
double eigenvector_error(const Eigen::VectorXd& v_ref, const Eigen::VectorXd& v_h,
                         const SparseSymMatrix& M);

/// sqrt(1 - sigma_min(G)^2), G the M cross-Gram matrix of two M-orthonormal
/// bases with the same number of columns.
double subspace_error(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& test,
                      const SparseSymMatrix& M);

/// Least-squares slope of log(err) against log(h).  Non-positive or non-finite
/// errors are skipped with a warning on stderr; at least two distinct h must remain.
double fit_slope(std::span<const double> h, std::span<const double> err);

enum class ErrorKind { eigenvalue, eigenspace };
double fit_slope(std::span<const ConvergenceRecord> records, ErrorKind kind);

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x d
  /// Objective (sum of squared distances) after every assignment step.
  std::vector<double> objective_history;
  int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding; rows of `features` are the points.
/// An empty cluster is re-seeded at the point farthest from its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& features, int k, std::uint64_t seed,
                    int max_iterations = 300);

struct Partition {
  std::vector<Point2> sample_points;
  std::vector<int> labels;
  int k = 1;
  std::uint64_t seed = 0;
};

/// nx-by-ny sample grid; the right/top end point is omitted in periodic directions.
std::vector<Point2> sample_grid(const Domain2D& domain, int nx, int ny);

/// Values of the FE functions (columns of `coeffs`) at the points, one row per point.
Eigen::MatrixXd sample_functions(const FESpace& space, const Eigen::MatrixXd& coeffs,
                                 std::span<const Point2> points);

/// Clusters the sampled nontrivial eigenvectors (columns 1..k-1 of `vectors`).
Partition coherent_partition(const FESpace& space, const Eigen::MatrixXd& vectors, int k,
                             std::uint64_t seed, int nx = 200, int ny = 60);

struct ShiftErrors {
  double eigvec_error = 0.0;
  double eigval_rel_error = 0.0;
};

/// Distance of the (normalized) function to span{sin 2 pi x, cos 2 pi x} in
/// L2(0, 1), ||P v - v||, and |mu - 4 pi^2| / 4 pi^2, with trapezoid sums.
ShiftErrors shift1d_fourier_error(const CircleSpace& space, const Eigen::VectorXd& coeffs,
                                  double eigenvalue, int n_points = 1000000);
/// Callable version; the eigenvalue is the Rayleigh quotient int f'^2 / int f^2.
ShiftErrors shift1d_fourier_error(const std::function<double(double)>& f,
                                  const std::function<double(double)>& df,
                                  int n_points = 1000000);

}  // namespace dynlap
