#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "dynlap/fem.hpp"

namespace dynlap {

/// Periodic P1/P2 Lagrange space on the circle [0, 1) with n uniform cells.
/// Dofs 0..n-1 are the vertices i/n; for P2, dofs n..2n-1 are the cell midpoints.
class CircleSpace {
 public:
  CircleSpace(int n_cells, int degree);

  int n_cells() const { return n_cells_; }
  int degree() const { return degree_; }
  double h() const { return 1.0 / n_cells_; }
  int n_dofs() const { return n_cells_ * degree_; }
  int dofs_per_cell() const { return degree_ + 1; }
  /// Local order: left vertex, right vertex, midpoint.
  std::array<int, 3> cell_dofs(int cell) const;
  std::vector<double> dof_coords() const;

  /// Cell index and local coordinate in [0, 1] of x (wrapped into [0, 1)).
  std::pair<int, double> locate(double x) const;
  /// Shape values at local coordinate xi (degree + 1 entries used).
  std::array<double, 3> shape_values(double xi) const;
  std::array<double, 3> shape_derivatives(double xi) const;  // d/dxi

  double evaluate(const Eigen::VectorXd& coeffs, double x) const;
  double evaluate_derivative(const Eigen::VectorXd& coeffs, double x) const;

 private:
  int n_cells_;
  int degree_;
};

SparseSymMatrix assemble_mass(const CircleSpace& space);
/// Stiffness of a(u, v) = int u' v'.
SparseSymMatrix assemble_stiffness(const CircleSpace& space);

}  // namespace dynlap
