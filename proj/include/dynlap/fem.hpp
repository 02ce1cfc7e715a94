#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "dynlap/mesh.hpp"

namespace dynlap {

using Tensor2 = Eigen::Matrix2d;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lagrange P1/P2 space on a triangle mesh.  Local dof order on a cell:
/// vertices 0,1,2 then edge midpoints (0,1), (1,2), (2,0).
class FESpace {
 public:
  FESpace(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int n_dofs() const { return static_cast<int>(dof_coords_.size()); }
  int dofs_per_cell() const { return degree_ == 1 ? 3 : 6; }
  std::span<const int> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<size_t>(cell) * dofs_per_cell(),
            static_cast<size_t>(dofs_per_cell())};
  }
  const std::vector<Point2>& dof_coords() const { return dof_coords_; }

  /// Value of the finite-element function with coefficients `coeffs` at p.
  double evaluate(const Eigen::VectorXd& coeffs, const PointLocator& locator,
                  const Point2& p) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  std::vector<Point2> dof_coords_;
  std::vector<int> cell_dofs_;
};

/// Shape function values and gradients on the reference triangle
/// (0,0), (1,0), (0,1), where barycentric = (1 - xi - eta, xi, eta).
struct ShapeEval {
  Eigen::Matrix<double, 6, 1> values = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 2> reference_gradients = Eigen::Matrix<double, 6, 2>::Zero();
  int count = 0;
};

ShapeEval shape_functions(int degree, const Eigen::Vector3d& barycentric);

/// Symmetric triangle quadrature; weights are normalized to sum to 1.
struct QuadratureRule {
  int order = 0;
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// Orders 1..8.  Orders 3 and 7 reuse the positive-weight rules of orders 4 and 8.
const QuadratureRule& quadrature_rule(int order);

/// Symmetric sparse matrix; only the lower triangle is stored.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  /// Keeps the lower triangle of `m`, which must be symmetric.
  explicit SparseSymMatrix(const SparseMatrix& m);

  int dimension() const { return static_cast<int>(lower_.rows()); }
  const SparseMatrix& lower() const { return lower_; }
  SparseMatrix full() const;
  Eigen::MatrixXd dense() const;
  auto view() const { return lower_.selfadjointView<Eigen::Lower>(); }

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
  double max_abs() const;
  /// Infinity norm of the symmetric matrix (maximum absolute row sum).
  double norm_inf() const;

 private:
  SparseMatrix lower_;
};

SparseSymMatrix operator*(double s, const SparseSymMatrix& m);

/// Lower-triangle triplets, `i j value` per line.
void write_triplets(std::ostream& os, const SparseSymMatrix& m);

/// Map from a point to a symmetric positive-definite 2x2 diffusion tensor.
using TensorField = std::function<Tensor2(const Point2&)>;

TensorField identity_tensor_field();

/// Physical coordinates of all quadrature points, cell by cell.
std::vector<Point2> quadrature_points(const FESpace& space, int quad_order);

/// Exact mass matrix (quadrature of order 2k).
SparseSymMatrix assemble_mass(const FESpace& space);

/// Stiffness matrix of a(u,v) = sum_K int_K grad u . A grad v.
SparseSymMatrix assemble_stiffness(const FESpace& space, const TensorField& field, int quad_order);

/// Same, with the tensor already tabulated at quadrature_points(space, quad_order).
SparseSymMatrix assemble_stiffness(const FESpace& space, std::span<const Tensor2> tensors,
                                   int quad_order);

/// 2k - 1 for degree k.
int default_quadrature_order(int degree);

}  // namespace dynlap
