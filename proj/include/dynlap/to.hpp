#pragma once

#include <functional>
#include <memory>
#include <span>

#include <Eigen/Core>

#include "dynlap/dynamics.hpp"
#include "dynlap/fem.hpp"
#include "dynlap/fem1d.hpp"

namespace dynlap {

enum class TOVariant { non_adaptive, adaptive, l2_galerkin_reference };

const char* to_string(TOVariant v);

/// Interpolation of the pushforward: rows over image-space dofs, columns over
/// initial-space dofs.
struct CollocationMatrix {
  SparseMatrix matrix;
  TOVariant variant = TOVariant::non_adaptive;
};

using PointMap = std::function<Point2(const Point2&)>;
using CircleMap = std::function<double(double)>;

/// A[i, j] = phi0_j(inverse_map(p_i)) over the dof nodes p_i of space1.  Throws
/// OutOfDomainError listing every node mapped outside a non-periodic domain.
CollocationMatrix collocation_matrix(const FESpace& space0, const FESpace& space1,
                                     const PointMap& inverse_map);

/// Same, with the preimages of space1's dof nodes already computed.
CollocationMatrix collocation_matrix(const FESpace& space0, const FESpace& space1,
                                     std::span<const Point2> preimages);

CollocationMatrix collocation_matrix(const CircleSpace& space0, const CircleSpace& space1,
                                     const CircleMap& inverse_map);

/// P1 space on the Delaunay triangulation of the forward images of the dofs of
/// space0, with A the identity under the induced node correspondence.
struct AdaptiveImage {
  std::shared_ptr<const FESpace> space1;
  CollocationMatrix A;
};
AdaptiveImage adaptive_image_space(const FESpace& space0, const FlowMap& flow);
/// Same, with the forward images of the dof nodes already computed.
AdaptiveImage adaptive_image_space(const FESpace& space0, std::span<const Point2> images);

struct TOProblem {
  std::shared_ptr<const FESpace> space0;
  std::shared_ptr<const FESpace> space1;
  CollocationMatrix A;
  SparseSymMatrix D0;
  SparseSymMatrix D1;
  SparseSymMatrix M;
};

/// Builds all pieces for the given variant (non_adaptive or adaptive) from the
/// flow over [flow.t_begin, flow.t_end].  The non-adaptive image space reuses space0.
TOProblem make_to_problem(std::shared_ptr<const FESpace> space0, const FlowMap& flow,
                          TOVariant variant, int quad_order);
/// Same, from node images: preimages of the dofs for non_adaptive, forward images for adaptive.
TOProblem make_to_problem(std::shared_ptr<const FESpace> space0, std::span<const Point2> node_images,
                          TOVariant variant, int quad_order);

/// (D0 + A^T D1 A) / 2.
SparseSymMatrix to_stiffness(const SparseSymMatrix& D0, const SparseSymMatrix& D1,
                             const SparseMatrix& A);
SparseSymMatrix assemble_to_stiffness(const TOProblem& problem);

/// Dense L2-Galerkin representation G^{-1} <phi1_i, T phi0_j> for volume-preserving
/// T; test-only, both spaces capped at 2000 dofs.
Eigen::MatrixXd l2_galerkin_matrix_dense(const FESpace& space0, const FESpace& space1,
                                         const FlowMap& flow, int quad_order);
Eigen::MatrixXd l2_galerkin_matrix_dense(const CircleSpace& space0, const CircleSpace& space1,
                                         const CircleMap& inverse_map);

}  // namespace dynlap
