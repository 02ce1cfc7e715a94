#pragma once

#include <span>
#include <vector>

#include "dynlap/dynamics.hpp"
#include "dynlap/fem.hpp"

namespace dynlap {

/// (1/|I|) sum_t J_t^{-1} J_t^{-T} for Jacobians J_t of the flow from times.front().
/// Throws NumericalError if some |det J_t| < 1e-12; `where` is used in the message.
/// With `area_preserving`, J^{-1} is taken as the adjugate (exact for det J = 1),
/// which keeps finite-difference errors in strongly stretched regions from being
/// amplified by the computed determinant.
Tensor2 mean_diffusion_tensor(std::span<const Eigen::Matrix2d> jacobians,
                              std::span<const double> times, const Point2& where,
                              bool area_preserving = false);

/// x -> mean diffusion tensor of the flow over `times` (the first time is the
/// reference time, contributing the identity).
TensorField cg_tensor_field(const FlowMap& flow, std::vector<double> times,
                            const FDSettings& fd = {});

/// The same tensor tabulated at `points`, evaluated in parallel.
std::vector<Tensor2> cg_tensors(const FlowMap& flow, std::span<const double> times,
                                std::span<const Point2> points, const FDSettings& fd = {});

/// Stiffness matrix of the CG discretization.
SparseSymMatrix assemble_cg_stiffness(const FESpace& space, const FlowMap& flow,
                                      std::span<const double> times, int quad_order,
                                      const FDSettings& fd = {});

}  // namespace dynlap
