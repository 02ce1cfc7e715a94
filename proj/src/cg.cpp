#include "dynlap/cg.hpp"

#include <cmath>
#include <sstream>

#include "dynlap/errors.hpp"
#include "dynlap/parallel.hpp"

namespace dynlap {

Tensor2 mean_diffusion_tensor(std::span<const Eigen::Matrix2d> jacobians,
                              std::span<const double> times, const Point2& where,
                              bool area_preserving) {
  if (jacobians.empty() || jacobians.size() != times.size())
    throw ContractViolation("one Jacobian per time is required");
  Tensor2 sum = Tensor2::Zero();
  for (size_t k = 0; k < jacobians.size(); ++k) {
    const Eigen::Matrix2d& j = jacobians[k];
    const double det = j.determinant();
    if (!(std::abs(det) >= 1e-12)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "singular flow Jacobian (det " << det << ") at (" << where.x() << ", "
          << where.y() << "), t = " << times[k];
      throw NumericalError(msg.str());
    }
    Eigen::Matrix2d inv;
    if (area_preserving)
      inv << j(1, 1), -j(0, 1), -j(1, 0), j(0, 0);
    else
      inv = j.inverse();
    sum.noalias() += inv * inv.transpose();
  }
  sum /= static_cast<double>(jacobians.size());
  // Symmetrize away rounding.
  const double off = 0.5 * (sum(0, 1) + sum(1, 0));
  sum(0, 1) = sum(1, 0) = off;
  return sum;
}

TensorField cg_tensor_field(const FlowMap& flow, std::vector<double> times, const FDSettings& fd) {
  if (times.empty()) throw ConfigError("CG tensor needs at least one time");
  return [flow, times = std::move(times), fd](const Point2& p) {
    const auto jac = flow_jacobians(flow, p, times, fd);
    return mean_diffusion_tensor(jac, times, p, flow.volume_preserving);
  };
}

std::vector<Tensor2> cg_tensors(const FlowMap& flow, std::span<const double> times,
                                std::span<const Point2> points, const FDSettings& fd) {
  if (times.empty()) throw ConfigError("CG tensor needs at least one time");
  std::vector<Tensor2> out(points.size());
  parallel_for(points.size(), [&](size_t i) {
    const auto jac = flow_jacobians(flow, points[i], times, fd);
    out[i] = mean_diffusion_tensor(jac, times, points[i], flow.volume_preserving);
  });
  return out;
}

SparseSymMatrix assemble_cg_stiffness(const FESpace& space, const FlowMap& flow,
                                      std::span<const double> times, int quad_order,
                                      const FDSettings& fd) {
  const auto points = quadrature_points(space, quad_order);
  const auto tensors = cg_tensors(flow, times, points, fd);
  return assemble_stiffness(space, tensors, quad_order);
}

}  // namespace dynlap
