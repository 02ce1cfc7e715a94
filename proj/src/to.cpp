#include "dynlap/to.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "dynlap/errors.hpp"
#include "dynlap/parallel.hpp"

namespace dynlap {

namespace {

constexpr int kDenseCap = 2000;

SparseMatrix from_rows(int rows, int cols, const std::vector<std::vector<std::pair<int, double>>>& r) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < rows; ++i)
    for (const auto& [j, v] : r[i])
      if (v != 0.0) trips.emplace_back(i, j, v);
  SparseMatrix a(rows, cols);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

}  // namespace

const char* to_string(TOVariant v) {
  switch (v) {
    case TOVariant::non_adaptive:
      return "non_adaptive";
    case TOVariant::adaptive:
      return "adaptive";
    case TOVariant::l2_galerkin_reference:
      return "l2_galerkin_reference";
  }
  return "?";
}

CollocationMatrix collocation_matrix(const FESpace& space0, const FESpace& space1,
                                     const PointMap& inverse_map) {
  const auto& nodes = space1.dof_coords();
  std::vector<Point2> preimages(nodes.size());
  parallel_for(nodes.size(), [&](size_t i) { preimages[i] = inverse_map(nodes[i]); });
  return collocation_matrix(space0, space1, preimages);
}

CollocationMatrix collocation_matrix(const FESpace& space0, const FESpace& space1,
                                     std::span<const Point2> preimages) {
  const int n1 = space1.n_dofs();
  if (preimages.size() != static_cast<size_t>(n1))
    throw ContractViolation("one preimage per image-space dof is required");
  const PointLocator locator(space0.mesh());
  const auto& nodes = space1.dof_coords();
  std::vector<std::vector<std::pair<int, double>>> rows(n1);
  std::vector<char> outside(n1, 0);
  parallel_for(n1, [&](size_t i) {
    ElementLocation loc;
    try {
      loc = locator.locate(preimages[i]);
    } catch (const OutOfDomainError&) {
      outside[i] = 1;
      return;
    }
    const ShapeEval s = shape_functions(space0.degree(), loc.barycentric);
    const auto dofs = space0.cell_dofs(loc.triangle_index);
    for (int k = 0; k < s.count; ++k) rows[i].emplace_back(dofs[k], s.values[k]);
  });

  int count = 0;
  std::ostringstream msg;
  msg.precision(10);
  for (int i = 0; i < n1; ++i) {
    if (!outside[i]) continue;
    if (count < 20)
      msg << (count ? ", " : "") << "node " << i << " (" << nodes[i].x() << ", " << nodes[i].y()
          << ") -> (" << preimages[i].x() << ", " << preimages[i].y() << ")";
    ++count;
  }
  if (count > 0) {
    const int first = static_cast<int>(std::find(outside.begin(), outside.end(), 1) - outside.begin());
    throw OutOfDomainError(std::to_string(count) + " image nodes map outside the initial domain: " +
                               msg.str() + (count > 20 ? ", ..." : ""),
                           preimages[first].x(), preimages[first].y());
  }
  return {from_rows(n1, space0.n_dofs(), rows), TOVariant::non_adaptive};
}

CollocationMatrix collocation_matrix(const CircleSpace& space0, const CircleSpace& space1,
                                     const CircleMap& inverse_map) {
  const auto nodes = space1.dof_coords();
  std::vector<std::vector<std::pair<int, double>>> rows(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    const auto [cell, xi] = space0.locate(inverse_map(nodes[i]));
    const auto dofs = space0.cell_dofs(cell);
    const auto s = space0.shape_values(xi);
    for (int k = 0; k < space0.dofs_per_cell(); ++k) rows[i].emplace_back(dofs[k], s[k]);
  }
  return {from_rows(space1.n_dofs(), space0.n_dofs(), rows), TOVariant::non_adaptive};
}

AdaptiveImage adaptive_image_space(const FESpace& space0, const FlowMap& flow) {
  if (space0.degree() != 1) throw ConfigError("adaptive TO is defined for P1 only");
  const auto& nodes = space0.dof_coords();
  std::vector<Point2> images(nodes.size());
  parallel_for(nodes.size(), [&](size_t i) { images[i] = flow(nodes[i]); });
  return adaptive_image_space(space0, images);
}

AdaptiveImage adaptive_image_space(const FESpace& space0, std::span<const Point2> raw_images) {
  if (space0.degree() != 1) throw ConfigError("adaptive TO is defined for P1 only");
  if (raw_images.size() != static_cast<size_t>(space0.n_dofs()))
    throw ContractViolation("one image per dof is required");
  const Domain2D& domain = space0.mesh().domain;
  std::vector<Point2> images(raw_images.size());
  for (size_t i = 0; i < images.size(); ++i) images[i] = domain.wrap(raw_images[i]);
  auto mesh = std::make_shared<Mesh>(delaunay_triangulate(images, domain));
  auto space1 = std::make_shared<FESpace>(mesh, 1);
  if (space1->n_dofs() != space0.n_dofs())
    throw GeometryError("image triangulation lost nodes: " + std::to_string(space1->n_dofs()) +
                        " of " + std::to_string(space0.n_dofs()));
  SparseMatrix a(space1->n_dofs(), space0.n_dofs());
  a.setIdentity();
  return {space1, {a, TOVariant::adaptive}};
}

SparseSymMatrix to_stiffness(const SparseSymMatrix& D0, const SparseSymMatrix& D1,
                             const SparseMatrix& A) {
  if (A.rows() != D1.dimension() || A.cols() != D0.dimension())
    throw ContractViolation("collocation matrix does not match the stiffness matrices");
  const SparseMatrix d1 = D1.full();
  const SparseMatrix at = A.transpose();
  const SparseMatrix pulled = at * (d1 * A);
  const SparseMatrix pulled_t = pulled.transpose();
  SparseMatrix sum = 0.5 * (D0.full() + 0.5 * (pulled + pulled_t));
  return SparseSymMatrix(sum);
}

SparseSymMatrix assemble_to_stiffness(const TOProblem& p) {
  return to_stiffness(p.D0, p.D1, p.A.matrix);
}

TOProblem make_to_problem(std::shared_ptr<const FESpace> space0, const FlowMap& flow,
                          TOVariant variant, int quad_order) {
  const auto& nodes = space0->dof_coords();
  std::vector<Point2> images(nodes.size());
  if (variant == TOVariant::non_adaptive)
    parallel_for(nodes.size(), [&](size_t i) { images[i] = flow.inverse_map(nodes[i]); });
  else if (variant == TOVariant::adaptive)
    parallel_for(nodes.size(), [&](size_t i) { images[i] = flow(nodes[i]); });
  return make_to_problem(std::move(space0), images, variant, quad_order);
}

TOProblem make_to_problem(std::shared_ptr<const FESpace> space0, std::span<const Point2> node_images,
                          TOVariant variant, int quad_order) {
  TOProblem p;
  p.space0 = space0;
  const TensorField id = identity_tensor_field();
  if (variant == TOVariant::non_adaptive) {
    p.space1 = space0;
    p.A = collocation_matrix(*space0, *space0, node_images);
  } else if (variant == TOVariant::adaptive) {
    auto img = adaptive_image_space(*space0, node_images);
    p.space1 = img.space1;
    p.A = std::move(img.A);
  } else {
    throw ConfigError("the L2-Galerkin variant is available only as a dense reference");
  }
  p.D0 = assemble_stiffness(*space0, id, quad_order);
  p.D1 = p.space1 == space0 ? p.D0 : assemble_stiffness(*p.space1, id, quad_order);
  p.M = assemble_mass(*space0);
  return p;
}

namespace {

void check_dense_cap(int n0, int n1) {
  if (n0 > kDenseCap || n1 > kDenseCap)
    throw ContractViolation("dense L2-Galerkin matrix refused for " + std::to_string(n1) + "x" +
                            std::to_string(n0) + " (cap " + std::to_string(kDenseCap) + ")");
}

}  // namespace

Eigen::MatrixXd l2_galerkin_matrix_dense(const FESpace& space0, const FESpace& space1,
                                         const FlowMap& flow, int quad_order) {
  check_dense_cap(space0.n_dofs(), space1.n_dofs());
  const QuadratureRule& rule = quadrature_rule(quad_order);
  const Mesh& m1 = space1.mesh();
  const PointLocator locator(space0.mesh());
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(space1.n_dofs(), space0.n_dofs());
  for (int t = 0; t < m1.n_triangles(); ++t) {
    const auto& tri = m1.triangles[t];
    const double area = std::abs(m1.signed_area(t));
    const auto dofs1 = space1.cell_dofs(t);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& b = rule.points[q];
      const Point2 y = b[0] * m1.vertices[tri[0]] + b[1] * m1.vertices[tri[1]] +
                       b[2] * m1.vertices[tri[2]];
      const ShapeEval s1 = shape_functions(space1.degree(), b);
      const ElementLocation loc = locator.locate(flow.inverse_map(y));
      const ShapeEval s0 = shape_functions(space0.degree(), loc.barycentric);
      const auto dofs0 = space0.cell_dofs(loc.triangle_index);
      const double w = rule.weights[q] * area;
      for (int i = 0; i < s1.count; ++i)
        for (int j = 0; j < s0.count; ++j) cross(dofs1[i], dofs0[j]) += w * s1.values[i] * s0.values[j];
    }
  }
  const Eigen::MatrixXd g = assemble_mass(space1).dense();
  return g.llt().solve(cross);
}

Eigen::MatrixXd l2_galerkin_matrix_dense(const CircleSpace& space0, const CircleSpace& space1,
                                         const CircleMap& inverse_map) {
  check_dense_cap(space0.n_dofs(), space1.n_dofs());
  // Composite Gauss rule on a subdivision of each image cell; the pulled-back
  // basis is only piecewise smooth inside it.
  constexpr int kSub = 16;
  constexpr std::array<double, 3> gx = {0.11270166537925831148, 0.5, 0.88729833462074168852};
  constexpr std::array<double, 3> gw = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(space1.n_dofs(), space0.n_dofs());
  const double h = space1.h();
  for (int c = 0; c < space1.n_cells(); ++c) {
    const auto dofs1 = space1.cell_dofs(c);
    for (int s = 0; s < kSub; ++s) {
      for (int q = 0; q < 3; ++q) {
        const double xi = (s + gx[q]) / kSub;
        const double y = (c + xi) * h;
        const auto v1 = space1.shape_values(xi);
        const auto [cell0, xi0] = space0.locate(inverse_map(y));
        const auto dofs0 = space0.cell_dofs(cell0);
        const auto v0 = space0.shape_values(xi0);
        const double w = gw[q] * h / kSub;
        for (int i = 0; i < space1.dofs_per_cell(); ++i)
          for (int j = 0; j < space0.dofs_per_cell(); ++j)
            cross(dofs1[i], dofs0[j]) += w * v1[i] * v0[j];
      }
    }
  }
  const Eigen::MatrixXd g = assemble_mass(space1).dense();
  return g.llt().solve(cross);
}

}  // namespace dynlap
