#include "dynlap/fem.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "dynlap/errors.hpp"

namespace dynlap {

namespace {

constexpr std::array<std::array<int, 2>, 3> kEdges = {{{0, 1}, {1, 2}, {2, 0}}};

struct KeyHash {
  size_t operator()(const std::pair<long long, long long>& k) const {
    return std::hash<long long>()(k.first * 1000003LL ^ k.second);
  }
};

std::pair<long long, long long> position_key(const Domain2D& d, const Point2& p) {
  constexpr double kScale = 4294967296.0;
  const Point2 w = d.wrap(p);
  auto kx = static_cast<long long>(std::llround((w.x() - d.x_min) / d.width() * kScale));
  auto ky = static_cast<long long>(std::llround((w.y() - d.y_min) / d.height() * kScale));
  if (d.periodic_x) kx %= static_cast<long long>(kScale);
  if (d.periodic_y) ky %= static_cast<long long>(kScale);
  return {kx, ky};
}

// Reference-to-physical Jacobian [b - a, c - a] of cell t.
Eigen::Matrix2d cell_jacobian(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  Eigen::Matrix2d j;
  j.col(0) = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
  j.col(1) = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
  return j;
}

void check_spd(const Tensor2& a, const Point2& where) {
  const double scale = a.cwiseAbs().maxCoeff();
  const bool symmetric = std::abs(a(0, 1) - a(1, 0)) <= 1e-12 * std::max(scale, 1e-300);
  const bool positive = a.trace() > 0.0 && a.determinant() > 0.0 && a.allFinite();
  if (!symmetric || !positive) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "diffusion tensor not symmetric positive definite at (" << where.x() << ", "
        << where.y() << "): [[" << a(0, 0) << ", " << a(0, 1) << "], [" << a(1, 0) << ", "
        << a(1, 1) << "]]";
    throw NumericalError(msg.str());
  }
}

}  // namespace

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
  if (degree_ != 1 && degree_ != 2)
    throw ConfigError("unsupported Lagrange degree " + std::to_string(degree_));
  const Mesh& m = *mesh_;
  const Domain2D& d = m.domain;

  std::vector<int> vertex_dof(m.n_vertices(), -1);
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (m.periodic_master[v] != v) continue;
    vertex_dof[v] = static_cast<int>(dof_coords_.size());
    dof_coords_.push_back(d.wrap(m.vertices[v]));
  }
  for (int v = 0; v < m.n_vertices(); ++v) vertex_dof[v] = vertex_dof[m.periodic_master[v]];

  cell_dofs_.reserve(static_cast<size_t>(m.n_triangles()) * dofs_per_cell());
  std::unordered_map<std::pair<long long, long long>, int, KeyHash> edge_dof;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) cell_dofs_.push_back(vertex_dof[tri[k]]);
    if (degree_ == 1) continue;
    for (const auto& [a, b] : kEdges) {
      const Point2 mid = 0.5 * (m.vertices[tri[a]] + m.vertices[tri[b]]);
      auto [it, inserted] =
          edge_dof.emplace(position_key(d, mid), static_cast<int>(dof_coords_.size()));
      if (inserted) dof_coords_.push_back(d.wrap(mid));
      cell_dofs_.push_back(it->second);
    }
  }
}

double FESpace::evaluate(const Eigen::VectorXd& coeffs, const PointLocator& locator,
                         const Point2& p) const {
  const ElementLocation loc = locator.locate(p);
  const ShapeEval s = shape_functions(degree_, loc.barycentric);
  const auto dofs = cell_dofs(loc.triangle_index);
  double value = 0.0;
  for (int k = 0; k < s.count; ++k) value += s.values[k] * coeffs[dofs[k]];
  return value;
}

ShapeEval shape_functions(int degree, const Eigen::Vector3d& l) {
  // Reference gradients of the barycentric coordinates.
  const Eigen::RowVector2d g0(-1.0, -1.0), g1(1.0, 0.0), g2(0.0, 1.0);
  const std::array<Eigen::RowVector2d, 3> gl = {g0, g1, g2};
  ShapeEval s;
  if (degree == 1) {
    s.count = 3;
    for (int i = 0; i < 3; ++i) {
      s.values[i] = l[i];
      s.reference_gradients.row(i) = gl[i];
    }
    return s;
  }
  if (degree == 2) {
    s.count = 6;
    for (int i = 0; i < 3; ++i) {
      s.values[i] = l[i] * (2.0 * l[i] - 1.0);
      s.reference_gradients.row(i) = (4.0 * l[i] - 1.0) * gl[i];
    }
    for (int e = 0; e < 3; ++e) {
      const auto [a, b] = kEdges[e];
      s.values[3 + e] = 4.0 * l[a] * l[b];
      s.reference_gradients.row(3 + e) = 4.0 * (l[b] * gl[a] + l[a] * gl[b]);
    }
    return s;
  }
  throw ConfigError("unsupported Lagrange degree " + std::to_string(degree));
}

SparseSymMatrix::SparseSymMatrix(const SparseMatrix& m) {
  lower_ = m.triangularView<Eigen::Lower>();
  lower_.makeCompressed();
}

SparseMatrix SparseSymMatrix::full() const {
  SparseMatrix f = lower_.selfadjointView<Eigen::Lower>();
  return f;
}

Eigen::MatrixXd SparseSymMatrix::dense() const { return Eigen::MatrixXd(full()); }

Eigen::VectorXd SparseSymMatrix::operator*(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = view() * x;
  return y;
}

double SparseSymMatrix::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < lower_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(lower_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double SparseSymMatrix::norm_inf() const {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(dimension());
  for (int k = 0; k < lower_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(lower_, k); it; ++it) {
      rows[it.row()] += std::abs(it.value());
      if (it.row() != it.col()) rows[it.col()] += std::abs(it.value());
    }
  }
  return dimension() == 0 ? 0.0 : rows.maxCoeff();
}

SparseSymMatrix operator*(double s, const SparseSymMatrix& m) {
  SparseMatrix scaled = s * m.lower();
  return SparseSymMatrix(scaled);
}

void write_triplets(std::ostream& os, const SparseSymMatrix& m) {
  const auto old_precision = os.precision(17);
  const SparseMatrix& l = m.lower();
  for (int k = 0; k < l.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(l, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
  os.precision(old_precision);
}

TensorField identity_tensor_field() {
  return [](const Point2&) { return Tensor2::Identity().eval(); };
}

std::vector<Point2> quadrature_points(const FESpace& space, int quad_order) {
  const QuadratureRule& rule = quadrature_rule(quad_order);
  const Mesh& m = space.mesh();
  std::vector<Point2> out;
  out.reserve(static_cast<size_t>(m.n_triangles()) * rule.size());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (const auto& b : rule.points)
      out.push_back(b[0] * m.vertices[tri[0]] + b[1] * m.vertices[tri[1]] +
                    b[2] * m.vertices[tri[2]]);
  }
  return out;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter_lower(Triplets& trips, std::span<const int> dofs, const Eigen::MatrixXd& local) {
  for (int i = 0; i < local.rows(); ++i) {
    for (int j = 0; j < local.cols(); ++j) {
      const int gi = dofs[i];
      const int gj = dofs[j];
      if (gi >= gj) trips.emplace_back(gi, gj, local(i, j));
    }
  }
}

SparseSymMatrix from_triplets(int n, const Triplets& trips) {
  SparseMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseSymMatrix(m);
}

}  // namespace

SparseSymMatrix assemble_mass(const FESpace& space) {
  const QuadratureRule& rule = quadrature_rule(2 * space.degree());
  const Mesh& m = space.mesh();
  const int nloc = space.dofs_per_cell();
  std::vector<ShapeEval> shapes;
  for (const auto& b : rule.points) shapes.push_back(shape_functions(space.degree(), b));

  Triplets trips;
  trips.reserve(static_cast<size_t>(m.n_triangles()) * nloc * (nloc + 1) / 2 * 2);
  Eigen::MatrixXd local(nloc, nloc);
  for (int t = 0; t < m.n_triangles(); ++t) {
    const double area = std::abs(m.signed_area(t));
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto v = shapes[q].values.head(nloc);
      local.noalias() += (rule.weights[q] * area) * v * v.transpose();
    }
    scatter_lower(trips, space.cell_dofs(t), local);
  }
  return from_triplets(space.n_dofs(), trips);
}

SparseSymMatrix assemble_stiffness(const FESpace& space, std::span<const Tensor2> tensors,
                                   int quad_order) {
  const QuadratureRule& rule = quadrature_rule(quad_order);
  const Mesh& m = space.mesh();
  if (tensors.size() != static_cast<size_t>(m.n_triangles()) * rule.size())
    throw ContractViolation("tensor table does not match the quadrature points of the space");
  const int nloc = space.dofs_per_cell();
  std::vector<ShapeEval> shapes;
  for (const auto& b : rule.points) shapes.push_back(shape_functions(space.degree(), b));

  Triplets trips;
  trips.reserve(static_cast<size_t>(m.n_triangles()) * nloc * (nloc + 1));
  Eigen::MatrixXd local(nloc, nloc);
  Eigen::MatrixXd grads(nloc, 2);
  for (int t = 0; t < m.n_triangles(); ++t) {
    const Eigen::Matrix2d jac = cell_jacobian(m, t);
    const Eigen::Matrix2d jinv = jac.inverse();
    const double area = 0.5 * std::abs(jac.determinant());
    local.setZero();
    for (int q = 0; q < rule.size(); ++q) {
      const Tensor2& a = tensors[static_cast<size_t>(t) * rule.size() + q];
      const auto& b = rule.points[q];
      const auto& tri = m.triangles[t];
      check_spd(a, b[0] * m.vertices[tri[0]] + b[1] * m.vertices[tri[1]] +
                       b[2] * m.vertices[tri[2]]);
      grads.noalias() = shapes[q].reference_gradients.topRows(nloc) * jinv;
      local.noalias() += (rule.weights[q] * area) * grads * a * grads.transpose();
    }
    scatter_lower(trips, space.cell_dofs(t), local);
  }
  return from_triplets(space.n_dofs(), trips);
}

SparseSymMatrix assemble_stiffness(const FESpace& space, const TensorField& field,
                                   int quad_order) {
  const auto points = quadrature_points(space, quad_order);
  std::vector<Tensor2> tensors;
  tensors.reserve(points.size());
  for (const auto& p : points) tensors.push_back(field(p));
  return assemble_stiffness(space, tensors, quad_order);
}

}  // namespace dynlap
