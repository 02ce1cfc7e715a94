#include "dynlap/fem1d.hpp"

#include <cmath>

#include "dynlap/errors.hpp"

namespace dynlap {

namespace {

// 3-point Gauss-Legendre on [0, 1]; exact to degree 5.
constexpr std::array<double, 3> kGaussX = {0.11270166537925831148, 0.5, 0.88729833462074168852};
constexpr std::array<double, 3> kGaussW = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

}  // namespace

CircleSpace::CircleSpace(int n_cells, int degree) : n_cells_(n_cells), degree_(degree) {
  if (degree != 1 && degree != 2)
    throw ConfigError("unsupported Lagrange degree " + std::to_string(degree));
  if (n_cells < 2) throw ConfigError("circle mesh needs at least 2 cells");
}

std::array<int, 3> CircleSpace::cell_dofs(int cell) const {
  return {cell, (cell + 1) % n_cells_, degree_ == 2 ? n_cells_ + cell : -1};
}

std::vector<double> CircleSpace::dof_coords() const {
  std::vector<double> x(n_dofs());
  for (int i = 0; i < n_cells_; ++i) {
    x[i] = i * h();
    if (degree_ == 2) x[n_cells_ + i] = (i + 0.5) * h();
  }
  return x;
}

std::pair<int, double> CircleSpace::locate(double x) const {
  double w = x - std::floor(x);
  if (w >= 1.0) w = 0.0;
  const double s = w * n_cells_;
  int cell = static_cast<int>(std::floor(s));
  if (cell >= n_cells_) cell = n_cells_ - 1;
  return {cell, std::clamp(s - cell, 0.0, 1.0)};
}

std::array<double, 3> CircleSpace::shape_values(double xi) const {
  if (degree_ == 1) return {1.0 - xi, xi, 0.0};
  return {(1.0 - xi) * (1.0 - 2.0 * xi), xi * (2.0 * xi - 1.0), 4.0 * xi * (1.0 - xi)};
}

std::array<double, 3> CircleSpace::shape_derivatives(double xi) const {
  if (degree_ == 1) return {-1.0, 1.0, 0.0};
  return {4.0 * xi - 3.0, 4.0 * xi - 1.0, 4.0 - 8.0 * xi};
}

double CircleSpace::evaluate(const Eigen::VectorXd& coeffs, double x) const {
  const auto [cell, xi] = locate(x);
  const auto dofs = cell_dofs(cell);
  const auto s = shape_values(xi);
  double v = 0.0;
  for (int k = 0; k < dofs_per_cell(); ++k) v += s[k] * coeffs[dofs[k]];
  return v;
}

double CircleSpace::evaluate_derivative(const Eigen::VectorXd& coeffs, double x) const {
  const auto [cell, xi] = locate(x);
  const auto dofs = cell_dofs(cell);
  const auto s = shape_derivatives(xi);
  double v = 0.0;
  for (int k = 0; k < dofs_per_cell(); ++k) v += s[k] * coeffs[dofs[k]];
  return v / h();
}

namespace {

template <typename Local>
SparseSymMatrix assemble_1d(const CircleSpace& space, Local local) {
  std::vector<Eigen::Triplet<double>> trips;
  const int nloc = space.dofs_per_cell();
  for (int c = 0; c < space.n_cells(); ++c) {
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < 3; ++q) {
      const auto a = local(kGaussX[q]);
      for (int i = 0; i < nloc; ++i)
        for (int j = 0; j < nloc; ++j)
          if (dofs[i] >= dofs[j]) trips.emplace_back(dofs[i], dofs[j], kGaussW[q] * a[i] * a[j]);
    }
  }
  SparseMatrix m(space.n_dofs(), space.n_dofs());
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseSymMatrix(m);
}

}  // namespace

SparseSymMatrix assemble_mass(const CircleSpace& space) {
  const double sh = std::sqrt(space.h());
  return assemble_1d(space, [&](double xi) {
    auto v = space.shape_values(xi);
    for (auto& x : v) x *= sh;
    return v;
  });
}

SparseSymMatrix assemble_stiffness(const CircleSpace& space) {
  const double scale = 1.0 / std::sqrt(space.h());
  return assemble_1d(space, [&](double xi) {
    auto v = space.shape_derivatives(xi);
    for (auto& x : v) x *= scale;
    return v;
  });
}

}  // namespace dynlap
