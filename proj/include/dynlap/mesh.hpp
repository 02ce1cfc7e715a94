#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace dynlap {

using Point2 = Eigen::Vector2d;
using Triangle = std::array<int, 3>;

/// Axis-aligned rectangle, optionally periodic in either direction.
struct Domain2D {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  bool periodic_x = false;
  bool periodic_y = false;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double diameter() const;

  /// Throws ConfigError unless x_min < x_max and y_min < y_max.
  void validate() const;

  /// Maps periodic coordinates into [min, max); non-periodic ones untouched.
  Point2 wrap(const Point2& p) const;

  /// Shortest difference a - b under the periodic identification.
  Point2 periodic_difference(const Point2& a, const Point2& b) const;

  static Domain2D unit_square() { return {}; }
  static Domain2D torus(double length);
};

/// Regular grid metadata kept by meshes from build_regular_mesh; enables O(1) lookup.
struct GridInfo {
  int nx = 0;
  int ny = 0;
};

/// Triangle mesh with optional periodic identification of vertices.
///
/// Periodic meshes store duplicate vertices on the seam (or ghost copies for
/// Delaunay meshes); `periodic_master[v]` names the canonical vertex of each
/// class.  Geometry always uses the stored coordinates, so seam triangles are
/// never degenerate.
struct Mesh {
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  Domain2D domain;
  std::vector<int> periodic_master;
  std::optional<GridInfo> grid;
  /// Number of sliver triangles dropped by the triangulator.
  int discarded_slivers = 0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_vertex_classes() const;

  double signed_area(int t) const;
  double total_area() const;
  /// Longest edge of triangle t.
  double diameter(int t) const;
  /// Diameter of the inscribed circle of triangle t.
  double inscribed_diameter(int t) const;
  Point2 centroid(int t) const;
  /// Square root of the mean triangle area; the mesh width used in convergence plots.
  double mesh_width() const;
};

/// Result of locating a point in a mesh.
struct ElementLocation {
  int triangle_index = -1;
  Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
};

/// nx-by-ny node grid, each cell split along its lower-left to upper-right diagonal.
Mesh build_regular_mesh(int nx, int ny, const Domain2D& domain);

/// Delaunay triangulation of scattered points.  Periodic directions are handled
/// by triangulating ghost copies and keeping triangles whose centroid lies in the
/// fundamental domain.  The first points.size() vertices of the result are the
/// input points in input order; they are the periodic masters.
Mesh delaunay_triangulate(std::span<const Point2> points, const Domain2D& domain);

/// Brute-force empty-circumcircle check; returns the number of violating
/// (triangle, vertex) pairs.  `rel_tol` is relative to the circumradius.
int count_delaunay_violations(const Mesh& mesh, double rel_tol = 1e-10);

/// Point location with a bucket grid (or direct cell arithmetic for regular meshes).
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);

  /// Throws OutOfDomainError if p lies outside a non-periodic direction.
  ElementLocation locate(const Point2& p) const;

  const Mesh& mesh() const { return *mesh_; }

 private:
  std::optional<ElementLocation> try_locate(const Point2& p) const;
  std::optional<ElementLocation> locate_regular(const Point2& p) const;
  std::optional<ElementLocation> locate_bucketed(const Point2& p) const;

  const Mesh* mesh_;
  Eigen::AlignedBox2d box_;
  int bx_ = 1, by_ = 1;
  std::vector<std::vector<int>> buckets_;
};

ElementLocation locate_point(const Mesh& mesh, const Point2& p);

/// Barycentric coordinates of p with respect to triangle t.
Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Point2& p);

/// Plain-text exchange format: `vertices N triangles M`, N lines `x y`, M lines `i j k`.
void write_mesh(std::ostream& os, const Mesh& mesh);
/// Periodic partners are reconstructed from coordinates modulo the domain period.
Mesh read_mesh(std::istream& is, const Domain2D& domain);

/// Recomputes `periodic_master` by matching vertex coordinates modulo the period.
void identify_periodic_vertices(Mesh& mesh);

}  // namespace dynlap
