#include "dynlap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "dynlap/errors.hpp"

namespace dynlap {

namespace {

constexpr double kBaryTol = 1e-10;

double wrap_coordinate(double v, double lo, double hi) {
  const double period = hi - lo;
  double r = std::fmod(v - lo, period);
  if (r < 0.0) r += period;
  double out = lo + r;
  if (out >= hi) out = lo;
  return out;
}

double periodic_delta(double d, double period) {
  d = std::fmod(d, period);
  if (d > 0.5 * period) d -= period;
  if (d < -0.5 * period) d += period;
  return d;
}

}  // namespace

double Domain2D::diameter() const { return std::hypot(width(), height()); }

void Domain2D::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_min) || !std::isfinite(y_max)) {
    std::ostringstream msg;
    msg << "invalid domain bounds [" << x_min << ", " << x_max << "] x [" << y_min << ", " << y_max
        << "]";
    throw ConfigError(msg.str());
  }
}

Point2 Domain2D::wrap(const Point2& p) const {
  return {periodic_x ? wrap_coordinate(p.x(), x_min, x_max) : p.x(),
          periodic_y ? wrap_coordinate(p.y(), y_min, y_max) : p.y()};
}

Point2 Domain2D::periodic_difference(const Point2& a, const Point2& b) const {
  Point2 d = a - b;
  if (periodic_x) d.x() = periodic_delta(d.x(), width());
  if (periodic_y) d.y() = periodic_delta(d.y(), height());
  return d;
}

Domain2D Domain2D::torus(double length) { return {0.0, length, 0.0, length, true, true}; }

int Mesh::n_vertex_classes() const {
  int n = 0;
  for (int v = 0; v < n_vertices(); ++v)
    if (periodic_master[v] == v) ++n;
  return n;
}

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Point2 e1 = vertices[tri[1]] - vertices[tri[0]];
  const Point2 e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < n_triangles(); ++t) sum += signed_area(t);
  return sum;
}

double Mesh::diameter(int t) const {
  const auto& tri = triangles[t];
  double d = 0.0;
  for (int k = 0; k < 3; ++k)
    d = std::max(d, (vertices[tri[k]] - vertices[tri[(k + 1) % 3]]).norm());
  return d;
}

double Mesh::inscribed_diameter(int t) const {
  const auto& tri = triangles[t];
  double perimeter = 0.0;
  for (int k = 0; k < 3; ++k) perimeter += (vertices[tri[k]] - vertices[tri[(k + 1) % 3]]).norm();
  return 4.0 * std::abs(signed_area(t)) / perimeter;
}

Point2 Mesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh::mesh_width() const { return std::sqrt(total_area() / n_triangles()); }

Mesh build_regular_mesh(int nx, int ny, const Domain2D& domain) {
  domain.validate();
  if (nx < 2 || ny < 2) throw ConfigError("regular mesh needs at least 2 nodes per direction");

  Mesh mesh;
  mesh.domain = domain;
  mesh.grid = GridInfo{nx, ny};
  mesh.vertices.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = (i == nx - 1) ? domain.x_max : domain.x_min + domain.width() * i / (nx - 1);
      const double y = (j == ny - 1) ? domain.y_max : domain.y_min + domain.height() * j / (ny - 1);
      mesh.vertices.emplace_back(x, y);
    }
  }
  mesh.periodic_master.resize(mesh.vertices.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int mi = (domain.periodic_x && i == nx - 1) ? 0 : i;
      const int mj = (domain.periodic_y && j == ny - 1) ? 0 : j;
      mesh.periodic_master[j * nx + i] = mj * nx + mi;
    }
  }
  mesh.triangles.reserve(2 * static_cast<size_t>(nx - 1) * (ny - 1));
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int v00 = j * nx + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + nx;
      const int v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Point2& p) {
  const auto& tri = mesh.triangles[t];
  const Point2& a = mesh.vertices[tri[0]];
  const Point2& b = mesh.vertices[tri[1]];
  const Point2& c = mesh.vertices[tri[2]];
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) - (p.y() - a.y()) * (c.x() - a.x())) / det;
  const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x())) / det;
  return {1.0 - l1 - l2, l1, l2};
}

namespace {

Eigen::Vector3d clamp_barycentric(Eigen::Vector3d b) {
  b = b.cwiseMax(0.0);
  return b / b.sum();
}

}  // namespace

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  if (mesh.grid) return;
  for (const auto& v : mesh.vertices) box_.extend(v);
  const double n = std::max(1, mesh.n_triangles());
  const Eigen::Vector2d ext = box_.sizes().cwiseMax(1e-300);
  const double cell = std::sqrt(ext.x() * ext.y() / n);
  bx_ = std::clamp(static_cast<int>(std::ceil(ext.x() / cell)), 1, 4096);
  by_ = std::clamp(static_cast<int>(std::ceil(ext.y() / cell)), 1, 4096);
  buckets_.assign(static_cast<size_t>(bx_) * by_, {});
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    Eigen::AlignedBox2d tb;
    for (int k = 0; k < 3; ++k) tb.extend(mesh.vertices[mesh.triangles[t][k]]);
    const auto cell_of = [&](const Point2& p) {
      const Eigen::Vector2d r = (p - box_.min()).cwiseQuotient(ext);
      return std::pair{std::clamp(static_cast<int>(r.x() * bx_), 0, bx_ - 1),
                       std::clamp(static_cast<int>(r.y() * by_), 0, by_ - 1)};
    };
    const auto [i0, j0] = cell_of(tb.min());
    const auto [i1, j1] = cell_of(tb.max());
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<size_t>(j) * bx_ + i].push_back(t);
  }
}

std::optional<ElementLocation> PointLocator::locate_regular(const Point2& p) const {
  const Mesh& m = *mesh_;
  const auto [nx, ny] = *m.grid;
  const Domain2D& d = m.domain;
  const double fx = (p.x() - d.x_min) / d.width() * (nx - 1);
  const double fy = (p.y() - d.y_min) / d.height() * (ny - 1);
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx - 2);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny - 2);
  const double u = fx - i;
  const double v = fy - j;
  const int t = 2 * (j * (nx - 1) + i) + (v <= u ? 0 : 1);
  const Eigen::Vector3d b = barycentric(m, t, p);
  if (b.minCoeff() < -kBaryTol) return std::nullopt;
  return ElementLocation{t, clamp_barycentric(b)};
}

std::optional<ElementLocation> PointLocator::locate_bucketed(const Point2& p) const {
  const Eigen::Vector2d ext = box_.sizes().cwiseMax(1e-300);
  const Eigen::Vector2d r = (p - box_.min()).cwiseQuotient(ext);
  if (r.x() < -1e-9 || r.y() < -1e-9 || r.x() > 1.0 + 1e-9 || r.y() > 1.0 + 1e-9)
    return std::nullopt;
  const int i = std::clamp(static_cast<int>(r.x() * bx_), 0, bx_ - 1);
  const int j = std::clamp(static_cast<int>(r.y() * by_), 0, by_ - 1);
  std::optional<ElementLocation> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[static_cast<size_t>(j) * bx_ + i]) {
    const Eigen::Vector3d b = barycentric(*mesh_, t, p);
    const double mn = b.minCoeff();
    if (mn >= -kBaryTol && mn > best_min) {
      best_min = mn;
      best = ElementLocation{t, clamp_barycentric(b)};
      if (mn >= 0.0) break;
    }
  }
  return best;
}

std::optional<ElementLocation> PointLocator::try_locate(const Point2& p) const {
  return mesh_->grid ? locate_regular(p) : locate_bucketed(p);
}

ElementLocation PointLocator::locate(const Point2& p_in) const {
  const Domain2D& d = mesh_->domain;
  Point2 p = d.wrap(p_in);
  const double tol_x = 1e-10 * d.width();
  const double tol_y = 1e-10 * d.height();
  const bool outside_x = !d.periodic_x && (p.x() < d.x_min - tol_x || p.x() > d.x_max + tol_x);
  const bool outside_y = !d.periodic_y && (p.y() < d.y_min - tol_y || p.y() > d.y_max + tol_y);
  if (outside_x || outside_y || !p.allFinite()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "point (" << p_in.x() << ", " << p_in.y() << ") lies outside the domain";
    throw OutOfDomainError(msg.str(), p_in.x(), p_in.y());
  }
  if (!d.periodic_x) p.x() = std::clamp(p.x(), d.x_min, d.x_max);
  if (!d.periodic_y) p.y() = std::clamp(p.y(), d.y_min, d.y_max);

  if (auto loc = try_locate(p)) return *loc;
  // Seam triangles of periodic meshes may cover a shifted copy of p.
  for (int sy = -1; sy <= 1; ++sy) {
    if (sy != 0 && !d.periodic_y) continue;
    for (int sx = -1; sx <= 1; ++sx) {
      if (sx != 0 && !d.periodic_x) continue;
      if (sx == 0 && sy == 0) continue;
      const Point2 q(p.x() + sx * d.width(), p.y() + sy * d.height());
      if (auto loc = try_locate(q)) return *loc;
    }
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "no triangle contains point (" << p_in.x() << ", " << p_in.y() << ")";
  throw OutOfDomainError(msg.str(), p_in.x(), p_in.y());
}

ElementLocation locate_point(const Mesh& mesh, const Point2& p) {
  return PointLocator(mesh).locate(p);
}

void identify_periodic_vertices(Mesh& mesh) {
  const Domain2D& d = mesh.domain;
  constexpr double kScale = 4294967296.0;  // 2^32 buckets per period
  const auto key_of = [&](const Point2& p) {
    const Point2 w = d.wrap(p);
    auto kx = static_cast<long long>(std::llround((w.x() - d.x_min) / d.width() * kScale));
    auto ky = static_cast<long long>(std::llround((w.y() - d.y_min) / d.height() * kScale));
    if (d.periodic_x) kx %= static_cast<long long>(kScale);
    if (d.periodic_y) ky %= static_cast<long long>(kScale);
    return std::pair{kx, ky};
  };
  struct PairHash {
    size_t operator()(const std::pair<long long, long long>& k) const {
      return std::hash<long long>()(k.first * 1000003LL ^ k.second);
    }
  };
  std::unordered_map<std::pair<long long, long long>, int, PairHash> first;
  mesh.periodic_master.assign(mesh.vertices.size(), 0);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    auto [it, inserted] = first.emplace(key_of(mesh.vertices[v]), v);
    mesh.periodic_master[v] = it->second;
  }
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old_precision = os.precision(17);
  os << "vertices " << mesh.n_vertices() << " triangles " << mesh.n_triangles() << "\n";
  for (const auto& v : mesh.vertices) os << v.x() << " " << v.y() << "\n";
  for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
  os.precision(old_precision);
}

Mesh read_mesh(std::istream& is, const Domain2D& domain) {
  domain.validate();
  std::string w1, w2;
  int nv = -1, nt = -1;
  if (!(is >> w1 >> nv >> w2 >> nt) || w1 != "vertices" || w2 != "triangles" || nv < 0 || nt < 0)
    throw ConfigError("malformed mesh header");
  Mesh mesh;
  mesh.domain = domain;
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices)
    if (!(is >> v.x() >> v.y())) throw ConfigError("truncated mesh vertex list");
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) {
    if (!(is >> t[0] >> t[1] >> t[2])) throw ConfigError("truncated mesh triangle list");
    for (int k : t)
      if (k < 0 || k >= nv) throw ConfigError("mesh triangle references missing vertex");
  }
  identify_periodic_vertices(mesh);
  return mesh;
}

}  // namespace dynlap
