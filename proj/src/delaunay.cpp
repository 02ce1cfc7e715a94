// Bowyer-Watson triangulation with neighbour-walk point location.
//
// Ties between cocircular points are broken by tiny per-point weights keyed on
// the periodic master index (a weighted Delaunay / power-diagram dual).  Ghost
// copies of one point share its weight, so every copy of the periodic point set
// is triangulated identically and folding back onto the fundamental domain
// yields a consistent tiling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "dynlap/errors.hpp"
#include "dynlap/mesh.hpp"

namespace dynlap {

namespace {

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nbr;  // nbr[k] lies across the edge opposite v[k]
  bool alive = true;
};

double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

uint64_t splitmix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Triangulator {
 public:
  Triangulator(std::vector<Point2> pts, std::vector<double> weights)
      : pts_(std::move(pts)), w_(std::move(weights)) {}

  std::vector<Triangle> run() {
    const int n = static_cast<int>(pts_.size());
    n_real_ = n;
    Eigen::AlignedBox2d box;
    for (const auto& p : pts_) box.extend(p);
    const Point2 c = box.center();
    const double d = std::max(box.sizes().maxCoeff(), 1e-300);
    pts_.emplace_back(c.x() - 50.0 * d, c.y() - 30.0 * d);
    pts_.emplace_back(c.x() + 50.0 * d, c.y() - 30.0 * d);
    pts_.emplace_back(c.x(), c.y() + 50.0 * d);
    w_.insert(w_.end(), 3, 0.0);
    tris_.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});

    for (int idx : insertion_order(box)) insert(idx);

    std::vector<Triangle> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
      out.push_back(t.v);
    }
    return out;
  }

 private:
  // Boustrophedon bucket order keeps consecutive insertions spatially close.
  std::vector<int> insertion_order(const Eigen::AlignedBox2d& box) const {
    const int n = static_cast<int>(pts_.size()) - 3;
    const int g = std::max(1, static_cast<int>(std::sqrt(n / 4.0)));
    const Eigen::Vector2d ext = box.sizes().cwiseMax(1e-300);
    std::vector<int64_t> key(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d r = (pts_[i] - box.min()).cwiseQuotient(ext);
      const int bx = std::clamp(static_cast<int>(r.x() * g), 0, g - 1);
      int by = std::clamp(static_cast<int>(r.y() * g), 0, g - 1);
      if (bx % 2 == 1) by = g - 1 - by;
      key[i] = static_cast<int64_t>(bx) * g + by;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
    return order;
  }

  // Positive when p lies strictly inside the power circle of CCW triangle t.
  // A single bounding vertex is treated as a point at infinity, so the circle
  // degenerates to the open half-plane beyond the finite edge; otherwise hull
  // edges can lose out to triangles through the finite bounding vertices.
  double in_circle(const Tri& t, int p) const {
    const Point2& pp = pts_[p];
    int n_super = 0, k_super = 0;
    for (int k = 0; k < 3; ++k) {
      if (t.v[k] >= n_real_) {
        ++n_super;
        k_super = k;
      }
    }
    if (n_super == 1) {
      const Point2& a = pts_[t.v[(k_super + 1) % 3]];
      const Point2& b = pts_[t.v[(k_super + 2) % 3]];
      const double o = orient(a, b, pp);
      if (o != 0.0) return o;
      // On the line through the edge: inside exactly when strictly between a and b.
      return (pp - a).dot(pp - b) < 0.0 ? 1.0 : -1.0;
    }
    double m[3][3];
    for (int k = 0; k < 3; ++k) {
      const Point2 d = pts_[t.v[k]] - pp;
      m[k][0] = d.x();
      m[k][1] = d.y();
      m[k][2] = d.squaredNorm() - w_[t.v[k]] + w_[p];
    }
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }

  int locate(int p) {
    int t = last_;
    if (t < 0 || !tris_[t].alive) {
      t = static_cast<int>(tris_.size()) - 1;
      while (!tris_[t].alive) --t;
    }
    const Point2& pp = pts_[p];
    for (size_t steps = 0; steps < 4 * tris_.size() + 16; ++steps) {
      const Tri& tri = tris_[t];
      int next = -1;
      for (int k0 = 0; k0 < 3; ++k0) {
        const int k = (k0 + static_cast<int>(steps)) % 3;
        const Point2& a = pts_[tri.v[(k + 1) % 3]];
        const Point2& b = pts_[tri.v[(k + 2) % 3]];
        if (orient(a, b, pp) < 0.0) {
          next = tri.nbr[k];
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    // Walk failed to terminate (degenerate cycling); fall back to a scan.
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      if (!tris_[i].alive) continue;
      const Tri& tri = tris_[i];
      if (orient(pts_[tri.v[0]], pts_[tri.v[1]], pp) >= 0.0 &&
          orient(pts_[tri.v[1]], pts_[tri.v[2]], pp) >= 0.0 &&
          orient(pts_[tri.v[2]], pts_[tri.v[0]], pp) >= 0.0)
        return i;
    }
    throw GeometryError("triangulator could not locate an inserted point");
  }

  void insert(int p) {
    const int start = locate(p);
    std::vector<int> cavity{start};
    std::vector<char> in_cavity(tris_.size(), 0);
    in_cavity[start] = 1;
    for (size_t i = 0; i < cavity.size(); ++i) {
      for (int nb : tris_[cavity[i]].nbr) {
        if (nb < 0 || in_cavity[nb]) continue;
        if (in_circle(tris_[nb], p) > 0.0) {
          in_cavity[nb] = 1;
          cavity.push_back(nb);
        }
      }
    }
    // Grow the cavity until p sees every boundary edge; keeps it star-shaped.
    bool grown = true;
    while (grown) {
      grown = false;
      for (size_t i = 0; i < cavity.size(); ++i) {
        const Tri& t = tris_[cavity[i]];
        for (int k = 0; k < 3; ++k) {
          const int nb = t.nbr[k];
          if (nb >= 0 && in_cavity[nb]) continue;
          if (orient(pts_[t.v[(k + 1) % 3]], pts_[t.v[(k + 2) % 3]], pts_[p]) <= 0.0) {
            if (nb < 0) throw GeometryError("triangulator cavity reached the outer hull");
            in_cavity[nb] = 1;
            cavity.push_back(nb);
            grown = true;
          }
        }
      }
    }

    struct Edge {
      int a, b, outside;
    };
    std::vector<Edge> boundary;
    for (int ci : cavity) {
      const Tri& t = tris_[ci];
      for (int k = 0; k < 3; ++k) {
        const int nb = t.nbr[k];
        if (nb >= 0 && in_cavity[nb]) continue;
        boundary.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], nb});
      }
    }
    for (int ci : cavity) tris_[ci].alive = false;

    std::vector<int> created;
    created.reserve(boundary.size());
    for (const auto& e : boundary) {
      const int id = static_cast<int>(tris_.size());
      tris_.push_back({{e.a, e.b, p}, {-1, -1, e.outside}, true});
      created.push_back(id);
      if (e.outside >= 0) {
        Tri& o = tris_[e.outside];
        for (int k = 0; k < 3; ++k) {
          if (o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a) o.nbr[k] = id;
        }
      }
    }
    // New triangle (a, b, p): across (b, p) is the one starting at b, across
    // (p, a) the one ending at a.
    std::vector<std::pair<int, int>> by_start, by_end;
    for (int id : created) {
      by_start.emplace_back(tris_[id].v[0], id);
      by_end.emplace_back(tris_[id].v[1], id);
    }
    std::sort(by_start.begin(), by_start.end());
    std::sort(by_end.begin(), by_end.end());
    const auto find = [](const std::vector<std::pair<int, int>>& v, int key) {
      auto it = std::lower_bound(v.begin(), v.end(), std::pair{key, -1});
      return (it != v.end() && it->first == key) ? it->second : -1;
    };
    for (int id : created) {
      Tri& t = tris_[id];
      t.nbr[0] = find(by_start, t.v[1]);
      t.nbr[1] = find(by_end, t.v[0]);
    }
    last_ = created.empty() ? -1 : created.back();
  }

  std::vector<Point2> pts_;
  std::vector<double> w_;
  std::vector<Tri> tris_;
  int n_real_ = 0;
  int last_ = -1;
};

void check_not_collinear(std::span<const Point2> points) {
  if (points.size() < 3) throw GeometryError("triangulation needs at least 3 points");
  Eigen::AlignedBox2d box;
  for (const auto& p : points) box.extend(p);
  const double scale = box.sizes().squaredNorm();
  const Point2& a = points[0];
  size_t far = 0;
  double best = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    const double d = (points[i] - a).squaredNorm();
    if (d > best) {
      best = d;
      far = i;
    }
  }
  if (best <= 1e-24 * std::max(scale, 1e-300)) throw GeometryError("all points coincide");
  for (const auto& p : points)
    if (std::abs(orient(a, points[far], p)) > 1e-12 * scale) return;
  throw GeometryError("all points are collinear");
}

}  // namespace

Mesh delaunay_triangulate(std::span<const Point2> input, const Domain2D& domain) {
  domain.validate();
  check_not_collinear(input);
  const int n = static_cast<int>(input.size());

  std::vector<Point2> base(input.begin(), input.end());
  for (auto& p : base) p = domain.wrap(p);
  if (domain.periodic_x || domain.periodic_y) check_not_collinear(base);

  const double spacing = std::sqrt(domain.area() / n);
  const double weight_scale = 1e-12 * spacing * spacing;
  std::vector<double> base_weight(n);
  for (int i = 0; i < n; ++i)
    base_weight[i] = weight_scale * static_cast<double>(splitmix(i) >> 11) * 0x1.0p-53;

  // Ghost copies within a band around the fundamental domain.
  std::vector<Point2> pts = base;
  std::vector<double> weights = base_weight;
  std::vector<int> master(n);
  std::iota(master.begin(), master.end(), 0);
  const double band_x = std::max(0.25 * domain.width(), 8.0 * spacing);
  const double band_y = std::max(0.25 * domain.height(), 8.0 * spacing);
  for (int sy = -1; sy <= 1; ++sy) {
    if (sy != 0 && !domain.periodic_y) continue;
    for (int sx = -1; sx <= 1; ++sx) {
      if (sx != 0 && !domain.periodic_x) continue;
      if (sx == 0 && sy == 0) continue;
      for (int i = 0; i < n; ++i) {
        const Point2 q(base[i].x() + sx * domain.width(), base[i].y() + sy * domain.height());
        if (domain.periodic_x &&
            (q.x() < domain.x_min - band_x || q.x() > domain.x_max + band_x))
          continue;
        if (domain.periodic_y &&
            (q.y() < domain.y_min - band_y || q.y() > domain.y_max + band_y))
          continue;
        pts.push_back(q);
        weights.push_back(base_weight[i]);
        master.push_back(i);
      }
    }
  }

  auto tris = Triangulator(pts, weights).run();

  // Fold back: keep each periodic triangle once, by its centroid.
  Mesh mesh;
  mesh.domain = domain;
  mesh.vertices = base;
  mesh.periodic_master.resize(n);
  std::iota(mesh.periodic_master.begin(), mesh.periodic_master.end(), 0);
  std::vector<int> remap(pts.size(), -1);
  for (int i = 0; i < n; ++i) remap[i] = i;
  std::vector<Triangle> kept;
  for (const auto& t : tris) {
    const Point2 c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    if (domain.periodic_x && (c.x() < domain.x_min || c.x() >= domain.x_max)) continue;
    if (domain.periodic_y && (c.y() < domain.y_min || c.y() >= domain.y_max)) continue;
    Triangle out;
    for (int k = 0; k < 3; ++k) {
      const int v = t[k];
      if (remap[v] < 0) {
        remap[v] = mesh.n_vertices();
        mesh.vertices.push_back(pts[v]);
        mesh.periodic_master.push_back(master[v]);
      }
      out[k] = remap[v];
    }
    kept.push_back(out);
  }

  double mean_area = 0.0;
  for (const auto& t : kept)
    mean_area += 0.5 * orient(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  mean_area /= std::max<size_t>(1, kept.size());
  for (const auto& t : kept) {
    const double area =
        0.5 * orient(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    if (area < 1e-12 * mean_area) {
      ++mesh.discarded_slivers;
      continue;
    }
    mesh.triangles.push_back(t);
  }
  if (mesh.triangles.empty()) throw GeometryError("triangulation produced no triangles");
  return mesh;
}

int count_delaunay_violations(const Mesh& mesh, double rel_tol) {
  const Domain2D& d = mesh.domain;
  std::vector<Point2> probes;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.periodic_master[v] != v) continue;
    for (int sy = -1; sy <= 1; ++sy) {
      if (sy != 0 && !d.periodic_y) continue;
      for (int sx = -1; sx <= 1; ++sx) {
        if (sx != 0 && !d.periodic_x) continue;
        probes.emplace_back(mesh.vertices[v].x() + sx * d.width(),
                            mesh.vertices[v].y() + sy * d.height());
      }
    }
  }
  int violations = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Point2& a = mesh.vertices[mesh.triangles[t][0]];
    const Point2& b = mesh.vertices[mesh.triangles[t][1]];
    const Point2& c = mesh.vertices[mesh.triangles[t][2]];
    const double dd = 2.0 * orient(a, b, c);
    const Point2 bb = b - a, cc = c - a;
    const Point2 center = a + Point2(cc.y() * bb.squaredNorm() - bb.y() * cc.squaredNorm(),
                                     bb.x() * cc.squaredNorm() - cc.x() * bb.squaredNorm()) /
                                  dd;
    const double radius = (a - center).norm();
    for (const auto& p : probes) {
      if ((p - center).norm() < radius * (1.0 - rel_tol) && (p - a).norm() > 1e-14 * radius &&
          (p - b).norm() > 1e-14 * radius && (p - c).norm() > 1e-14 * radius)
        ++violations;
    }
  }
  return violations;
}

}  // namespace dynlap
