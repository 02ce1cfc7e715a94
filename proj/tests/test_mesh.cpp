#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dynlap/errors.hpp"
#include "dynlap/mesh.hpp"

using namespace dynlap;

TEST_CASE("regular mesh counts and area") {
  const Mesh m2 = build_regular_mesh(2, 2, Domain2D::unit_square());
  CHECK(m2.n_triangles() == 2);
  CHECK(m2.n_vertices() == 4);

  const Mesh m3 = build_regular_mesh(3, 3, Domain2D::unit_square());
  CHECK(m3.n_triangles() == 8);
  CHECK(m3.n_vertices() == 9);
  CHECK(m3.total_area() == doctest::Approx(1.0).epsilon(1e-14));
  for (int t = 0; t < m3.n_triangles(); ++t) CHECK(m3.signed_area(t) > 0.0);
}

TEST_CASE("torus mesh identifies seam vertices") {
  const Mesh m = build_regular_mesh(3, 3, Domain2D::torus(1.0));
  CHECK(m.n_triangles() == 8);
  CHECK(m.n_vertices() == 9);
  CHECK(m.n_vertex_classes() == 4);
}

TEST_CASE("mesh width is sqrt of mean triangle area") {
  const double L = 2.0 * M_PI;
  const Mesh m = build_regular_mesh(9, 9, Domain2D::torus(L));
  CHECK(m.mesh_width() == doctest::Approx(L / 8.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("invalid domain and grid sizes are rejected") {
  Domain2D bad;
  bad.x_max = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(build_regular_mesh(1, 5, Domain2D::unit_square()), ConfigError);
}

TEST_CASE("delaunay of small point sets") {
  SUBCASE("unit square corners") {
    const std::vector<Point2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const Mesh m = delaunay_triangulate(pts, Domain2D::unit_square());
    CHECK(m.n_triangles() == 2);
    CHECK(m.total_area() == doctest::Approx(1.0));
  }
  SUBCASE("corners and center") {
    const std::vector<Point2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    const Mesh m = delaunay_triangulate(pts, Domain2D::unit_square());
    REQUIRE(m.n_triangles() == 4);
    for (const auto& tri : m.triangles)
      CHECK((tri[0] == 4 || tri[1] == 4 || tri[2] == 4));
    CHECK(m.total_area() == doctest::Approx(1.0));
  }
  SUBCASE("collinear points") {
    const std::vector<Point2> pts = {{0, 0}, {0.5, 0.5}, {1, 1}};
    CHECK_THROWS_AS(delaunay_triangulate(pts, Domain2D::unit_square()), GeometryError);
  }
}

TEST_CASE("delaunay of random points passes the empty-circumcircle check") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Point2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    for (int i = 0; i < 50; ++i) pts.emplace_back(u(rng), u(rng));
    const Mesh m = delaunay_triangulate(pts, Domain2D::unit_square());
    CHECK(count_delaunay_violations(m) == 0);
    CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("periodic delaunay covers the torus once") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  std::vector<Point2> pts;
  for (int i = 0; i < 200; ++i) pts.emplace_back(u(rng), u(rng));
  const Domain2D torus = Domain2D::torus(2.0 * M_PI);
  const Mesh m = delaunay_triangulate(pts, torus);
  CHECK(m.total_area() == doctest::Approx(torus.area()).epsilon(1e-10));
  CHECK(m.n_vertex_classes() == 200);
  // Euler characteristic of the torus: V - E + F = 0 with E = 3F/2.
  CHECK(m.n_triangles() == 400);
  CHECK(count_delaunay_violations(m) == 0);
}

TEST_CASE("point location") {
  const Mesh m = build_regular_mesh(17, 17, Domain2D::unit_square());
  PointLocator loc(m);

  SUBCASE("vertices give unit barycentric coordinates") {
    const auto l = loc.locate(m.vertices[40]);
    const auto& tri = m.triangles[l.triangle_index];
    int hits = 0;
    for (int k = 0; k < 3; ++k) {
      if (tri[k] == 40) {
        CHECK(l.barycentric[k] == doctest::Approx(1.0));
        ++hits;
      }
    }
    CHECK(hits == 1);
  }
  SUBCASE("centroid of triangle 0") {
    const auto l = loc.locate(m.centroid(0));
    CHECK(l.triangle_index == 0);
    for (int k = 0; k < 3; ++k) CHECK(l.barycentric[k] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("affine functions are reproduced") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto f = [](const Point2& p) { return 2.0 * p.x() + 3.0 * p.y() - 1.0; };
    for (int i = 0; i < 100; ++i) {
      const Point2 p(u(rng), u(rng));
      const auto l = loc.locate(p);
      const auto& tri = m.triangles[l.triangle_index];
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += l.barycentric[k] * f(m.vertices[tri[k]]);
      CHECK(std::abs(v - f(p)) < 1e-10);
    }
  }
  SUBCASE("outside a non-periodic domain") {
    CHECK_THROWS_AS(loc.locate(Point2(1.5, 0.5)), OutOfDomainError);
  }
}

TEST_CASE("point location on a delaunay mesh and periodic wrap") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(u(rng), u(rng));
  const Domain2D torus = Domain2D::torus(1.0);
  const Mesh m = delaunay_triangulate(pts, torus);
  PointLocator loc(m);
  for (int i = 0; i < 200; ++i) {
    const Point2 p(u(rng) * 3.0 - 1.0, u(rng) * 3.0 - 1.0);
    const auto l = loc.locate(p);
    REQUIRE(l.triangle_index >= 0);
    CHECK(l.barycentric.minCoeff() > -1e-10);
    CHECK(l.barycentric.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("mesh text round trip") {
  const Mesh m = build_regular_mesh(5, 4, Domain2D::torus(1.0));
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss, m.domain);
  CHECK(r.n_vertices() == m.n_vertices());
  CHECK(r.n_triangles() == m.n_triangles());
  CHECK(r.n_vertex_classes() == m.n_vertex_classes());
  for (int v = 0; v < m.n_vertices(); ++v) CHECK((r.vertices[v] - m.vertices[v]).norm() < 1e-15);
}
