#include <cmath>
#include <random>

#include "doctest.h"
#include "dynlap/errors.hpp"
#include "dynlap/dynamics.hpp"

using namespace dynlap;

namespace {

double wrapped_distance(const Point2& a, const Point2& b) {
  return Domain2D::torus(2.0 * M_PI).periodic_difference(a, b).norm();
}

}  // namespace

TEST_CASE("integrator on analytic fields") {
  const VectorField constant = [](double, const Point2&) { return Point2(1.0, 0.0); };
  CHECK((integrate(constant, Point2(0, 0), 0.0, 1.0) - Point2(1, 0)).norm() < 1e-10);

  const VectorField rotation = [](double, const Point2& p) { return Point2(-p.y(), p.x()); };
  CHECK((integrate(rotation, Point2(1, 0), 0.0, M_PI / 2) - Point2(0, 1)).norm() < 1e-7);
  // Backwards in time.
  CHECK((integrate(rotation, Point2(0, 1), M_PI / 2, 0.0) - Point2(1, 0)).norm() < 1e-7);

  const double t[] = {0.0, 0.5, 1.0};
  const auto traj = integrate_trajectory(constant, Point2(0, 0), t);
  REQUIRE(traj.size() == 3);
  CHECK(traj[1].x() == doctest::Approx(0.5));
}

TEST_CASE("integrator failures and settings validation") {
  IntegratorSettings s;
  s.max_steps = 5;
  const VectorField rotation = [](double, const Point2& p) { return Point2(-p.y(), p.x()); };
  CHECK_THROWS_AS(integrate(rotation, Point2(1, 0), 0.0, 100.0, s), IntegrationError);
  IntegratorSettings bad;
  bad.rel_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  // Finite-time blow-up: x' = x^2 from 1 explodes at t = 1.
  const VectorField blowup = [](double, const Point2& p) { return Point2(p.x() * p.x(), 0.0); };
  CHECK_THROWS_AS(integrate(blowup, Point2(1, 0), 0.0, 2.0), IntegrationError);
}

TEST_CASE("cylinder trajectory round trip") {
  IntegratorSettings s;
  s.rel_tol = s.abs_tol = 1e-11;
  const VectorField f = [](double t, const Point2& p) { return cylinder_field(t, p); };
  const Point2 x0(1.0, 1.3);
  const Point2 x1 = integrate(f, x0, 0.0, 40.0, s);
  const Point2 back = integrate(f, x1, 40.0, 0.0, s);
  CHECK((back - x0).norm() < 1e-5);
}

TEST_CASE("standard map") {
  CHECK(standard_map(Point2(0, 0)).norm() == 0.0);
  CHECK((standard_map(Point2(M_PI, 0)) - Point2(M_PI, 0)).norm() < 1e-15);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (int i = 0; i < 100; ++i) {
    const Point2 p(u(rng), u(rng));
    CHECK(wrapped_distance(standard_map_inverse(standard_map(p)), p) < 1e-12);
    CHECK(wrapped_distance(standard_map(standard_map_inverse(p)), p) < 1e-12);
  }
  const Point2 p(1.0, 2.0);
  const double a = kStandardMapA;
  Eigen::Matrix2d dt;
  dt << 1 + a * std::cos(1.0), 1, a * std::cos(1.0), 1;
  CHECK((standard_map_jacobian(p) - dt).norm() < 1e-14);

  const FlowMap flow = make_flow("standard_map");
  CHECK((jacobian_fd(flow, p, 0.0, 1.0).matrix - dt).norm() < 1e-6);
  CHECK((flow.jacobian(p, 0.0, 1.0) - dt).norm() < 1e-14);
  CHECK_THROWS_AS(flow.forward(p, 0.0, 0.5), ConfigError);
}

TEST_CASE("identity flow Jacobian") {
  const FlowMap flow = make_flow("identity");
  const Point2 p(0.3, 0.7);
  CHECK((flow.jacobian(p, 0.0, 1.0) - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  CHECK((jacobian_fd(flow, p, 0.0, 1.0).matrix - Eigen::Matrix2d::Identity()).norm() < 1e-12);
  // Near the boundary the stencil becomes one-sided and stays exact.
  const auto near = jacobian_fd(flow, Point2(0.0, 1.0), 0.0, 1.0);
  CHECK(near.one_sided);
  CHECK((near.matrix - Eigen::Matrix2d::Identity()).norm() < 1e-10);
}

TEST_CASE("cylinder field") {
  const CylinderParams q;
  const Point2 v = cylinder_field(0.0, Point2(0.0, M_PI / 2));
  CHECK(v.y() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(cylinder_field(0.3, Point2(1.0, 1e-9)).y()) < 1e-8);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double d = 1e-5;
  for (int i = 0; i < 50; ++i) {
    const double t = 40.0 * u(rng);
    const Point2 p(2 * M_PI * u(rng), 0.1 + 2.9 * u(rng));
    const auto div = [&](const CylinderParams& cp) {
      const Point2 ex(d, 0), ey(0, d);
      return (cylinder_field(t, p + ex, cp).x() - cylinder_field(t, p - ex, cp).x()) / (2 * d) +
             (cylinder_field(t, p + ey, cp).y() - cylinder_field(t, p - ey, cp).y()) / (2 * d);
    };
    CylinderParams q0 = q;
    q0.epsilon = 0.0;
    CHECK(std::abs(div(q0)) < 1e-6);
    // d/dx of eps G(g) sin(t/2) with G(g) = 1/(g^2+1)^2.
    const double phase = p.x() - q.nu * t;
    const double g = std::sin(phase) * std::sin(p.y()) + 0.5 * p.y() - 0.25 * M_PI;
    const double dG = -4.0 * g / std::pow(g * g + 1.0, 3);
    const double expected = q.epsilon * dG * std::cos(phase) * std::sin(p.y()) * std::sin(0.5 * t);
    CHECK(std::abs(div(q) - expected) < 1e-6);
  }
}

TEST_CASE("cylinder flow map is area preserving for epsilon = 0") {
  IntegratorSettings s;
  s.rel_tol = s.abs_tol = 1e-10;
  const FlowMap flow = make_flow("cylinder", {{"epsilon", 0.0}}, s);
  CHECK(flow.volume_preserving);
  CHECK_FALSE(make_flow("cylinder").volume_preserving);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Point2 p(2 * M_PI * u(rng), 0.1 + (M_PI - 0.2) * u(rng));
    const double det = jacobian_fd(flow, p, 0.0, 40.0, FDSettings{1e-6}).matrix.determinant();
    CHECK(std::abs(det - 1.0) < 1e-3);
  }
}

TEST_CASE("bickley field") {
  const BickleyParams b = BickleyParams::standard();
  CHECK(b.k[0] == doctest::Approx(2.0 / 6.371));
  CHECK(b.c[2] == doctest::Approx(0.461 * b.U0));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double t = 40.0 * kSecondsPerDay * u(rng);
    const Point2 p(20.0 * u(rng), -3.0 + 6.0 * u(rng));
    const double d = 1e-5;
    const double dpsi_dx = (bickley_stream_function(t, p + Point2(d, 0), b) -
                            bickley_stream_function(t, p - Point2(d, 0), b)) / (2 * d);
    const double dpsi_dy = (bickley_stream_function(t, p + Point2(0, d), b) -
                            bickley_stream_function(t, p - Point2(0, d), b)) / (2 * d);
    const Point2 v = bickley_field(t, p, b);
    CHECK(v.x() == doctest::Approx(-dpsi_dy).epsilon(1e-6));
    CHECK(v.y() == doctest::Approx(dpsi_dx).epsilon(1e-6));
    const double div = (bickley_field(t, p + Point2(d, 0), b).x() - bickley_field(t, p - Point2(d, 0), b).x()) / (2 * d) +
                       (bickley_field(t, p + Point2(0, d), b).y() - bickley_field(t, p - Point2(0, d), b).y()) / (2 * d);
    CHECK(std::abs(div) < 1e-6 * b.U0);
  }
  BickleyParams zonal = b;
  zonal.A = {0.0, 0.0, 0.0};
  CHECK(bickley_field(1e5, Point2(3.0, 0.0), zonal).y() == 0.0);
  CHECK(bickley_field(1e5, Point2(3.0, 1.0), zonal).y() == 0.0);

  const FlowMap flow = make_flow("bickley");
  CHECK(flow.domain.periodic_x);
  CHECK_FALSE(flow.domain.periodic_y);
  CHECK(flow.domain.width() == doctest::Approx(M_PI * 6.371));
  CHECK(flow.t_end == doctest::Approx(40.0 * kSecondsPerDay));
}

TEST_CASE("circle shift") {
  CHECK(shift_map_1d(0.9, 0.15) == doctest::Approx(0.05));
  CHECK(shift_map_1d(0.3, 0.0) == 0.3);
  CHECK(shift_map_1d(shift_map_1d(0.77, 0.15), -0.15) == doctest::Approx(0.77).epsilon(1e-15));
}

TEST_CASE("flow presets") {
  CHECK_THROWS_AS(make_flow("lorenz"), ConfigError);
  const FlowMap cyl = make_flow("cylinder");
  CHECK(cyl.domain.y_min == doctest::Approx(0.01));
  CHECK(cyl.domain.y_max == doctest::Approx(M_PI - 0.01));
  const Point2 p(1.0, 1.0);
  const Point2 q = cyl(p);
  CHECK((cyl.domain.periodic_difference(cyl.inverse_map(q), p)).norm() < 1e-5);
}
