#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "dynlap/eigensolver.hpp"
#include "dynlap/errors.hpp"
#include "dynlap/to.hpp"

using namespace dynlap;

namespace {

FlowMap translation(double dx, double dy) {
  FlowMap f;
  f.name = "translation";
  f.domain = Domain2D::torus(1.0);
  f.forward = [f, dx, dy](const Point2& p, double, double) {
    return f.domain.wrap(p + Point2(dx, dy));
  };
  f.inverse = [f, dx, dy](const Point2& p, double, double) {
    return f.domain.wrap(p - Point2(dx, dy));
  };
  return f;
}

CircleMap circle_inverse_shift(double alpha) {
  return [alpha](double x) { return shift_map_1d(x, -alpha); };
}

// Smallest nontrivial eigenvalue of the 1D non-adaptive TO problem.
double shift_eigenvalue(int n, int degree, double alpha) {
  const CircleSpace s(n, degree);
  const auto A = collocation_matrix(s, s, circle_inverse_shift(alpha));
  const auto D = assemble_stiffness(s);
  const auto Dt = to_stiffness(D, D, A.matrix);
  return dense_solve(Dt, assemble_mass(s), 2).eigenvalues[1];
}

}  // namespace

TEST_CASE("identity collocation") {
  const auto mesh = std::make_shared<const Mesh>(build_regular_mesh(6, 6, Domain2D::torus(1.0)));
  for (int deg = 1; deg <= 2; ++deg) {
    const FESpace s(mesh, deg);
    const auto A = collocation_matrix(s, s, [](const Point2& p) { return p; });
    CHECK((Eigen::MatrixXd(A.matrix) - Eigen::MatrixXd::Identity(s.n_dofs(), s.n_dofs())).norm() < 1e-12);
  }
}

TEST_CASE("1D collocation") {
  SUBCASE("grid-aligned shift gives a cyclic permutation and D~ = D0") {
    const CircleSpace s(16, 1);
    const auto A = collocation_matrix(s, s, circle_inverse_shift(3.0 / 16.0));
    const Eigen::MatrixXd a(A.matrix);
    for (int i = 0; i < 16; ++i) {
      CHECK(a.row(i).sum() == doctest::Approx(1.0));
      CHECK(a(i, (i + 16 - 3) % 16) == doctest::Approx(1.0));
    }
    const auto D = assemble_stiffness(s);
    CHECK((to_stiffness(D, D, A.matrix).dense() - D.dense()).norm() < 1e-10);
  }
  SUBCASE("alpha = 0.15, h = 1/8") {
    const CircleSpace s(8, 1);
    const Eigen::MatrixXd a(collocation_matrix(s, s, circle_inverse_shift(0.15)).matrix);
    for (int i = 0; i < 8; ++i) {
      CHECK(a.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(a(i, (i + 7) % 8) == doctest::Approx(0.8));
      CHECK(a(i, (i + 6) % 8) == doctest::Approx(0.2));
    }
  }
  SUBCASE("P2 rows sum to one") {
    const CircleSpace s(10, 2);
    const Eigen::MatrixXd a(collocation_matrix(s, s, circle_inverse_shift(0.137)).matrix);
    CHECK((a.rowwise().sum() - Eigen::VectorXd::Ones(20)).norm() < 1e-13);
  }
}

TEST_CASE("1D TO eigenvalue matches the circulant closed form") {
  const double alpha = 0.15;
  for (int n : {16, 32, 64}) {
    const double h = 1.0 / n;
    const double w = 2.0 * M_PI * h;
    const double mu_h = 6.0 / (h * h) * (1.0 - std::cos(w)) / (2.0 + std::cos(w));
    const double theta = alpha / h - std::floor(alpha / h);
    const double expected = mu_h * (1.0 - theta * (1.0 - theta) * (1.0 - std::cos(w)));
    CHECK(shift_eigenvalue(n, 1, alpha) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("1D L2-Galerkin reference agrees with collocation at n = 32") {
  const CircleSpace s(32, 1);
  const auto inv = circle_inverse_shift(0.15);
  const Eigen::MatrixXd G = l2_galerkin_matrix_dense(s, s, inv);
  CHECK((G.rowwise().sum() - Eigen::VectorXd::Ones(32)).norm() < 1e-8);
  const SparseMatrix Gs = G.sparseView(1e-14, 1.0);
  const auto D = assemble_stiffness(s);
  const double galerkin = dense_solve(to_stiffness(D, D, Gs), assemble_mass(s), 2).eigenvalues[1];
  const double colloc = shift_eigenvalue(32, 1, 0.15);
  CHECK(std::abs(galerkin - colloc) / colloc < 0.05);
}

TEST_CASE("2D L2-Galerkin reference") {
  const FlowMap id = make_flow("identity");
  const auto mesh = std::make_shared<const Mesh>(build_regular_mesh(5, 5, id.domain));
  const FESpace s(mesh, 1);
  const Eigen::MatrixXd G = l2_galerkin_matrix_dense(s, s, id, 2);
  CHECK((G - Eigen::MatrixXd::Identity(s.n_dofs(), s.n_dofs())).norm() < 1e-10);

  const FlowMap sm = make_flow("standard_map");
  const auto tmesh = std::make_shared<const Mesh>(build_regular_mesh(9, 9, sm.domain));
  const FESpace ts(tmesh, 1);
  const Eigen::MatrixXd Gs = l2_galerkin_matrix_dense(ts, ts, sm, 8);
  CHECK((Gs.rowwise().sum() - Eigen::VectorXd::Ones(ts.n_dofs())).norm() < 1e-8);

  const auto big = std::make_shared<const Mesh>(build_regular_mesh(50, 50, id.domain));
  const FESpace bs(big, 1);
  CHECK_THROWS_AS(l2_galerkin_matrix_dense(bs, bs, id, 2), ContractViolation);
}

TEST_CASE("non-adaptive TO on the standard map") {
  const FlowMap flow = make_flow("standard_map");
  for (int deg = 1; deg <= 2; ++deg) {
    const auto space = std::make_shared<const FESpace>(
        std::make_shared<const Mesh>(build_regular_mesh(17, 17, flow.domain)), deg);
    const TOProblem p = make_to_problem(space, flow, TOVariant::non_adaptive, 2 * deg - 1);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space->n_dofs());
    CHECK((p.A.matrix * ones - ones).lpNorm<Eigen::Infinity>() < 1e-10);
    const auto Dt = assemble_to_stiffness(p);
    CHECK((Dt * ones).lpNorm<Eigen::Infinity>() < 1e-8);
    const Eigen::MatrixXd d = Dt.dense();
    CHECK((d - d.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * es.eigenvalues().cwiseAbs().maxCoeff());
  }
}

TEST_CASE("identity TO stiffness equals D0") {
  const FlowMap id = make_flow("identity");
  const auto space = std::make_shared<const FESpace>(
      std::make_shared<const Mesh>(build_regular_mesh(7, 7, id.domain)), 1);
  const TOProblem p = make_to_problem(space, id, TOVariant::non_adaptive, 1);
  CHECK((assemble_to_stiffness(p).dense() - p.D0.dense()).norm() < 1e-12);
}

TEST_CASE("out-of-domain preimages are reported") {
  const auto space = std::make_shared<const FESpace>(
      std::make_shared<const Mesh>(build_regular_mesh(5, 5, Domain2D::unit_square())), 1);
  const auto shifted = [](const Point2& p) { return Point2(p.x() + 0.3, p.y()); };
  CHECK_THROWS_AS(collocation_matrix(*space, *space, shifted), OutOfDomainError);
}

TEST_CASE("adaptive TO") {
  SUBCASE("identity flow") {
    const FlowMap id = make_flow("identity");
    const FESpace s(std::make_shared<const Mesh>(build_regular_mesh(6, 6, id.domain)), 1);
    const auto img = adaptive_image_space(s, id);
    CHECK(img.space1->n_dofs() == s.n_dofs());
    CHECK(img.space1->mesh().total_area() == doctest::Approx(1.0));
    CHECK((Eigen::MatrixXd(img.A.matrix) - Eigen::MatrixXd::Identity(s.n_dofs(), s.n_dofs())).norm() == 0.0);
    for (int i = 0; i < s.n_dofs(); ++i)
      CHECK((img.space1->dof_coords()[i] - s.dof_coords()[i]).norm() < 1e-15);
  }
  SUBCASE("rigid translation keeps the spectrum") {
    // Random points, since a regular grid is cocircular and its Delaunay
    // triangulation is not unique.
    const FlowMap tr = translation(0.31, 0.17);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point2> pts;
    for (int i = 0; i < 60; ++i) pts.emplace_back(u(rng), u(rng));
    const auto space = std::make_shared<const FESpace>(
        std::make_shared<const Mesh>(delaunay_triangulate(pts, tr.domain)), 1);
    const TOProblem p = make_to_problem(space, tr, TOVariant::adaptive, 1);
    CHECK(count_delaunay_violations(p.space1->mesh()) == 0);
    const int n = space->n_dofs();
    const auto ref = dense_solve(p.D0, p.M, n).eigenvalues;
    const auto img = dense_solve(p.D1, assemble_mass(*p.space1), n).eigenvalues;
    CHECK((ref - img).cwiseAbs().maxCoeff() < 1e-8 * ref.maxCoeff());
  }
  SUBCASE("standard map on a 17x17 torus mesh") {
    const FlowMap flow = make_flow("standard_map");
    const auto space = std::make_shared<const FESpace>(
        std::make_shared<const Mesh>(build_regular_mesh(17, 17, flow.domain)), 1);
    const TOProblem p = make_to_problem(space, flow, TOVariant::adaptive, 1);
    CHECK(count_delaunay_violations(p.space1->mesh()) == 0);
    CHECK(p.space1->mesh().total_area() == doctest::Approx(flow.domain.area()).epsilon(1e-10));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(space->n_dofs());
    CHECK((p.A.matrix * ones - ones).norm() == 0.0);
    CHECK((assemble_to_stiffness(p) * ones).lpNorm<Eigen::Infinity>() < 1e-8);
  }
  SUBCASE("P2 is rejected") {
    const FlowMap id = make_flow("identity");
    const FESpace s(std::make_shared<const Mesh>(build_regular_mesh(4, 4, id.domain)), 2);
    CHECK_THROWS_AS(adaptive_image_space(s, id), ConfigError);
  }
}

TEST_CASE("H1 interpolation error of the pushforward decreases under refinement") {
  const double alpha = 0.15;
  const auto f = [](double x) { return std::sin(2 * M_PI * x) + 0.3 * std::cos(4 * M_PI * x); };
  const auto df = [](double x) {
    return 2 * M_PI * std::cos(2 * M_PI * x) - 1.2 * M_PI * std::sin(4 * M_PI * x);
  };
  for (int deg = 1; deg <= 2; ++deg) {
    double previous = INFINITY;
    for (int n : {8, 16, 32, 64, 128}) {
      const CircleSpace s(n, deg);
      Eigen::VectorXd c(s.n_dofs());
      const auto x = s.dof_coords();
      for (int i = 0; i < s.n_dofs(); ++i) c[i] = f(x[i] - alpha);
      double e = 0.0;
      const int m = 20000;
      for (int j = 0; j < m; ++j) {
        const double y = (j + 0.5) / m;
        const double dv = s.evaluate(c, y) - f(y - alpha);
        const double dd = s.evaluate_derivative(c, y) - df(y - alpha);
        e += (dv * dv + dd * dd) / m;
      }
      e = std::sqrt(e);
      CHECK(e < previous);
      previous = e;
    }
  }
}

TEST_CASE("pullback stiffness stays sparse under refinement") {
  const FlowMap flow = make_flow("standard_map");
  std::vector<double> max_nnz;
  for (int n : {17, 33, 65}) {
    const auto space = std::make_shared<const FESpace>(
        std::make_shared<const Mesh>(build_regular_mesh(n, n, flow.domain)), 1);
    const TOProblem p = make_to_problem(space, flow, TOVariant::non_adaptive, 1);
    const SparseMatrix full = assemble_to_stiffness(p).full();
    double worst = 0.0;
    for (int k = 0; k < full.outerSize(); ++k) {
      int count = 0;
      for (SparseMatrix::InnerIterator it(full, k); it; ++it) ++count;
      worst = std::max(worst, double(count));
    }
    max_nnz.push_back(worst);
  }
  // With equal initial and image mesh widths the overlap bound is constant.
  CHECK(max_nnz[2] <= 1.5 * max_nnz[0]);
}
