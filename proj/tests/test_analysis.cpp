#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "dynlap/analysis.hpp"
#include "dynlap/eigensolver.hpp"
#include "dynlap/errors.hpp"
#include "dynlap/to.hpp"

using namespace dynlap;

namespace {

std::shared_ptr<const FESpace> square_space(int n, int degree) {
  return std::make_shared<const FESpace>(
      std::make_shared<const Mesh>(build_regular_mesh(n, n, Domain2D::unit_square())), degree);
}

Eigen::VectorXd nodal(const FESpace& s, const std::function<double(const Point2&)>& f) {
  Eigen::VectorXd c(s.n_dofs());
  for (int i = 0; i < s.n_dofs(); ++i) c[i] = f(s.dof_coords()[i]);
  return c;
}

// Labels renumbered by first appearance, for comparisons up to relabeling.
std::vector<int> canonical(const std::vector<int>& labels) {
  std::map<int, int> seen;
  std::vector<int> out;
  for (int l : labels) out.push_back(seen.emplace(l, static_cast<int>(seen.size())).first->second);
  return out;
}

}  // namespace

TEST_CASE("interpolation to a finer space") {
  const auto coarse = square_space(5, 1);
  const auto fine = square_space(9, 1);
  const auto affine = [](const Point2& p) { return 2.0 * p.x() - 0.5 * p.y() + 0.25; };
  const Eigen::VectorXd fc = interpolate_to_fine(*coarse, nodal(*coarse, affine), *fine);
  CHECK((fc - nodal(*fine, affine)).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(coarse->n_dofs());
  CHECK((interpolate_to_fine(*coarse, ones, *fine) - Eigen::VectorXd::Ones(fine->n_dofs())).norm() == 0.0);

  const Eigen::VectorXd r = Eigen::VectorXd::Random(coarse->n_dofs());
  CHECK((interpolate_to_fine(*coarse, r, *coarse) - r).norm() < 1e-14);

  const auto p2c = square_space(5, 2);
  const auto p2f = square_space(17, 2);
  const auto quad = [](const Point2& p) { return p.x() * p.y() - p.y() * p.y(); };
  CHECK((interpolate_to_fine(*p2c, nodal(*p2c, quad), *p2f) - nodal(*p2f, quad)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigenvector and subspace errors") {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  const SparseSymMatrix M(SparseMatrix(eye.sparseView()));
  const Eigen::Vector3d e0(1, 0, 0), e1(0, 1, 0);
  CHECK(eigenvector_error(e0, e0, M) == doctest::Approx(0.0));
  CHECK(eigenvector_error(e0, e1, M) == doctest::Approx(1.0));
  const Eigen::Vector3d v(0.8, 0.6, 0.0);
  CHECK(eigenvector_error(e0, v, M) == doctest::Approx(0.6));
  CHECK(eigenvector_error(e0, -v, M) == doctest::Approx(0.6));
  CHECK_THROWS_AS(eigenvector_error(e0, 2.0 * e1, M), ContractViolation);

  CHECK(subspace_error(Eigen::MatrixXd(e0), Eigen::MatrixXd(v), M) == doctest::Approx(0.6));
  Eigen::MatrixXd basis(3, 2);
  basis << 1, 0, 0, 1, 0, 0;
  CHECK(subspace_error(basis, basis, M) < 1e-8);
  const double a = M_PI / 6.0;
  Eigen::Matrix2d rot;
  rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  const Eigen::MatrixXd rotated = basis * rot;
  CHECK(subspace_error(basis, rotated, M) < 1e-7);
  Eigen::MatrixXd skew(3, 2);
  skew << 1, 1, 0, 1, 0, 0;
  CHECK_THROWS_AS(subspace_error(basis, skew, M), ContractViolation);
  CHECK_THROWS_AS(subspace_error(basis, Eigen::MatrixXd(e0), M), ContractViolation);

  const Eigen::MatrixXd ortho = m_orthonormalize(skew, M);
  CHECK((ortho.transpose() * ortho - Eigen::Matrix2d::Identity()).norm() < 1e-14);
  Eigen::MatrixXd dependent(3, 2);
  dependent << 1, 2, 1, 2, 0, 0;
  CHECK_THROWS_AS(m_orthonormalize(dependent, M), NumericalError);
}

TEST_CASE("slope fitting") {
  const std::vector<double> h = {0.5, 0.25, 0.125, 0.0625};
  std::vector<double> e2, e4;
  for (double x : h) {
    e2.push_back(3.0 * x * x);
    e4.push_back(0.1 * std::pow(x, 4));
  }
  CHECK(std::abs(fit_slope(h, e2) - 2.0) < 1e-12);
  CHECK(std::abs(fit_slope(h, e4) - 4.0) < 1e-12);

  // End points of a P1 CG eigenvalue-error series on the standard map.
  const std::vector<double> hp = {0.5554, 0.01736};
  const std::vector<double> ep = {5.92e-2, 6.00e-5};
  CHECK(fit_slope(hp, ep) == doctest::Approx(2.0).epsilon(0.02));

  std::vector<double> with_bad = e2;
  with_bad[1] = 0.0;
  CHECK(std::abs(fit_slope(h, with_bad) - 2.0) < 1e-12);
  const std::vector<double> one = {0.5};
  CHECK_THROWS_AS(fit_slope(one, one), ConfigError);

  std::vector<ConvergenceRecord> recs;
  for (size_t i = 0; i < h.size(); ++i) recs.push_back({"cg", 1, h[i], e4[i], e2[i]});
  CHECK(fit_slope(recs, ErrorKind::eigenvalue) == doctest::Approx(4.0));
  CHECK(fit_slope(recs, ErrorKind::eigenspace) == doctest::Approx(2.0));
}

TEST_CASE("k-means") {
  SUBCASE("k equals the number of points") {
    Eigen::MatrixXd x(4, 2);
    x << 0, 0, 1, 0, 0, 1, 5, 5;
    const auto r = kmeans(x, 4, 1);
    std::vector<int> l = r.labels;
    std::sort(l.begin(), l.end());
    CHECK(l == std::vector<int>{0, 1, 2, 3});
    CHECK(r.objective_history.back() == 0.0);
  }
  SUBCASE("two separated blobs") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 0.3);
    Eigen::MatrixXd x(200, 2);
    for (int i = 0; i < 200; ++i) {
      const double cx = i < 100 ? -3.0 : 3.0;
      x(i, 0) = cx + g(rng);
      x(i, 1) = g(rng);
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto r = kmeans(x, 2, seed);
      for (int i = 0; i < 200; ++i) CHECK((r.labels[i] == r.labels[0]) == (i < 100));
      for (size_t it = 1; it < r.objective_history.size(); ++it)
        CHECK(r.objective_history[it] <= r.objective_history[it - 1] * (1 + 1e-12));
    }
  }
  SUBCASE("determinism and input permutation") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(300, 3);
    for (int i = 0; i < 300; ++i) {
      const int c = i % 4;
      for (int d = 0; d < 3; ++d) x(i, d) = 4.0 * ((c >> (d % 2)) & 1) + 0.2 * u(rng);
    }
    const auto a = kmeans(x, 4, 9);
    const auto b = kmeans(x, 4, 9);
    CHECK(a.labels == b.labels);

    std::vector<int> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
    Eigen::MatrixXd xp(300, 3);
    for (int i = 0; i < 300; ++i) xp.row(i) = x.row(perm[i]);
    const auto c = kmeans(xp, 4, 9);
    std::vector<int> unpermuted(300);
    for (int i = 0; i < 300; ++i) unpermuted[perm[i]] = c.labels[i];
    CHECK(canonical(unpermuted) == canonical(a.labels));
  }
  SUBCASE("objective is non-increasing on overlapping data") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(500, 2);
    for (int i = 0; i < 500; ++i) x.row(i) = Eigen::RowVector2d(u(rng), u(rng));
    const auto r = kmeans(x, 8, 4);
    for (size_t it = 1; it < r.objective_history.size(); ++it)
      CHECK(r.objective_history[it] <= r.objective_history[it - 1] * (1 + 1e-12));
  }
  Eigen::MatrixXd tiny(2, 1);
  tiny << 0, 1;
  CHECK_THROWS_AS(kmeans(tiny, 3, 1), ConfigError);
  CHECK_THROWS_AS(kmeans(tiny, 0, 1), ConfigError);
}

TEST_CASE("sample grid and coherent partition") {
  const Domain2D torus = Domain2D::torus(1.0);
  const auto g = sample_grid(torus, 4, 2);
  REQUIRE(g.size() == 8);
  CHECK(g[3].x() == doctest::Approx(0.75));
  CHECK(g[4].y() == doctest::Approx(0.5));
  const auto sq = sample_grid(Domain2D::unit_square(), 3, 3);
  CHECK(sq.back().x() == doctest::Approx(1.0));
  CHECK(sq.back().y() == doctest::Approx(1.0));

  const auto space = square_space(9, 1);
  const auto D = assemble_stiffness(*space, identity_tensor_field(), 1);
  const auto M = assemble_mass(*space);
  const auto r = solve_smallest(D, M, 3);
  const auto single = coherent_partition(*space, r.vectors, 1, 1, 20, 10);
  CHECK(single.labels.size() == 200);
  CHECK(std::all_of(single.labels.begin(), single.labels.end(), [](int l) { return l == 0; }));
  const auto two = coherent_partition(*space, r.vectors, 2, 1, 20, 10);
  CHECK(std::count(two.labels.begin(), two.labels.end(), 0) > 50);
  CHECK(std::count(two.labels.begin(), two.labels.end(), 1) > 50);
}

TEST_CASE("Fourier error on the circle") {
  const auto s1 = [](double x) { return std::sin(2 * M_PI * x); };
  const auto ds1 = [](double x) { return 2 * M_PI * std::cos(2 * M_PI * x); };
  const auto e = shift1d_fourier_error(s1, ds1, 100000);
  CHECK(e.eigvec_error < 1e-7);
  CHECK(e.eigval_rel_error < 1e-10);

  const auto s2 = [](double x) { return 3.0 * std::sin(4 * M_PI * x); };
  const auto ds2 = [](double x) { return 12.0 * M_PI * std::cos(4 * M_PI * x); };
  CHECK(shift1d_fourier_error(s2, ds2, 100000).eigvec_error == doctest::Approx(1.0).epsilon(1e-10));

  // P1 non-adaptive TO at h = 2^-7.
  const CircleSpace s(128, 1);
  const auto A = collocation_matrix(s, s, [](double x) { return shift_map_1d(x, -0.15); });
  const auto D = assemble_stiffness(s);
  const auto r = dense_solve(to_stiffness(D, D, A.matrix), assemble_mass(s), 2);
  const auto err = shift1d_fourier_error(s, r.vectors.col(1), r.eigenvalues[1]);
  CHECK(err.eigvec_error == doctest::Approx(8.98e-5).epsilon(0.01));
}
