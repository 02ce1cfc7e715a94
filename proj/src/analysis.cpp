#include "dynlap/analysis.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "dynlap/errors.hpp"
#include "dynlap/parallel.hpp"

namespace dynlap {

Eigen::MatrixXd interpolate_to_fine(const FESpace& coarse, const Eigen::MatrixXd& coeffs,
                                    const FESpace& fine) {
  if (coeffs.rows() != coarse.n_dofs())
    throw ContractViolation("coefficient count does not match the coarse space");
  const PointLocator locator(coarse.mesh());
  const auto& nodes = fine.dof_coords();
  Eigen::MatrixXd out(fine.n_dofs(), coeffs.cols());
  parallel_for(nodes.size(), [&](size_t i) {
    const ElementLocation loc = locator.locate(nodes[i]);
    const ShapeEval s = shape_functions(coarse.degree(), loc.barycentric);
    const auto dofs = coarse.cell_dofs(loc.triangle_index);
    for (Eigen::Index c = 0; c < coeffs.cols(); ++c) {
      double v = 0.0;
      for (int k = 0; k < s.count; ++k) v += s.values[k] * coeffs(dofs[k], c);
      out(static_cast<Eigen::Index>(i), c) = v;
    }
  });
  return out;
}

Eigen::VectorXd interpolate_to_fine(const FESpace& coarse, const Eigen::VectorXd& coeffs,
                                    const FESpace& fine) {
  const Eigen::MatrixXd m = coeffs;
  return interpolate_to_fine(coarse, m, fine).col(0);
}

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SparseSymMatrix& M) {
  const Eigen::MatrixXd mb = M.view() * b;
  return a.transpose() * mb;
}

void check_orthonormal(const Eigen::MatrixXd& basis, const SparseSymMatrix& M, const char* name) {
  const Eigen::MatrixXd g = gram(basis, basis, M);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(g(i, j) - expected) > 1e-6) {
        std::ostringstream msg;
        msg << name << " basis is not M-orthonormal: Gram entry (" << i << ", " << j
            << ") = " << g(i, j);
        throw ContractViolation(msg.str());
      }
    }
  }
}

}  // namespace

Eigen::MatrixXd m_orthonormalize(const Eigen::MatrixXd& basis, const SparseSymMatrix& M) {
  const Eigen::MatrixXd g = gram(basis, basis, M);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw NumericalError("basis vectors are linearly dependent");
  // L_ii is the norm of column i after removing its projection on the
  // previous ones; rounding alone leaves about sqrt(eps) of it.
  const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().cwiseAbs();
  const Eigen::VectorXd norms = g.diagonal().cwiseSqrt();
  if ((pivots.array() <= 1e-6 * norms.array()).any())
    throw NumericalError("basis vectors are linearly dependent");
  // basis * L^{-T}
  const Eigen::MatrixXd lt = llt.matrixU();
  return lt.transpose().triangularView<Eigen::Lower>().solve(basis.transpose()).transpose();
}

double eigenvector_error(const Eigen::VectorXd& v_ref, const Eigen::VectorXd& v_h,
                         const SparseSymMatrix& M) {
  if (v_ref.size() != M.dimension() || v_h.size() != M.dimension())
    throw ContractViolation("vector length does not match the mass matrix");
  const Eigen::VectorXd mh = M * v_h;
  const double nr = std::sqrt(v_ref.dot(M * v_ref));
  const double nh = std::sqrt(v_h.dot(mh));
  if (std::abs(nr - 1.0) > 1e-6 || std::abs(nh - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "eigenvector_error needs L2-normalized vectors, got norms " << nr << " and " << nh;
    throw ContractViolation(msg.str());
  }
  const double ip = v_ref.dot(mh);
  return std::sqrt(std::max(0.0, 1.0 - ip * ip));
}

double subspace_error(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& test,
                      const SparseSymMatrix& M) {
  if (ref.cols() != test.cols())
    throw ContractViolation("subspace_error needs bases of equal dimension");
  if (ref.rows() != M.dimension() || test.rows() != M.dimension())
    throw ContractViolation("basis length does not match the mass matrix");
  check_orthonormal(ref, M, "reference");
  check_orthonormal(test, M, "test");
  const Eigen::MatrixXd g = gram(ref, test, M);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const double smin = svd.singularValues().minCoeff();
  return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

double fit_slope(std::span<const double> h, std::span<const double> err) {
  if (h.size() != err.size()) throw ContractViolation("fit_slope: h and error lengths differ");
  std::vector<double> x, y;
  for (size_t i = 0; i < h.size(); ++i) {
    if (!(err[i] > 0.0) || !std::isfinite(err[i]) || !(h[i] > 0.0)) {
      std::cerr << "warning: fit_slope skips point h=" << h[i] << " err=" << err[i] << "\n";
      continue;
    }
    x.push_back(std::log(h[i]));
    y.push_back(std::log(err[i]));
  }
  if (x.size() < 2) throw ConfigError("fit_slope needs at least two usable points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_slope needs at least two distinct h");
  return sxy / sxx;
}

double fit_slope(std::span<const ConvergenceRecord> records, ErrorKind kind) {
  std::vector<double> h, e;
  for (const auto& r : records) {
    h.push_back(r.h);
    e.push_back(kind == ErrorKind::eigenvalue ? r.eigval_rel_err : r.eigspace_err);
  }
  return fit_slope(h, e);
}

// ---------------------------------------------------------------------------

namespace {

// Uniform double in [0, 1) from the top 53 bits; platform independent.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& features, int k, std::uint64_t seed,
                    int max_iterations) {
  const Eigen::Index n = features.rows();
  if (k < 1) throw ConfigError("k-means needs k >= 1");
  if (k > n) throw ConfigError("k-means: k exceeds the number of points");
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  Eigen::MatrixXd centroids(k, features.cols());
  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::Index first = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n));
  centroids.row(0) = features.row(std::min(first, n - 1));
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], (features.row(i) - centroids.row(c - 1)).squaredNorm());
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    } else {
      d2.maxCoeff(&pick);
    }
    centroids.row(c) = features.row(pick);
  }

  KMeansResult r;
  r.labels.assign(n, -1);
  std::vector<double> dist(n, 0.0);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (features.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (r.labels[i] != best) changed = true;
      r.labels[i] = best;
      dist[i] = best_d;
      objective += best_d;
    }
    r.objective_history.push_back(objective);
    r.iterations = it + 1;
    if (!changed && it > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, features.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(r.labels[i]) += features.row(i);
      ++counts[r.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: move it onto the worst-served point.
      Eigen::Index far = 0;
      for (Eigen::Index i = 1; i < n; ++i)
        if (dist[i] > dist[far]) far = i;
      centroids.row(c) = features.row(far);
      dist[far] = 0.0;
    }
  }
  r.centroids = centroids;
  return r;
}

std::vector<Point2> sample_grid(const Domain2D& d, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("sample grid needs positive sizes");
  const auto coord = [](double lo, double hi, int n, int i, bool periodic) {
    if (n == 1) return 0.5 * (lo + hi);
    return lo + (hi - lo) * i / (periodic ? n : n - 1);
  };
  std::vector<Point2> pts;
  pts.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      pts.emplace_back(coord(d.x_min, d.x_max, nx, i, d.periodic_x),
                       coord(d.y_min, d.y_max, ny, j, d.periodic_y));
  return pts;
}

Eigen::MatrixXd sample_functions(const FESpace& space, const Eigen::MatrixXd& coeffs,
                                 std::span<const Point2> points) {
  const PointLocator locator(space.mesh());
  Eigen::MatrixXd out(points.size(), coeffs.cols());
  parallel_for(points.size(), [&](size_t i) {
    const ElementLocation loc = locator.locate(points[i]);
    const ShapeEval s = shape_functions(space.degree(), loc.barycentric);
    const auto dofs = space.cell_dofs(loc.triangle_index);
    for (Eigen::Index c = 0; c < coeffs.cols(); ++c) {
      double v = 0.0;
      for (int q = 0; q < s.count; ++q) v += s.values[q] * coeffs(dofs[q], c);
      out(static_cast<Eigen::Index>(i), c) = v;
    }
  });
  return out;
}

Partition coherent_partition(const FESpace& space, const Eigen::MatrixXd& vectors, int k,
                             std::uint64_t seed, int nx, int ny) {
  Partition p;
  p.k = k;
  p.seed = seed;
  p.sample_points = sample_grid(space.mesh().domain, nx, ny);
  if (k == 1) {
    p.labels.assign(p.sample_points.size(), 0);
    return p;
  }
  if (vectors.cols() < k) throw ConfigError("coherent_partition needs k eigenvectors");
  const Eigen::MatrixXd features =
      sample_functions(space, vectors.middleCols(1, k - 1), p.sample_points);
  p.labels = kmeans(features, k, seed).labels;
  return p;
}

// ---------------------------------------------------------------------------

namespace {

ShiftErrors fourier_error(const std::function<double(double)>& f, double eigenvalue, bool rayleigh,
                          const std::function<double(double)>& df, int n_points) {
  if (n_points < 8) throw ConfigError("trapezoid rule needs at least 8 points");
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> vals(n_points);
  double a = 0.0, b = 0.0, nn = 0.0, dd = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double x = static_cast<double>(i) / n_points;
    const double v = f(x);
    vals[i] = v;
    a += v * std::sin(two_pi * x);
    b += v * std::cos(two_pi * x);
    nn += v * v;
    if (rayleigh) {
      const double d = df(x);
      dd += d * d;
    }
  }
  a /= n_points;
  b /= n_points;
  nn /= n_points;
  if (!(nn > 0.0)) throw NumericalError("shift1d_fourier_error: function vanishes");
  const double scale = 1.0 / std::sqrt(nn);
  double err = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double x = static_cast<double>(i) / n_points;
    const double p = 2.0 * (a * std::sin(two_pi * x) + b * std::cos(two_pi * x));
    const double d = (p - vals[i]) * scale;
    err += d * d;
  }
  err /= n_points;
  const double mu = rayleigh ? (dd / n_points) / nn : eigenvalue;
  const double exact = two_pi * two_pi;
  return {std::sqrt(err), std::abs(mu - exact) / exact};
}

}  // namespace

ShiftErrors shift1d_fourier_error(const CircleSpace& space, const Eigen::VectorXd& coeffs,
                                  double eigenvalue, int n_points) {
  if (coeffs.size() != space.n_dofs()) throw ContractViolation("coefficient count mismatch");
  return fourier_error([&](double x) { return space.evaluate(coeffs, x); }, eigenvalue, false, {},
                       n_points);
}

ShiftErrors shift1d_fourier_error(const std::function<double(double)>& f,
                                  const std::function<double(double)>& df, int n_points) {
  return fourier_error(f, 0.0, true, df, n_points);
}

}  // namespace dynlap
