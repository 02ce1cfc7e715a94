#include "dynlap/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "dynlap/errors.hpp"

namespace dynlap {

namespace {

constexpr int kDenseCap = 2000;

// Largest-magnitude component made positive (first index on ties).
void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index idx = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best * (1.0 + 1e-12)) {
      best = a;
      idx = i;
    }
  }
  if (v[idx] < 0.0) v = -v;
}

void check_pair(const SparseSymMatrix& D, const SparseSymMatrix& M, int k) {
  if (D.dimension() != M.dimension()) throw ContractViolation("D and M differ in dimension");
  if (k < 1 || k > D.dimension())
    throw ConfigError("requested " + std::to_string(k) + " eigenpairs of a problem of dimension " +
                      std::to_string(D.dimension()));
}

// Median of D_ii / M_ii, a typical size of the spectrum of (D, M).
double median_diagonal_ratio(const SparseSymMatrix& D, const SparseSymMatrix& M) {
  const Eigen::VectorXd d = D.lower().diagonal();
  const Eigen::VectorXd m = M.lower().diagonal();
  std::vector<double> r;
  for (int i = 0; i < d.size(); ++i)
    if (m[i] > 0.0 && d[i] > 0.0) r.push_back(d[i] / m[i]);
  if (r.empty()) return 1.0;
  std::nth_element(r.begin(), r.begin() + r.size() / 2, r.end());
  return r[r.size() / 2];
}

struct Ritz {
  double mu;
  Eigen::VectorXd u;
  double residual;
  bool converged;
};

class ShiftInvertLanczos {
 public:
  ShiftInvertLanczos(const SparseSymMatrix& D, const SparseSymMatrix& M, const EigenSettings& s)
      : D_(D), M_(M), settings_(s), n_(D.dimension()) {
    norm_d_ = D.norm_inf();
    norm_m_ = M.norm_inf();
    // The shift only has to dominate rounding in the factorization of the
    // singular D, and must stay far below the wanted eigenvalues so that they
    // remain separated after inversion.  CG tensors can span 10 orders of
    // magnitude, so the scale is the median diagonal ratio, not a norm.
    const double scale = median_diagonal_ratio(D, M);
    for (const double factor : {1e-9, 1e-7, 1e-5, 1e-3, 1e-1}) {
      sigma_ = -factor * scale;
      SparseMatrix shifted = D.lower() - sigma_ * M.lower();
      factor_.compute(shifted);
      if (factor_.info() != Eigen::Success) continue;
      const Eigen::VectorXd diag = factor_.vectorD();
      if ((diag.array() > 0.0).all() && diag.allFinite()) return;
    }
    throw NumericalError("D - sigma M is not positive definite for sigma down to " +
                         std::to_string(sigma_) + "; D is not positive semidefinite");
  }

  EigenResult solve(int k) {
    std::mt19937_64 rng(settings_.seed);
    std::normal_distribution<double> normal;
    const auto random_vector = [&] {
      Eigen::VectorXd v(n_);
      for (int i = 0; i < n_; ++i) v[i] = normal(rng);
      return v;
    };

    Eigen::VectorXd start = random_vector();
    double worst_residual = 0.0;
    for (int run = 0; run < settings_.max_runs; ++run) {
      const int free_dim = n_ - locked_count();
      if (free_dim <= 0) break;
      const int window = std::max(k - locked_count(), 1) + 3;
      const std::vector<Ritz> ritz = lanczos(start, std::min(free_dim, std::max(40, 2 * window + 20)));
      if (ritz.empty()) {
        start = random_vector();
        continue;
      }
      if (locked_count() >= k && ritz.front().converged &&
          ritz.front().mu >= kth_locked(k) - 1e-10 * std::max(1.0, std::abs(kth_locked(k))))
        return finish(k);

      Eigen::VectorXd restart = Eigen::VectorXd::Zero(n_);
      bool any_unconverged = false;
      worst_residual = 0.0;
      for (int i = 0; i < std::min<int>(window, static_cast<int>(ritz.size())); ++i) {
        if (ritz[i].converged) {
          lock(ritz[i].u);
        } else {
          restart += ritz[i].u;
          any_unconverged = true;
          worst_residual = std::max(worst_residual, ritz[i].residual);
        }
      }
      if (locked_count() >= n_) return finish(k);
      start = any_unconverged ? restart : random_vector();
    }
    if (locked_count() >= k) return finish(k);
    std::ostringstream msg;
    msg << "shift-invert Lanczos did not converge: " << locked_count() << " of " << k
        << " pairs locked, worst remaining residual " << worst_residual;
    throw NumericalError(msg.str());
  }

 private:
  int locked_count() const { return static_cast<int>(locked_.size()); }

  double kth_locked(int k) const {
    std::vector<double> mus = locked_mu_;
    std::nth_element(mus.begin(), mus.begin() + (k - 1), mus.end());
    return mus[k - 1];
  }

  Eigen::VectorXd apply_m(const Eigen::VectorXd& v) const { return M_.view() * v; }

  // Removes M-components along the locked vectors and the columns of v, twice.
  void orthogonalize(Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& v,
                     const std::vector<Eigen::VectorXd>& mv) const {
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t i = 0; i < locked_.size(); ++i) w -= locked_m_[i].dot(w) * locked_[i];
      for (size_t i = 0; i < v.size(); ++i) w -= mv[i].dot(w) * v[i];
    }
  }

  std::vector<Ritz> lanczos(Eigen::VectorXd start, int m) {
    std::vector<Eigen::VectorXd> v, mv;
    std::vector<double> alpha, beta;
    orthogonalize(start, v, mv);
    Eigen::VectorXd ms = apply_m(start);
    double norm = std::sqrt(std::max(start.dot(ms), 0.0));
    if (!(norm > 0.0)) return {};
    v.push_back(start / norm);
    mv.push_back(ms / norm);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd w = factor_.solve(mv[j]);
      alpha.push_back(mv[j].dot(w));
      orthogonalize(w, v, mv);
      if (j + 1 == m) break;
      Eigen::VectorXd mw = apply_m(w);
      const double b = std::sqrt(std::max(w.dot(mw), 0.0));
      if (!(b > 1e-12 * std::abs(alpha.front()))) break;  // invariant subspace
      beta.push_back(b);
      v.push_back(w / b);
      mv.push_back(mw / b);
    }
    const int steps = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
    for (int i = 0; i < steps; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < steps) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    std::vector<Ritz> out;
    for (int i = steps - 1; i >= 0; --i) {
      const double theta = es.eigenvalues()[i];
      if (!(theta > 0.0)) continue;
      Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
      for (int j = 0; j < steps; ++j) u += es.eigenvectors()(j, i) * v[j];
      const double mu = sigma_ + 1.0 / theta;
      const Eigen::VectorXd r = (D_ * u) - mu * apply_m(u);
      const double res = r.norm();
      const double bound = residual_bound(D_, M_, mu, u, settings_.tolerance);
      out.push_back({mu, std::move(u), res, res <= bound});
    }
    return out;
  }

  void lock(Eigen::VectorXd u) {
    std::vector<Eigen::VectorXd> none;
    orthogonalize(u, none, none);
    Eigen::VectorXd mu_vec = apply_m(u);
    const double norm = std::sqrt(u.dot(mu_vec));
    u /= norm;
    mu_vec /= norm;
    const double mu = u.dot((D_ * u));
    locked_.push_back(std::move(u));
    locked_m_.push_back(std::move(mu_vec));
    locked_mu_.push_back(mu);
  }

  EigenResult finish(int k) const {
    std::vector<int> order(locked_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return locked_mu_[a] < locked_mu_[b]; });
    EigenResult r;
    r.eigenvalues.resize(k);
    r.vectors.resize(n_, k);
    r.residuals.resize(k);
    for (int i = 0; i < k; ++i) {
      const int j = order[i];
      r.eigenvalues[i] = locked_mu_[j];
      r.vectors.col(i) = locked_[j];
      normalize_sign(r.vectors.col(i));
      r.residuals[i] = ((D_ * locked_[j]) - locked_mu_[j] * (M_ * locked_[j])).norm();
    }
    return r;
  }

  const SparseSymMatrix& D_;
  const SparseSymMatrix& M_;
  EigenSettings settings_;
  int n_;
  double norm_d_ = 0.0;
  double norm_m_ = 0.0;
  double sigma_ = 0.0;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> factor_;
  std::vector<Eigen::VectorXd> locked_, locked_m_;
  std::vector<double> locked_mu_;
};

}  // namespace

double residual_bound(const SparseSymMatrix& D, const SparseSymMatrix& M, double mu,
                      const Eigen::VectorXd& u, double tol) {
  return tol * (D.norm_inf() + std::abs(mu) * M.norm_inf()) * u.norm();
}

EigenResult solve_smallest(const SparseSymMatrix& D, const SparseSymMatrix& M, int k,
                           const EigenSettings& settings) {
  check_pair(D, M, k);
  ShiftInvertLanczos solver(D, M, settings);
  return solver.solve(k);
}

EigenResult dense_solve(const SparseSymMatrix& D, const SparseSymMatrix& M, int k) {
  check_pair(D, M, k);
  if (D.dimension() > kDenseCap)
    throw ContractViolation("dense_solve refuses dimension " + std::to_string(D.dimension()) +
                            " (cap " + std::to_string(kDenseCap) + ")");
  const Eigen::MatrixXd d = D.dense();
  const Eigen::MatrixXd m = M.dense();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(d, m,
                                                              Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw NumericalError("dense generalized eigensolver failed");
  EigenResult r;
  r.eigenvalues = es.eigenvalues().head(k);
  r.vectors = es.eigenvectors().leftCols(k);
  r.residuals.resize(k);
  for (int i = 0; i < k; ++i) {
    normalize_sign(r.vectors.col(i));
    r.residuals[i] = (d * r.vectors.col(i) - r.eigenvalues[i] * (m * r.vectors.col(i))).norm();
  }
  return r;
}

}  // namespace dynlap
