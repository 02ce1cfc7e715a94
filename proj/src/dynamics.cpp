#include "dynlap/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dynlap/errors.hpp"

namespace dynlap {

namespace {

std::atomic<std::uint64_t> g_integrate_calls{0};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const Point2& err, const Point2& y0, const Point2& y1,
                  const IntegratorSettings& s) {
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double sc = s.abs_tol + s.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    sum += (err[i] / sc) * (err[i] / sc);
  }
  return std::sqrt(sum / 2.0);
}

double initial_step(const VectorField& f, double t0, const Point2& y0, const Point2& f0,
                    double dir, const IntegratorSettings& s) {
  const auto scaled = [&](const Point2& v) {
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc = s.abs_tol + s.rel_tol * std::abs(y0[i]);
      sum += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(sum / 2.0);
  };
  const double d0 = scaled(y0);
  const double d1 = scaled(f0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Point2 y1 = y0 + dir * h0 * f0;
  const Point2 f1 = f(t0 + dir * h0, y1);
  const double d2 = scaled(f1 - f0) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
  return std::min(100.0 * h0, h1);
}

}  // namespace

void IntegratorSettings::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_steps <= 0)
    throw ConfigError("integrator tolerances must be positive");
}

std::uint64_t integrator_call_count() { return g_integrate_calls.load(); }

Point2 integrate(const VectorField& f, const Point2& x0, double t0, double t1,
                 const IntegratorSettings& s) {
  s.validate();
  g_integrate_calls.fetch_add(1, std::memory_order_relaxed);
  if (t0 == t1) return x0;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  double t = t0;
  Point2 y = x0;
  Point2 k1 = f(t, y);
  double h = std::min(initial_step(f, t, y, k1, dir, s), span);
  for (int step = 0; step < s.max_steps; ++step) {
    const double remaining = std::abs(t1 - t);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;
    const Point2 k2 = f(t + c2 * hs, y + hs * (a21 * k1));
    const Point2 k3 = f(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Point2 k4 = f(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Point2 k5 = f(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Point2 k6 =
        f(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Point2 y_new = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Point2 k7 = f(t + hs, y_new);
    const Point2 err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y_new, s);
    if (!std::isfinite(en)) {
      h *= 0.25;
      continue;
    }
    if (en <= 1.0) {
      t = last ? t1 : t + hs;
      y = y_new;
      k1 = k7;
      if (last) return y;
      h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(en, 1e-10), -0.2)));
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) break;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "integration from t=" << t0 << " to t=" << t1 << " stopped at t=" << t << " at ("
      << y.x() << ", " << y.y() << ")";
  throw IntegrationError(msg.str(), t, y.x(), y.y());
}

std::vector<Point2> integrate_trajectory(const VectorField& field, const Point2& x0,
                                         std::span<const double> times,
                                         const IntegratorSettings& settings) {
  std::vector<Point2> out;
  out.reserve(times.size());
  Point2 y = x0;
  for (size_t i = 0; i < times.size(); ++i) {
    if (i > 0) y = integrate(field, y, times[i - 1], times[i], settings);
    out.push_back(y);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Eigen::Matrix2d> jacobians_fd_impl(const FlowMap& flow, const Point2& p,
                                               std::span<const double> times,
                                               const FDSettings& fd, bool* one_sided) {
  const Domain2D& d = flow.domain;
  const double delta = fd.step * d.diameter();
  if (!(delta > 0.0) || delta >= d.diameter())
    throw ConfigError("finite-difference step must lie in (0, domain diameter)");

  std::vector<Eigen::Matrix2d> jac(times.size(), Eigen::Matrix2d::Zero());
  bool any_one_sided = false;
  for (int dim = 0; dim < 2; ++dim) {
    const bool periodic = dim == 0 ? d.periodic_x : d.periodic_y;
    const double lo = dim == 0 ? d.x_min : d.y_min;
    const double hi = dim == 0 ? d.x_max : d.y_max;
    Point2 e = Point2::Zero();
    e[dim] = delta;

    const auto traj = [&](const Point2& q) {
      try {
        return flow.trajectory(q, times);
      } catch (const IntegrationError& err) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "finite-difference stencil point (" << q.x() << ", " << q.y()
            << ") failed: " << err.what();
        throw IntegrationError(msg.str(), err.t(), err.x(), err.y());
      }
    };

    // Differences are divided by the spacing of the rounded stencil points,
    // which makes affine maps exact.
    if (periodic || (p[dim] - delta >= lo && p[dim] + delta <= hi)) {
      const Point2 qp = p + e, qm = p - e;
      const double width = qp[dim] - qm[dim];
      const auto plus = traj(qp);
      const auto minus = traj(qm);
      for (size_t k = 0; k < times.size(); ++k)
        jac[k].col(dim) = d.periodic_difference(plus[k], minus[k]) / width;
    } else {
      any_one_sided = true;
      const double sign = (p[dim] - delta < lo) ? 1.0 : -1.0;
      const Point2 q1 = p + sign * e, q2 = p + 2.0 * sign * e;
      const double h1 = q1[dim] - p[dim], h2 = q2[dim] - p[dim];
      const auto f0 = traj(p);
      const auto f1 = traj(q1);
      const auto f2 = traj(q2);
      for (size_t k = 0; k < times.size(); ++k) {
        const Point2 d1 = d.periodic_difference(f1[k], f0[k]);
        const Point2 d2 = d.periodic_difference(f2[k], f0[k]);
        jac[k].col(dim) = (h2 * h2 * d1 - h1 * h1 * d2) / (h1 * h2 * (h2 - h1));
      }
    }
  }
  if (one_sided) *one_sided = any_one_sided;
  return jac;
}

}  // namespace

FDJacobian jacobian_fd(const FlowMap& flow, const Point2& p, double t0, double t1,
                       const FDSettings& fd) {
  const std::array<double, 2> times = {t0, t1};
  FDJacobian out;
  out.matrix = jacobians_fd_impl(flow, p, times, fd, &out.one_sided)[1];
  return out;
}

std::vector<Eigen::Matrix2d> jacobians_fd(const FlowMap& flow, const Point2& p,
                                          std::span<const double> times, const FDSettings& fd) {
  return jacobians_fd_impl(flow, p, times, fd, nullptr);
}

std::vector<Eigen::Matrix2d> flow_jacobians(const FlowMap& flow, const Point2& p,
                                            std::span<const double> times,
                                            const FDSettings& fd) {
  if (flow.analytic_jacobians) return flow.analytic_jacobians(p, times);
  return jacobians_fd(flow, p, times, fd);
}

Eigen::Matrix2d FlowMap::jacobian(const Point2& p, double t0, double t1) const {
  const std::array<double, 2> times = {t0, t1};
  return flow_jacobians(*this, p, times)[1];
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double v) {
  double r = std::fmod(v, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r >= kTwoPi ? 0.0 : r;
}

}  // namespace

Point2 standard_map(const Point2& p, double a) {
  const double s = a * std::sin(p.x());
  return {wrap_2pi(p.x() + p.y() + s), wrap_2pi(p.y() + s)};
}

Point2 standard_map_inverse(const Point2& p, double a) {
  const double x = wrap_2pi(p.x() - p.y());
  return {x, wrap_2pi(p.y() - a * std::sin(x))};
}

Eigen::Matrix2d standard_map_jacobian(const Point2& p, double a) {
  const double ac = a * std::cos(p.x());
  Eigen::Matrix2d j;
  j << 1.0 + ac, 1.0, ac, 1.0;
  return j;
}

Point2 cylinder_field(double t, const Point2& p, const CylinderParams& q) {
  const double amp = 1.0 + 0.125 * std::sin(2.0 * std::sqrt(5.0) * t);
  const double phase = p.x() - q.nu * t;
  const double g = std::sin(phase) * std::sin(p.y()) + 0.5 * p.y() - 0.25 * std::numbers::pi;
  const double big_g = 1.0 / ((g * g + 1.0) * (g * g + 1.0));
  return {q.c - amp * std::sin(phase) * std::cos(p.y()) + q.epsilon * big_g * std::sin(0.5 * t),
          amp * std::cos(phase) * std::sin(p.y())};
}

BickleyParams BickleyParams::standard() {
  BickleyParams b;
  for (int n = 0; n < 3; ++n) b.k[n] = 2.0 * (n + 1) / b.r0;
  b.c[2] = 0.461 * b.U0;
  b.c[1] = 0.205 * b.U0;
  b.c[0] = b.c[2] + 0.5 * (std::sqrt(5.0) - 1.0) * (b.k[1] / b.k[0]) * (b.c[1] - b.c[2]);
  return b;
}

double bickley_stream_function(double t, const Point2& p, const BickleyParams& b) {
  const double sech = 1.0 / std::cosh(p.y() / b.L);
  double psi = -b.U0 * b.L * std::tanh(p.y() / b.L);
  for (int n = 0; n < 3; ++n)
    psi += b.A[n] * b.U0 * b.L * sech * sech * std::cos(b.k[n] * (p.x() - b.c[n] * t));
  return psi;
}

Point2 bickley_field(double t, const Point2& p, const BickleyParams& b) {
  const double sech = 1.0 / std::cosh(p.y() / b.L);
  const double sech2 = sech * sech;
  const double th = std::tanh(p.y() / b.L);
  // u = -d(psi)/dy, v = d(psi)/dx
  double u = b.U0 * sech2;
  double v = 0.0;
  for (int n = 0; n < 3; ++n) {
    const double arg = b.k[n] * (p.x() - b.c[n] * t);
    u += 2.0 * b.A[n] * b.U0 * sech2 * th * std::cos(arg);
    v -= b.A[n] * b.U0 * b.L * b.k[n] * sech2 * std::sin(arg);
  }
  return {u, v};
}

double shift_map_1d(double x, double alpha) {
  double r = std::fmod(x + alpha, 1.0);
  if (r < 0.0) r += 1.0;
  return r >= 1.0 ? 0.0 : r;
}

// ---------------------------------------------------------------------------

FlowMap make_ode_flow(std::string name, VectorField field, Domain2D domain, double t_begin,
                      double t_end, const IntegratorSettings& settings, bool volume_preserving) {
  settings.validate();
  FlowMap flow;
  flow.name = std::move(name);
  flow.domain = domain;
  flow.t_begin = t_begin;
  flow.t_end = t_end;
  flow.volume_preserving = volume_preserving;
  flow.forward = [field, settings](const Point2& p, double t0, double t1) {
    return integrate(field, p, t0, t1, settings);
  };
  flow.inverse = [field, settings](const Point2& p, double t0, double t1) {
    return integrate(field, p, t1, t0, settings);
  };
  flow.trajectory = [field, settings](const Point2& p, std::span<const double> times) {
    return integrate_trajectory(field, p, times, settings);
  };
  return flow;
}

namespace {

double param(const SystemParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int iteration_count(double t0, double t1) {
  const double n = t1 - t0;
  if (std::abs(n - std::round(n)) > 1e-12)
    throw ConfigError("standard map times must differ by whole iterations");
  return static_cast<int>(std::lround(n));
}

}  // namespace

FlowMap make_flow(const std::string& system, const SystemParams& params,
                  const IntegratorSettings& settings) {
  if (system == "identity") {
    FlowMap flow;
    flow.name = system;
    flow.domain = Domain2D::unit_square();
    flow.forward = [](const Point2& p, double, double) { return p; };
    flow.inverse = [](const Point2& p, double, double) { return p; };
    flow.trajectory = [](const Point2& p, std::span<const double> times) {
      return std::vector<Point2>(times.size(), p);
    };
    flow.analytic_jacobians = [](const Point2&, std::span<const double> times) {
      return std::vector<Eigen::Matrix2d>(times.size(), Eigen::Matrix2d::Identity());
    };
    return flow;
  }
  if (system == "standard_map") {
    const double a = param(params, "a", kStandardMapA);
    FlowMap flow;
    flow.name = system;
    flow.domain = Domain2D::torus(kTwoPi);
    const auto apply = [a](Point2 p, int n) {
      for (int i = 0; i < n; ++i) p = standard_map(p, a);
      for (int i = 0; i < -n; ++i) p = standard_map_inverse(p, a);
      return p;
    };
    flow.forward = [apply](const Point2& p, double t0, double t1) {
      return apply(p, iteration_count(t0, t1));
    };
    flow.inverse = [apply](const Point2& p, double t0, double t1) {
      return apply(p, -iteration_count(t0, t1));
    };
    flow.trajectory = [apply](const Point2& p, std::span<const double> times) {
      std::vector<Point2> out;
      for (double t : times) out.push_back(apply(p, iteration_count(times.front(), t)));
      return out;
    };
    flow.analytic_jacobians = [a](const Point2& p, std::span<const double> times) {
      std::vector<Eigen::Matrix2d> out;
      for (double t : times) {
        const int n = iteration_count(times.front(), t);
        if (n < 0) throw ConfigError("standard map Jacobians need non-decreasing times");
        Eigen::Matrix2d j = Eigen::Matrix2d::Identity();
        Point2 q = p;
        for (int i = 0; i < n; ++i) {
          j = standard_map_jacobian(q, a) * j;
          q = standard_map(q, a);
        }
        out.push_back(j);
      }
      return out;
    };
    return flow;
  }
  if (system == "cylinder") {
    CylinderParams q;
    q.c = param(params, "c", q.c);
    q.nu = param(params, "nu", q.nu);
    q.epsilon = param(params, "epsilon", q.epsilon);
    const double margin = param(params, "margin", 1e-2);
    const Domain2D domain{0.0, kTwoPi, margin, std::numbers::pi - margin, true, false};
    return make_ode_flow(
        system, [q](double t, const Point2& p) { return cylinder_field(t, p, q); }, domain, 0.0,
        param(params, "t_end", 40.0), settings, q.epsilon == 0.0);
  }
  if (system == "bickley") {
    BickleyParams b = BickleyParams::standard();
    b.U0 = param(params, "U0", b.U0);
    b.L = param(params, "L", b.L);
    b.r0 = param(params, "r0", b.r0);
    for (int n = 0; n < 3; ++n) b.A[n] = param(params, "A" + std::to_string(n + 1), b.A[n]);
    // Derived constants follow any override of U0 or r0.
    const BickleyParams derived = [&] {
      BickleyParams d = b;
      for (int n = 0; n < 3; ++n) d.k[n] = 2.0 * (n + 1) / d.r0;
      d.c[2] = 0.461 * d.U0;
      d.c[1] = 0.205 * d.U0;
      d.c[0] = d.c[2] + 0.5 * (std::sqrt(5.0) - 1.0) * (d.k[1] / d.k[0]) * (d.c[1] - d.c[2]);
      return d;
    }();
    b.k = derived.k;
    b.c = derived.c;
    for (int n = 0; n < 3; ++n) {
      b.c[n] = param(params, "c" + std::to_string(n + 1), b.c[n]);
      b.k[n] = param(params, "k" + std::to_string(n + 1), b.k[n]);
    }
    const Domain2D domain{0.0, std::numbers::pi * b.r0, param(params, "y_min", -3.0),
                          param(params, "y_max", 3.0), true, false};
    const double days = param(params, "days", 40.0);
    return make_ode_flow(
        system, [b](double t, const Point2& p) { return bickley_field(t, p, b); }, domain, 0.0,
        days * kSecondsPerDay, settings, true);
  }
  throw ConfigError("unknown system '" + system + "'");
}

}  // namespace dynlap
