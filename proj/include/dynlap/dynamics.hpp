#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynlap/mesh.hpp"

namespace dynlap {

/// Time-dependent planar vector field v(t, x).
using VectorField = std::function<Point2(double, const Point2&)>;

struct IntegratorSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-8;
  int max_steps = 200000;

  void validate() const;
};

/// Finite-difference step, relative to the domain diameter.
struct FDSettings {
  double step = 1e-5;
};

/// Dormand-Prince 5(4) with embedded error control; integrates backwards when t1 < t0.
Point2 integrate(const VectorField& field, const Point2& x0, double t0, double t1,
                 const IntegratorSettings& settings = {});

/// Positions at each of `times` (monotone, starting anywhere), integrating segment by segment.
std::vector<Point2> integrate_trajectory(const VectorField& field, const Point2& x0,
                                         std::span<const double> times,
                                         const IntegratorSettings& settings = {});

/// Number of integrate() calls since process start; instrumentation for cache tests.
std::uint64_t integrator_call_count();

/// Forward/inverse point maps plus Jacobians of a finite-time dynamical system.
struct FlowMap {
  std::string name;
  Domain2D domain;
  /// Default time window; the transfer-operator schemes use T = T_{t_begin -> t_end}.
  double t_begin = 0.0;
  double t_end = 1.0;
  bool volume_preserving = true;
  std::function<Point2(const Point2&, double, double)> forward;
  /// inverse(p, t0, t1) undoes forward(., t0, t1).
  std::function<Point2(const Point2&, double, double)> inverse;
  /// Positions at each requested time, starting from p at times.front().
  std::function<std::vector<Point2>(const Point2&, std::span<const double>)> trajectory;
  /// Analytic Jacobians of forward(p, times.front(), t) for every t, when known.
  std::function<std::vector<Eigen::Matrix2d>(const Point2&, std::span<const double>)>
      analytic_jacobians;

  Point2 operator()(const Point2& p) const { return forward(p, t_begin, t_end); }
  Point2 inverse_map(const Point2& p) const { return inverse(p, t_begin, t_end); }
  /// Jacobian of forward(., t0, t1) at p: analytic when available, else finite differences.
  Eigen::Matrix2d jacobian(const Point2& p, double t0, double t1) const;
};

struct FDJacobian {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
  bool one_sided = false;
};

/// Second-order finite differences of the flow map from t0 to t1.  Near a
/// non-periodic boundary the stencil switches to one-sided differences.
FDJacobian jacobian_fd(const FlowMap& flow, const Point2& p, double t0, double t1,
                       const FDSettings& fd = {});

/// Jacobians at every time of `times`, sharing the stencil trajectories.
std::vector<Eigen::Matrix2d> jacobians_fd(const FlowMap& flow, const Point2& p,
                                          std::span<const double> times,
                                          const FDSettings& fd = {});

/// Analytic Jacobians when available, finite differences otherwise.
std::vector<Eigen::Matrix2d> flow_jacobians(const FlowMap& flow, const Point2& p,
                                            std::span<const double> times,
                                            const FDSettings& fd = {});

// ---------------------------------------------------------------------------
// Test systems

inline constexpr double kStandardMapA = 0.971635;

Point2 standard_map(const Point2& p, double a = kStandardMapA);
Point2 standard_map_inverse(const Point2& p, double a = kStandardMapA);
Eigen::Matrix2d standard_map_jacobian(const Point2& p, double a = kStandardMapA);

struct CylinderParams {
  double c = 0.5;
  double nu = 0.5;
  double epsilon = 0.25;
};
Point2 cylinder_field(double t, const Point2& p, const CylinderParams& params = {});

struct BickleyParams {
  double U0 = 62.66e-6;  // Mm/s
  double L = 1.77;       // Mm
  double r0 = 6.371;     // Mm
  std::array<double, 3> A = {0.0075, 0.15, 0.3};
  std::array<double, 3> c = {0.0, 0.0, 0.0};
  std::array<double, 3> k = {0.0, 0.0, 0.0};

  /// Literature preset: k_n = 2n/r0, c3 = 0.461 U0, c2 = 0.205 U0,
  /// c1 = c3 + (sqrt(5)-1)/2 * (k2/k1) * (c2 - c3).
  static BickleyParams standard();
};
double bickley_stream_function(double t, const Point2& p, const BickleyParams& params);
Point2 bickley_field(double t, const Point2& p, const BickleyParams& params);

/// Rigid rotation of the circle R/Z.
double shift_map_1d(double x, double alpha);

inline constexpr double kSecondsPerDay = 86400.0;

/// Parameter overrides by name, e.g. {"a", 0.9} or {"epsilon", 0.0}.
using SystemParams = std::map<std::string, double>;

/// Flow presets: "identity", "standard_map", "cylinder", "bickley".
FlowMap make_flow(const std::string& system, const SystemParams& params = {},
                  const IntegratorSettings& settings = {});

/// Flow of an arbitrary ODE: forward by integration, inverse by backward integration.
FlowMap make_ode_flow(std::string name, VectorField field, Domain2D domain, double t_begin,
                      double t_end, const IntegratorSettings& settings, bool volume_preserving);

}  // namespace dynlap
