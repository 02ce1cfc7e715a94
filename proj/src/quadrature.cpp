// Symmetric Gaussian rules on the triangle (Dunavant families), weights
// normalized to unit reference measure.  Values refined to full double
// precision against the monomial moment equations.

#include <array>
#include <string>

#include "dynlap/errors.hpp"
#include "dynlap/fem.hpp"

namespace dynlap {

namespace {

struct Builder {
  QuadratureRule rule;

  Builder& centroid(double w) {
    rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
    rule.weights.push_back(w);
    return *this;
  }
  // (a, b, b) and rotations, b = (1 - a) / 2.
  Builder& s21(double w, double a) {
    const double b = 0.5 * (1.0 - a);
    for (const auto& p : {Eigen::Vector3d(a, b, b), Eigen::Vector3d(b, a, b),
                          Eigen::Vector3d(b, b, a)}) {
      rule.points.push_back(p);
      rule.weights.push_back(w);
    }
    return *this;
  }
  // All six permutations of (a, b, 1 - a - b).
  Builder& s111(double w, double a, double b) {
    const double c = 1.0 - a - b;
    const std::array<Eigen::Vector3d, 6> perms = {
        Eigen::Vector3d(a, b, c), Eigen::Vector3d(a, c, b), Eigen::Vector3d(b, a, c),
        Eigen::Vector3d(b, c, a), Eigen::Vector3d(c, a, b), Eigen::Vector3d(c, b, a)};
    for (const auto& p : perms) {
      rule.points.push_back(p);
      rule.weights.push_back(w);
    }
    return *this;
  }
  QuadratureRule done(int order) {
    rule.order = order;
    return rule;
  }
};

QuadratureRule make_rule(int order) {
  switch (order) {
    case 1:
      return Builder{}.centroid(1.0).done(1);
    case 2:
      return Builder{}.s21(1.0 / 3.0, 2.0 / 3.0).done(2);
    case 3:
    case 4:
      return Builder{}
          .s21(0.22338158967801146570, 0.10810301816807022736)
          .s21(0.10995174365532186764, 0.81684757298045851308)
          .done(order);
    case 5:
      return Builder{}
          .centroid(0.225)
          .s21(0.13239415278850618074, 0.059715871789769820459)
          .s21(0.12593918054482715260, 0.79742698535308732240)
          .done(5);
    case 6:
      return Builder{}
          .s21(0.11678627572637936603, 0.50142650965817915742)
          .s21(0.050844906370206816921, 0.87382197101699554332)
          .s111(0.082851075618373575194, 0.053145049844816947353, 0.31035245103378440542)
          .done(6);
    case 7:
    case 8:
      return Builder{}
          .centroid(0.14431560767778716825)
          .s21(0.095091634267284624794, 0.081414823414553687942)
          .s21(0.10321737053471825028, 0.65886138449647958676)
          .s21(0.032458497623198080311, 0.89890554336593804908)
          .s111(0.027230314174434994265, 0.0083947774099576053372, 0.26311282963463811342)
          .done(order);
    default:
      throw ConfigError("quadrature order " + std::to_string(order) + " outside 1..8");
  }
}

}  // namespace

const QuadratureRule& quadrature_rule(int order) {
  if (order < 1 || order > 8)
    throw ConfigError("quadrature order " + std::to_string(order) + " outside 1..8");
  static const std::array<QuadratureRule, 8> rules = [] {
    std::array<QuadratureRule, 8> r;
    for (int k = 1; k <= 8; ++k) r[k - 1] = make_rule(k);
    return r;
  }();
  return rules[order - 1];
}

int default_quadrature_order(int degree) { return 2 * degree - 1; }

}  // namespace dynlap
