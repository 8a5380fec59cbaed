#include "nsbiot/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nsbiot {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = n == 0 ? 1.0 : (n == 1 ? x : p1);
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

LineRule build_line_rule(int order) {
  const int n = order / 2 + 1;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  LineRule rule;
  rule.order = 2 * n - 1;
  for (int i = n - 1; i >= 0; --i) {
    rule.points.push_back(0.5 * (x[i] + 1.0));
    rule.weights.push_back(0.5 * w[i]);
  }
  return rule;
}

QuadratureRule build_triangle_rule(int order) {
  // Degree-d polynomials pull back to degree <= d+1 in the collapsed
  // direction because of the (1 - u) Jacobian factor.
  const int n = (order + 2) / 2 + ((order + 2) % 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.order = order;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (x[j] + 1.0);
      const double xi = u;
      const double eta = v * (1.0 - u);
      rule.points.push_back({1.0 - xi - eta, xi, eta});
      rule.weights.push_back(0.25 * w[i] * w[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& make_quadrature(int order) {
  static const std::vector<QuadratureRule> rules = [] {
    std::vector<QuadratureRule> out;
    for (int p = 0; p <= kMaxTriangleOrder; ++p) out.push_back(build_triangle_rule(p));
    return out;
  }();
  if (order < 0 || order > kMaxTriangleOrder) {
    throw std::invalid_argument("unsupported triangle quadrature order " + std::to_string(order));
  }
  return rules[order];
}

const LineRule& make_line_quadrature(int order) {
  static const std::vector<LineRule> rules = [] {
    std::vector<LineRule> out;
    for (int p = 0; p <= kMaxLineOrder; ++p) out.push_back(build_line_rule(p));
    return out;
  }();
  if (order < 0 || order > kMaxLineOrder) {
    throw std::invalid_argument("unsupported line quadrature order " + std::to_string(order));
  }
  return rules[order];
}

}  // namespace nsbiot
