#pragma once

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <vector>

namespace nsbiot {

/// Triangle rule on the reference triangle (0,0), (1,0), (0,1).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  // barycentric coordinates
  std::vector<double> weights;                // sum to 1/2
  int order = 0;

  int size() const { return static_cast<int>(weights.size()); }
  /// Reference coordinates (xi, eta) of point q.
  Eigen::Vector2d reference_point(int q) const { return {points[q][1], points[q][2]}; }
};

/// Gauss rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;  // sum to 1
  int order = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

constexpr int kMaxTriangleOrder = 6;
constexpr int kMaxLineOrder = 7;

/// Collapsed (Duffy) tensor Gauss rule exact for total degree `order`.
/// Throws std::invalid_argument outside 0..kMaxTriangleOrder.
const QuadratureRule& make_quadrature(int order);

/// Gauss–Legendre rule on [0, 1] exact for degree `order`.
/// Throws std::invalid_argument outside 0..kMaxLineOrder.
const LineRule& make_line_quadrature(int order);

/// Gauss–Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace nsbiot
