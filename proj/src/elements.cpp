#include "nsbiot/elements.hpp"

#include "nsbiot/quadrature.hpp"

#include <Eigen/LU>

#include <cmath>

namespace nsbiot {

CellGeometry CellGeometry::from_vertices(const Vec2& a, const Vec2& b, const Vec2& c) {
  CellGeometry g;
  g.origin = a;
  g.jacobian.col(0) = b - a;
  g.jacobian.col(1) = c - a;
  g.det = g.jacobian.determinant();
  const double scale = std::max((b - a).squaredNorm(), (c - a).squaredNorm());
  if (!(std::abs(g.det) > 1e-14 * scale)) throw MeshError("degenerate cell");
  g.inverse = g.jacobian.inverse();
  return g;
}

CellGeometry CellGeometry::of(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangle(t);
  return from_vertices(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
}

namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;

// P1 vector monomials: (1,0), (x,0), (y,0), (0,1), (0,x), (0,y).
Vec2 monomial(int j, const Vec2& x) {
  const double m[3] = {1.0, x.x(), x.y()};
  return j < 3 ? Vec2(m[j], 0.0) : Vec2(0.0, m[j - 3]);
}

double monomial_divergence(int j) { return (j == 1 || j == 5) ? 1.0 : 0.0; }

const std::array<Vec2, 3> kRefVertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};

// coefficients(k, j): weight of monomial k in basis function j.
const Mat6& reference_coefficients() {
  static const Mat6 coefficients = [] {
    const LineRule& rule = make_line_quadrature(3);
    Mat6 dofs = Mat6::Zero();
    for (int i = 0; i < 3; ++i) {
      const Vec2& a = kRefVertices[(i + 1) % 3];
      const Vec2& b = kRefVertices[(i + 2) % 3];
      const Vec2 tangent = b - a;
      const double length = tangent.norm();
      const Vec2 normal = Vec2(tangent.y(), -tangent.x()) / length;
      for (int q = 0; q < rule.size(); ++q) {
        const double s = rule.points[q];
        const Vec2 x = a + s * tangent;
        const double lam[2] = {1.0 - s, s};
        for (int k = 0; k < 2; ++k) {
          for (int j = 0; j < 6; ++j) {
            dofs(2 * i + k, j) += rule.weights[q] * length * monomial(j, x).dot(normal) * lam[k];
          }
        }
      }
    }
    return Mat6(dofs.inverse());
  }();
  return coefficients;
}

}  // namespace

BdmBasis reference_bdm1_basis(const Vec2& xi) {
  const Mat6& c = reference_coefficients();
  BdmBasis basis;
  for (int j = 0; j < 6; ++j) {
    Vec2 v = Vec2::Zero();
    double div = 0.0;
    for (int k = 0; k < 6; ++k) {
      v += c(k, j) * monomial(k, xi);
      div += c(k, j) * monomial_divergence(k);
    }
    basis.values[j] = v;
    basis.divergence[j] = div;
  }
  return basis;
}

PiolaValue piola_map(const CellGeometry& geometry, const Vec2& ref_value, double ref_divergence) {
  return {geometry.jacobian * ref_value / geometry.det, ref_divergence / geometry.det};
}

BdmBasis physical_bdm1_basis(const TriangleMesh& mesh, int t, const CellGeometry& geometry,
                             const Vec2& xi) {
  BdmBasis basis = reference_bdm1_basis(xi);
  for (int j = 0; j < 6; ++j) {
    const auto mapped = piola_map(geometry, basis.values[j], basis.divergence[j]);
    const double sign = mesh.edge_sign(t, j / 2);
    basis.values[j] = sign * mapped.value;
    basis.divergence[j] = sign * mapped.divergence;
  }
  return basis;
}

std::array<double, 3> p1_basis(const Vec2& xi) {
  return {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
}

std::array<Vec2, 3> p1_gradients(const CellGeometry& geometry) {
  const Mat2 inv_t = geometry.inverse.transpose();
  return {inv_t * Vec2(-1.0, -1.0), inv_t * Vec2(1.0, 0.0), inv_t * Vec2(0.0, 1.0)};
}

}  // namespace nsbiot
