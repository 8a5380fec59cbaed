#pragma once

#include "nsbiot/mesh.hpp"

#include <array>

namespace nsbiot {

/// Affine map x = origin + J * xi from the reference triangle (0,0), (1,0), (0,1).
struct CellGeometry {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 inverse;
  double det = 0.0;

  /// Throws MeshError for a degenerate cell.
  static CellGeometry of(const TriangleMesh& mesh, int t);
  static CellGeometry from_vertices(const Vec2& a, const Vec2& b, const Vec2& c);

  Vec2 map(const Vec2& xi) const { return origin + jacobian * xi; }
  Vec2 pullback(const Vec2& x) const { return inverse * (x - origin); }
  double area() const { return 0.5 * std::abs(det); }
};

/// BDM1 shape functions on the reference triangle.
///
/// Local dof 2*i + k belongs to edge i (opposite vertex i) and pairs the
/// outward normal flux with the linear Lagrange function of the edge endpoint
/// (i + 1 + k) % 3: dof(v) = integral over e_i of (v . n_i) * lambda ds.
struct BdmBasis {
  std::array<Vec2, 6> values;
  std::array<double, 6> divergence;
};

BdmBasis reference_bdm1_basis(const Vec2& xi);

struct PiolaValue {
  Vec2 value;
  double divergence;
};

/// Contravariant Piola transform of one reference H(div) value.
PiolaValue piola_map(const CellGeometry& geometry, const Vec2& ref_value, double ref_divergence);

/// Physical BDM1 basis of triangle t at reference point xi, with the global
/// orientation signs of the mesh already applied.
BdmBasis physical_bdm1_basis(const TriangleMesh& mesh, int t, const CellGeometry& geometry,
                             const Vec2& xi);

/// Linear Lagrange (barycentric) basis.
std::array<double, 3> p1_basis(const Vec2& xi);
/// Physical gradients of the barycentric functions (constant per cell).
std::array<Vec2, 3> p1_gradients(const CellGeometry& geometry);

}  // namespace nsbiot
