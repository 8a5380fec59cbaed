#pragma once

#include "nsbiot/elements.hpp"
#include "nsbiot/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <vector>

namespace nsbiot {

using Vector = Eigen::VectorXd;
using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;
using TensorField = std::function<Mat2(const Vec2&)>;

enum class SpaceKind {
  Bdm1Vector,
  Bdm1TensorRows,
  P0Scalar,
  P0Vector,
  P0Skew,
  P1VectorContinuous,
  P1TraceScalar,
  P1TraceVector,
};

const char* to_string(SpaceKind kind);

/// Local-to-global map of one cell (triangle, or trace segment for the trace
/// spaces). Edge-based dofs carry the orientation sign of the cell.
struct CellDofs {
  static constexpr int kMax = 12;
  int count = 0;
  std::array<int, kMax> index{};
  std::array<double, kMax> sign{};
};

/// Dof numbering:
///   Bdm1Vector       2*e + k, k = 0 for the lower global vertex of edge e
///   Bdm1TensorRows   r * (2 * num_edges) + (Bdm1Vector dof of row r)
///   P0Scalar/P0Skew  t
///   P0Vector         2*t + c
///   P1Vector         2*v + c
///   P1TraceScalar    breakpoint index
///   P1TraceVector    2*breakpoint + c
/// Local BDM dof 2*i + k of a triangle is edge i with endpoint (i + 1 + k) % 3,
/// matching reference_bdm1_basis; tensor rows put row r at local 6*r + j.
class FunctionSpace {
 public:
  static FunctionSpace bdm1_vector(std::shared_ptr<const TriangleMesh> mesh);
  static FunctionSpace bdm1_tensor_rows(std::shared_ptr<const TriangleMesh> mesh);
  static FunctionSpace p0_scalar(std::shared_ptr<const TriangleMesh> mesh);
  static FunctionSpace p0_vector(std::shared_ptr<const TriangleMesh> mesh);
  static FunctionSpace p0_skew(std::shared_ptr<const TriangleMesh> mesh);
  static FunctionSpace p1_vector(std::shared_ptr<const TriangleMesh> mesh);
  static FunctionSpace p1_trace_scalar(std::shared_ptr<const TraceMesh> trace);
  static FunctionSpace p1_trace_vector(std::shared_ptr<const TraceMesh> trace);

  SpaceKind kind() const { return kind_; }
  int dof_count() const { return dof_count_; }
  bool on_trace() const { return trace_ != nullptr; }
  const TriangleMesh& mesh() const;
  const TraceMesh& trace() const;
  int num_cells() const;
  int local_dof_count() const;
  CellDofs cell_dofs(int cell) const;

  /// Global BDM dofs of edge e in this space (2 per row).
  std::vector<int> edge_dofs(int e) const;

 private:
  FunctionSpace(SpaceKind kind, std::shared_ptr<const TriangleMesh> mesh,
                std::shared_ptr<const TraceMesh> trace);

  SpaceKind kind_;
  std::shared_ptr<const TriangleMesh> mesh_;
  std::shared_ptr<const TraceMesh> trace_;
  int dof_count_ = 0;
};

/// Canonical interpolant. BDM spaces use edge moments, P0 spaces cell means,
/// P1 spaces vertex values. P0Skew takes a tensor field and keeps the mean of
/// its skew entry (m01 - m10) / 2.
Vector interpolate(const FunctionSpace& space, const ScalarField& f);
Vector interpolate(const FunctionSpace& space, const VectorField& f);
Vector interpolate(const FunctionSpace& space, const TensorField& f);

/// BDM edge moments of edge e: the integrals of flux(x, n_e) against the linear
/// Lagrange functions of the lower and upper global endpoint.
std::array<double, 2> bdm_edge_moments(const TriangleMesh& mesh, int e,
                                       const std::function<double(const Vec2& x, const Vec2& n)>& flux);

/// Point evaluation inside triangle t at reference point xi.
double evaluate_scalar(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2& xi);
Vec2 evaluate_vector(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2& xi);
Mat2 evaluate_tensor(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2& xi);
/// div of a Bdm1Vector or P1 field.
double evaluate_divergence(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2& xi);
/// Row-wise divergence of a Bdm1TensorRows field.
Vec2 evaluate_row_divergence(const FunctionSpace& space, const Vector& coeffs, int t,
                             const Vec2& xi);
/// Gradient of a P1 vector field (row c = grad of component c).
Mat2 evaluate_gradient(const FunctionSpace& space, const Vector& coeffs, int t);

/// Trace spaces at arc-length coordinate s.
double evaluate_trace_scalar(const FunctionSpace& space, const Vector& coeffs, double s);
Vec2 evaluate_trace_vector(const FunctionSpace& space, const Vector& coeffs, double s);

/// Skew tensor of the P0Skew dof value c.
inline Mat2 skew_tensor(double c) {
  Mat2 m;
  m << 0.0, c, -c, 0.0;
  return m;
}

}  // namespace nsbiot
