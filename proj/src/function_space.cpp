#include "nsbiot/function_space.hpp"

#include "nsbiot/quadrature.hpp"

#include <stdexcept>
#include <string>

namespace nsbiot {

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::Bdm1Vector: return "BDM1_vector";
    case SpaceKind::Bdm1TensorRows: return "BDM1_tensor_rows";
    case SpaceKind::P0Scalar: return "P0_scalar";
    case SpaceKind::P0Vector: return "P0_vector";
    case SpaceKind::P0Skew: return "P0_skew";
    case SpaceKind::P1VectorContinuous: return "P1_vector_continuous";
    case SpaceKind::P1TraceScalar: return "P1_trace_scalar";
    case SpaceKind::P1TraceVector: return "P1_trace_vector";
  }
  return "?";
}

namespace {

constexpr int kInterpolationOrder = 6;

[[noreturn]] void bad_kind(const char* what, SpaceKind kind) {
  throw std::invalid_argument(std::string(what) + ": unsupported space " + to_string(kind));
}

}  // namespace

FunctionSpace::FunctionSpace(SpaceKind kind, std::shared_ptr<const TriangleMesh> mesh,
                             std::shared_ptr<const TraceMesh> trace)
    : kind_(kind), mesh_(std::move(mesh)), trace_(std::move(trace)) {
  switch (kind_) {
    case SpaceKind::Bdm1Vector: dof_count_ = 2 * mesh_->num_edges(); break;
    case SpaceKind::Bdm1TensorRows: dof_count_ = 4 * mesh_->num_edges(); break;
    case SpaceKind::P0Scalar:
    case SpaceKind::P0Skew: dof_count_ = mesh_->num_triangles(); break;
    case SpaceKind::P0Vector: dof_count_ = 2 * mesh_->num_triangles(); break;
    case SpaceKind::P1VectorContinuous: dof_count_ = 2 * mesh_->num_vertices(); break;
    case SpaceKind::P1TraceScalar: dof_count_ = trace_->num_points(); break;
    case SpaceKind::P1TraceVector: dof_count_ = 2 * trace_->num_points(); break;
  }
}

FunctionSpace FunctionSpace::bdm1_vector(std::shared_ptr<const TriangleMesh> mesh) {
  return FunctionSpace(SpaceKind::Bdm1Vector, std::move(mesh), nullptr);
}
FunctionSpace FunctionSpace::bdm1_tensor_rows(std::shared_ptr<const TriangleMesh> mesh) {
  return FunctionSpace(SpaceKind::Bdm1TensorRows, std::move(mesh), nullptr);
}
FunctionSpace FunctionSpace::p0_scalar(std::shared_ptr<const TriangleMesh> mesh) {
  return FunctionSpace(SpaceKind::P0Scalar, std::move(mesh), nullptr);
}
FunctionSpace FunctionSpace::p0_vector(std::shared_ptr<const TriangleMesh> mesh) {
  return FunctionSpace(SpaceKind::P0Vector, std::move(mesh), nullptr);
}
FunctionSpace FunctionSpace::p0_skew(std::shared_ptr<const TriangleMesh> mesh) {
  return FunctionSpace(SpaceKind::P0Skew, std::move(mesh), nullptr);
}
FunctionSpace FunctionSpace::p1_vector(std::shared_ptr<const TriangleMesh> mesh) {
  return FunctionSpace(SpaceKind::P1VectorContinuous, std::move(mesh), nullptr);
}
FunctionSpace FunctionSpace::p1_trace_scalar(std::shared_ptr<const TraceMesh> trace) {
  return FunctionSpace(SpaceKind::P1TraceScalar, nullptr, std::move(trace));
}
FunctionSpace FunctionSpace::p1_trace_vector(std::shared_ptr<const TraceMesh> trace) {
  return FunctionSpace(SpaceKind::P1TraceVector, nullptr, std::move(trace));
}

const TriangleMesh& FunctionSpace::mesh() const {
  if (!mesh_) throw std::logic_error("trace space has no triangle mesh");
  return *mesh_;
}

const TraceMesh& FunctionSpace::trace() const {
  if (!trace_) throw std::logic_error("cell space has no trace mesh");
  return *trace_;
}

int FunctionSpace::num_cells() const {
  return trace_ ? trace_->num_segments() : mesh_->num_triangles();
}

int FunctionSpace::local_dof_count() const {
  switch (kind_) {
    case SpaceKind::Bdm1Vector: return 6;
    case SpaceKind::Bdm1TensorRows: return 12;
    case SpaceKind::P0Scalar:
    case SpaceKind::P0Skew: return 1;
    case SpaceKind::P0Vector: return 2;
    case SpaceKind::P1VectorContinuous: return 6;
    case SpaceKind::P1TraceScalar: return 2;
    case SpaceKind::P1TraceVector: return 4;
  }
  return 0;
}

CellDofs FunctionSpace::cell_dofs(int cell) const {
  CellDofs d;
  d.count = local_dof_count();
  d.sign.fill(1.0);
  switch (kind_) {
    case SpaceKind::Bdm1Vector:
    case SpaceKind::Bdm1TensorRows: {
      const auto& tri = mesh_->triangle(cell);
      const int rows = kind_ == SpaceKind::Bdm1Vector ? 1 : 2;
      const int stride = 2 * mesh_->num_edges();
      for (int i = 0; i < 3; ++i) {
        const int e = mesh_->triangle_edge(cell, i);
        const double s = mesh_->edge_sign(cell, i);
        for (int k = 0; k < 2; ++k) {
          const int g = tri[(i + 1 + k) % 3];
          const int base = 2 * e + (g == mesh_->edge(e)[0] ? 0 : 1);
          for (int r = 0; r < rows; ++r) {
            d.index[6 * r + 2 * i + k] = r * stride + base;
            d.sign[6 * r + 2 * i + k] = s;
          }
        }
      }
      break;
    }
    case SpaceKind::P0Scalar:
    case SpaceKind::P0Skew: d.index[0] = cell; break;
    case SpaceKind::P0Vector:
      d.index[0] = 2 * cell;
      d.index[1] = 2 * cell + 1;
      break;
    case SpaceKind::P1VectorContinuous: {
      const auto& tri = mesh_->triangle(cell);
      for (int a = 0; a < 3; ++a) {
        d.index[2 * a] = 2 * tri[a];
        d.index[2 * a + 1] = 2 * tri[a] + 1;
      }
      break;
    }
    case SpaceKind::P1TraceScalar:
      d.index[0] = cell;
      d.index[1] = cell + 1;
      break;
    case SpaceKind::P1TraceVector:
      for (int j = 0; j < 2; ++j) {
        d.index[2 * j] = 2 * (cell + j);
        d.index[2 * j + 1] = 2 * (cell + j) + 1;
      }
      break;
  }
  return d;
}

std::vector<int> FunctionSpace::edge_dofs(int e) const {
  if (kind_ == SpaceKind::Bdm1Vector) return {2 * e, 2 * e + 1};
  if (kind_ == SpaceKind::Bdm1TensorRows) {
    const int stride = 2 * mesh_->num_edges();
    return {2 * e, 2 * e + 1, stride + 2 * e, stride + 2 * e + 1};
  }
  bad_kind("edge_dofs", kind_);
}

// ---------------------------------------------------------------------------

namespace {

// Edge moments of a scalar normal-flux density g(x) = f(x) . n_e against the
// Lagrange functions of the two global endpoints of e.
template <class Flux>
std::array<double, 2> edge_moments(const TriangleMesh& mesh, int e, Flux flux) {
  const LineRule& rule = make_line_quadrature(kMaxLineOrder);
  const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
  const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
  const double length = (b - a).norm();
  const Vec2 n = mesh.edge_normal(e);
  std::array<double, 2> m{0.0, 0.0};
  for (int q = 0; q < rule.size(); ++q) {
    const double s = rule.points[q];
    const double g = flux(a + s * (b - a), n) * rule.weights[q] * length;
    m[0] += g * (1.0 - s);
    m[1] += g * s;
  }
  return m;
}

template <class F>
auto cell_mean(const TriangleMesh& mesh, int t, F f) {
  const QuadratureRule& rule = make_quadrature(kInterpolationOrder);
  const CellGeometry g = CellGeometry::of(mesh, t);
  decltype(f(Vec2())) sum = f(g.map(rule.reference_point(0))) * rule.weights[0];
  for (int q = 1; q < rule.size(); ++q) sum += f(g.map(rule.reference_point(q))) * rule.weights[q];
  return decltype(sum)(sum / 0.5);
}

}  // namespace

std::array<double, 2> bdm_edge_moments(const TriangleMesh& mesh, int e,
                                       const std::function<double(const Vec2& x, const Vec2& n)>& flux) {
  return edge_moments(mesh, e, flux);
}

Vector interpolate(const FunctionSpace& space, const ScalarField& f) {
  Vector c = Vector::Zero(space.dof_count());
  switch (space.kind()) {
    case SpaceKind::P0Scalar:
      for (int t = 0; t < space.num_cells(); ++t) c[t] = cell_mean(space.mesh(), t, f);
      return c;
    case SpaceKind::P1TraceScalar:
      for (int p = 0; p < space.trace().num_points(); ++p) c[p] = f(space.trace().points[p]);
      return c;
    default: bad_kind("interpolate(scalar)", space.kind());
  }
}

Vector interpolate(const FunctionSpace& space, const VectorField& f) {
  Vector c = Vector::Zero(space.dof_count());
  switch (space.kind()) {
    case SpaceKind::Bdm1Vector: {
      const auto& mesh = space.mesh();
      for (int e = 0; e < mesh.num_edges(); ++e) {
        const auto m = edge_moments(mesh, e, [&](const Vec2& x, const Vec2& n) { return f(x).dot(n); });
        c[2 * e] = m[0];
        c[2 * e + 1] = m[1];
      }
      return c;
    }
    case SpaceKind::P0Vector:
      for (int t = 0; t < space.num_cells(); ++t) {
        const Vec2 m = cell_mean(space.mesh(), t, [&](const Vec2& x) { return Vec2(f(x)); });
        c[2 * t] = m.x();
        c[2 * t + 1] = m.y();
      }
      return c;
    case SpaceKind::P1VectorContinuous:
      for (int v = 0; v < space.mesh().num_vertices(); ++v) {
        const Vec2 val = f(space.mesh().vertex(v));
        c[2 * v] = val.x();
        c[2 * v + 1] = val.y();
      }
      return c;
    case SpaceKind::P1TraceVector:
      for (int p = 0; p < space.trace().num_points(); ++p) {
        const Vec2 val = f(space.trace().points[p]);
        c[2 * p] = val.x();
        c[2 * p + 1] = val.y();
      }
      return c;
    default: bad_kind("interpolate(vector)", space.kind());
  }
}

Vector interpolate(const FunctionSpace& space, const TensorField& f) {
  Vector c = Vector::Zero(space.dof_count());
  switch (space.kind()) {
    case SpaceKind::Bdm1TensorRows: {
      const auto& mesh = space.mesh();
      const int stride = 2 * mesh.num_edges();
      for (int e = 0; e < mesh.num_edges(); ++e) {
        for (int r = 0; r < 2; ++r) {
          const auto m = edge_moments(mesh, e, [&](const Vec2& x, const Vec2& n) {
            return f(x).row(r).dot(n.transpose());
          });
          c[r * stride + 2 * e] = m[0];
          c[r * stride + 2 * e + 1] = m[1];
        }
      }
      return c;
    }
    case SpaceKind::P0Skew:
      for (int t = 0; t < space.num_cells(); ++t) {
        c[t] = cell_mean(space.mesh(), t, [&](const Vec2& x) {
          const Mat2 m = f(x);
          return 0.5 * (m(0, 1) - m(1, 0));
        });
      }
      return c;
    default: bad_kind("interpolate(tensor)", space.kind());
  }
}

// ---------------------------------------------------------------------------

double evaluate_scalar(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2&) {
  if (space.kind() == SpaceKind::P0Scalar || space.kind() == SpaceKind::P0Skew) return coeffs[t];
  bad_kind("evaluate_scalar", space.kind());
}

Vec2 evaluate_vector(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2& xi) {
  switch (space.kind()) {
    case SpaceKind::P0Vector: return Vec2(coeffs[2 * t], coeffs[2 * t + 1]);
    case SpaceKind::Bdm1Vector: {
      const auto& mesh = space.mesh();
      const BdmBasis b = physical_bdm1_basis(mesh, t, CellGeometry::of(mesh, t), xi);
      const CellDofs d = space.cell_dofs(t);
      Vec2 v = Vec2::Zero();
      for (int j = 0; j < 6; ++j) v += coeffs[d.index[j]] * b.values[j];
      return v;
    }
    case SpaceKind::P1VectorContinuous: {
      const auto lam = p1_basis(xi);
      const CellDofs d = space.cell_dofs(t);
      Vec2 v = Vec2::Zero();
      for (int a = 0; a < 3; ++a) v += lam[a] * Vec2(coeffs[d.index[2 * a]], coeffs[d.index[2 * a + 1]]);
      return v;
    }
    default: bad_kind("evaluate_vector", space.kind());
  }
}

Mat2 evaluate_tensor(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2& xi) {
  switch (space.kind()) {
    case SpaceKind::P0Skew: return skew_tensor(coeffs[t]);
    case SpaceKind::Bdm1TensorRows: {
      const auto& mesh = space.mesh();
      const BdmBasis b = physical_bdm1_basis(mesh, t, CellGeometry::of(mesh, t), xi);
      const CellDofs d = space.cell_dofs(t);
      Mat2 m = Mat2::Zero();
      for (int r = 0; r < 2; ++r) {
        for (int j = 0; j < 6; ++j) m.row(r) += coeffs[d.index[6 * r + j]] * b.values[j].transpose();
      }
      return m;
    }
    default: bad_kind("evaluate_tensor", space.kind());
  }
}

double evaluate_divergence(const FunctionSpace& space, const Vector& coeffs, int t, const Vec2& xi) {
  switch (space.kind()) {
    case SpaceKind::Bdm1Vector: {
      const auto& mesh = space.mesh();
      const BdmBasis b = physical_bdm1_basis(mesh, t, CellGeometry::of(mesh, t), xi);
      const CellDofs d = space.cell_dofs(t);
      double div = 0.0;
      for (int j = 0; j < 6; ++j) div += coeffs[d.index[j]] * b.divergence[j];
      return div;
    }
    case SpaceKind::P1VectorContinuous: return evaluate_gradient(space, coeffs, t).trace();
    default: bad_kind("evaluate_divergence", space.kind());
  }
}

Vec2 evaluate_row_divergence(const FunctionSpace& space, const Vector& coeffs, int t,
                             const Vec2& xi) {
  if (space.kind() != SpaceKind::Bdm1TensorRows) bad_kind("evaluate_row_divergence", space.kind());
  const auto& mesh = space.mesh();
  const BdmBasis b = physical_bdm1_basis(mesh, t, CellGeometry::of(mesh, t), xi);
  const CellDofs d = space.cell_dofs(t);
  Vec2 div = Vec2::Zero();
  for (int r = 0; r < 2; ++r) {
    for (int j = 0; j < 6; ++j) div[r] += coeffs[d.index[6 * r + j]] * b.divergence[j];
  }
  return div;
}

Mat2 evaluate_gradient(const FunctionSpace& space, const Vector& coeffs, int t) {
  if (space.kind() != SpaceKind::P1VectorContinuous) bad_kind("evaluate_gradient", space.kind());
  const auto grads = p1_gradients(CellGeometry::of(space.mesh(), t));
  const CellDofs d = space.cell_dofs(t);
  Mat2 g = Mat2::Zero();
  for (int a = 0; a < 3; ++a) {
    for (int c = 0; c < 2; ++c) g.row(c) += coeffs[d.index[2 * a + c]] * grads[a].transpose();
  }
  return g;
}

double evaluate_trace_scalar(const FunctionSpace& space, const Vector& coeffs, double s) {
  if (space.kind() != SpaceKind::P1TraceScalar) bad_kind("evaluate_trace_scalar", space.kind());
  const auto& tr = space.trace();
  const int k = tr.locate(s);
  const double theta = (s - tr.breakpoints[k]) / tr.segment_length(k);
  return (1.0 - theta) * coeffs[k] + theta * coeffs[k + 1];
}

Vec2 evaluate_trace_vector(const FunctionSpace& space, const Vector& coeffs, double s) {
  if (space.kind() != SpaceKind::P1TraceVector) bad_kind("evaluate_trace_vector", space.kind());
  const auto& tr = space.trace();
  const int k = tr.locate(s);
  const double theta = (s - tr.breakpoints[k]) / tr.segment_length(k);
  return (1.0 - theta) * Vec2(coeffs[2 * k], coeffs[2 * k + 1]) +
         theta * Vec2(coeffs[2 * k + 2], coeffs[2 * k + 3]);
}

}  // namespace nsbiot
