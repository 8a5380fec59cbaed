#include "nsbiot/forms.hpp"

#include "nsbiot/quadrature.hpp"

#include <cmath>
#include <string>

namespace nsbiot {

// ---------------------------------------------------------------------------
// Interface geometry

namespace {

constexpr double kGeomTol = 1e-9;

struct SideInfo {
  int triangle;
  Vec2 outward;
};

SideInfo side_of_edge(const TriangleMesh& mesh, int e) {
  const int t = mesh.edge_triangles(e)[0];
  const int li = mesh.local_edge_index(t, e);
  return {t, mesh.edge_normal(e) * mesh.edge_sign(t, li)};
}

bool point_on_edge(const TriangleMesh& mesh, int e, const Vec2& x) {
  const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
  const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
  const Vec2 ab = b - a;
  const double L = ab.norm();
  const double s = (x - a).dot(ab) / (L * L);
  const double dist = std::abs(ab.x() * (x - a).y() - ab.y() * (x - a).x()) / L;
  const double tol = kGeomTol * std::max(1.0, L);
  return dist <= tol && s >= -tol / L && s <= 1.0 + tol / L;
}

InterfaceSegment make_segment(const TriangleMesh& fluid, const TriangleMesh& poro,
                              const TraceMesh& tf, const TraceMesh& tp, int phi_cell,
                              int lambda_cell, double s0, double s1, const Vec2& x0,
                              const Vec2& x1, int index) {
  InterfaceSegment seg;
  seg.s0 = s0;
  seg.s1 = s1;
  seg.x0 = x0;
  seg.x1 = x1;
  seg.phi_cell = phi_cell;
  seg.lambda_cell = lambda_cell;
  const int ef = tf.parent_edges.at(phi_cell);
  const int ep = tp.parent_edges.at(lambda_cell);
  for (const Vec2* x : {&x0, &x1}) {
    if (!point_on_edge(fluid, ef, *x) || !point_on_edge(poro, ep, *x)) {
      throw MeshError("interface segment " + std::to_string(index) +
                      " is not contained in a parent edge on both sides");
    }
  }
  const SideInfo f = side_of_edge(fluid, ef);
  const SideInfo p = side_of_edge(poro, ep);
  if ((f.outward + p.outward).norm() > 1e-8) {
    throw MeshError("interface segment " + std::to_string(index) + ": normals are not opposite");
  }
  seg.fluid_triangle = f.triangle;
  seg.poro_triangle = p.triangle;
  seg.n_f = f.outward;
  seg.t_f = Vec2(-f.outward.y(), f.outward.x());
  return seg;
}

}  // namespace

std::vector<InterfaceSegment> merged_interface_segments(const TriangleMesh& fluid,
                                                        const TriangleMesh& poro,
                                                        const TraceMesh& fluid_trace,
                                                        const TraceMesh& poro_trace,
                                                        const TraceMesh& merged) {
  std::vector<InterfaceSegment> out;
  out.reserve(merged.num_segments());
  for (int k = 0; k < merged.num_segments(); ++k) {
    out.push_back(make_segment(fluid, poro, fluid_trace, poro_trace, merged.source_segments[0].at(k),
                               merged.source_segments[1].at(k), merged.breakpoints[k],
                               merged.breakpoints[k + 1], merged.points[k], merged.points[k + 1], k));
  }
  return out;
}

std::vector<InterfaceSegment> matching_interface_segments(const TriangleMesh& fluid,
                                                          const TriangleMesh& poro,
                                                          const TraceMesh& fluid_trace,
                                                          const TraceMesh& poro_trace) {
  if (fluid_trace.num_points() != poro_trace.num_points()) throw MeshError("traces do not match");
  std::vector<InterfaceSegment> out;
  for (int k = 0; k < fluid_trace.num_segments(); ++k) {
    if ((fluid_trace.points[k] - poro_trace.points[k]).norm() > kGeomTol ||
        (fluid_trace.points[k + 1] - poro_trace.points[k + 1]).norm() > kGeomTol) {
      throw MeshError("traces do not match at segment " + std::to_string(k));
    }
    out.push_back(make_segment(fluid, poro, fluid_trace, poro_trace, k, k, fluid_trace.breakpoints[k],
                               fluid_trace.breakpoints[k + 1], fluid_trace.points[k],
                               fluid_trace.points[k + 1], k));
  }
  return out;
}

Discretization Discretization::build(TriangleMesh fluid, TriangleMesh poro) {
  if (fluid.subdomain() != Subdomain::Fluid || poro.subdomain() != Subdomain::Poroelastic) {
    throw MeshError("Discretization::build expects a fluid and a poroelastic mesh");
  }
  fluid.validate(true);
  poro.validate(true);
  auto fm = std::make_shared<const TriangleMesh>(std::move(fluid));
  auto pm = std::make_shared<const TriangleMesh>(std::move(poro));
  auto ft = std::make_shared<const TraceMesh>(extract_trace_mesh(*fm));
  auto pt = std::make_shared<const TraceMesh>(extract_trace_mesh(*pm));
  auto mt = std::make_shared<const TraceMesh>(merge_trace_partitions(*ft, *pt));
  auto segments = merged_interface_segments(*fm, *pm, *ft, *pt, *mt);
  return Discretization{fm,
                        pm,
                        ft,
                        pt,
                        mt,
                        FunctionSpace::bdm1_tensor_rows(fm),
                        FunctionSpace::bdm1_vector(pm),
                        FunctionSpace::p1_vector(pm),
                        FunctionSpace::p0_vector(fm),
                        FunctionSpace::p0_scalar(pm),
                        FunctionSpace::p0_skew(fm),
                        FunctionSpace::p1_trace_vector(ft),
                        FunctionSpace::p1_trace_scalar(pt),
                        std::move(segments)};
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

struct Tagged {
  int op;
  int row;
  int col;
  double value;
};

SparseMatrix from_tagged(const std::vector<Tagged>& entries, int op, int rows, int cols) {
  std::vector<Triplet> t;
  for (const auto& e : entries) {
    if (e.op == op) t.emplace_back(e.row, e.col, e.value);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Mat2 deviatoric(const Mat2& m) { return m - 0.5 * m.trace() * Mat2::Identity(); }

// Physical BDM basis at every quadrature point of one triangle.
struct CellBasis {
  CellGeometry geometry;
  std::vector<BdmBasis> basis;
  std::vector<double> weight;  // physical weights
  std::vector<Vec2> points;    // physical points
};

CellBasis cell_basis(const TriangleMesh& mesh, int t, const QuadratureRule& rule) {
  CellBasis cb;
  cb.geometry = CellGeometry::of(mesh, t);
  const double jac = std::abs(cb.geometry.det);
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2 xi = rule.reference_point(q);
    cb.basis.push_back(physical_bdm1_basis(mesh, t, cb.geometry, xi));
    cb.weight.push_back(rule.weights[q] * jac);
    cb.points.push_back(cb.geometry.map(xi));
  }
  return cb;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subdomain forms

namespace {

enum FluidOp { kAf, kBf, kBsk, kMuf };
enum PoroOp { kAdp, kBp, kAep, kBep, kMpp, kMeta };

}  // namespace

SubdomainOperators assemble_subdomain_forms(const ModelParams& params, const Discretization& disc,
                                            Exec exec, const QuadratureOrders& orders) {
  const QuadratureRule& rule = make_quadrature(orders.cell);
  const TriangleMesh& fmesh = *disc.fluid_mesh;
  const TriangleMesh& pmesh = *disc.poro_mesh;
  const double inv2mu = 1.0 / (2.0 * params.mu);

  const auto fluid = gather_cells<Tagged>(fmesh.num_triangles(), exec, [&](int t, std::vector<Tagged>& out) {
    const CellBasis cb = cell_basis(fmesh, t, rule);
    const CellDofs sd = disc.sigma_f.cell_dofs(t);
    const CellDofs ud = disc.u_f.cell_dofs(t);
    double af[12][12] = {};
    double bf[2][12] = {};
    double bsk[12] = {};
    for (std::size_t q = 0; q < cb.weight.size(); ++q) {
      const auto& b = cb.basis[q];
      const double w = cb.weight[q];
      for (int r = 0; r < 2; ++r) {
        for (int i = 0; i < 6; ++i) {
          const int a = 6 * r + i;
          for (int s = 0; s < 2; ++s) {
            for (int j = 0; j < 6; ++j) {
              const double full = r == s ? b.values[i].dot(b.values[j]) : 0.0;
              af[a][6 * s + j] += w * inv2mu * (full - 0.5 * b.values[i][r] * b.values[j][s]);
            }
          }
          bf[r][a] += w * b.divergence[i];
          bsk[a] += w * (r == 0 ? b.values[i][1] : -b.values[i][0]);
        }
      }
    }
    for (int a = 0; a < 12; ++a) {
      for (int b = 0; b < 12; ++b) out.push_back({kAf, sd.index[a], sd.index[b], af[a][b]});
    }
    for (int c = 0; c < 2; ++c) {
      for (int a = 0; a < 12; ++a) {
        if (bf[c][a] != 0.0) out.push_back({kBf, ud.index[c], sd.index[a], bf[c][a]});
      }
    }
    for (int a = 0; a < 12; ++a) out.push_back({kBsk, t, sd.index[a], bsk[a]});
    const double area = cb.geometry.area();
    for (int c = 0; c < 2; ++c) out.push_back({kMuf, ud.index[c], ud.index[c], params.rho_f * area});
  });

  const Mat2 Kinv = params.K_inverse();
  const auto poro = gather_cells<Tagged>(pmesh.num_triangles(), exec, [&](int t, std::vector<Tagged>& out) {
    const CellBasis cb = cell_basis(pmesh, t, rule);
    const CellDofs vd = disc.u_p.cell_dofs(t);
    const CellDofs ed = disc.eta_p.cell_dofs(t);
    double adp[6][6] = {};
    double bp[6] = {};
    for (std::size_t q = 0; q < cb.weight.size(); ++q) {
      const auto& b = cb.basis[q];
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) adp[i][j] += cb.weight[q] * params.mu * (Kinv * b.values[j]).dot(b.values[i]);
        bp[i] -= cb.weight[q] * b.divergence[i];
      }
    }
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) out.push_back({kAdp, vd.index[i], vd.index[j], adp[i][j]});
      out.push_back({kBp, t, vd.index[i], bp[i]});
    }

    const double area = cb.geometry.area();
    const auto g = p1_gradients(cb.geometry);
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 2; ++c) {
        const int row = ed.index[2 * a + c];
        for (int bb = 0; bb < 3; ++bb) {
          for (int d = 0; d < 2; ++d) {
            const int col = ed.index[2 * bb + d];
            const double strain = 0.5 * ((c == d ? g[a].dot(g[bb]) : 0.0) + g[a][d] * g[bb][c]);
            const double value = area * (2.0 * params.mu_p * strain + params.lambda_p * g[a][c] * g[bb][d]);
            out.push_back({kAep, row, col, value});
            if (c == d) {
              out.push_back({kMeta, row, col, params.rho_p * area * (a == bb ? 2.0 : 1.0) / 12.0});
            }
          }
        }
        out.push_back({kBep, t, row, -area * g[a][c]});
      }
    }
    out.push_back({kMpp, t, t, params.s0 * area});
  });

  const int ns = disc.sigma_f.dof_count(), nu = disc.u_f.dof_count(), ng = disc.gamma_f.dof_count();
  const int nv = disc.u_p.dof_count(), np = disc.p_p.dof_count(), ne = disc.eta_p.dof_count();
  SubdomainOperators ops;
  ops.A_f = from_tagged(fluid, kAf, ns, ns);
  ops.B_f = from_tagged(fluid, kBf, nu, ns);
  ops.B_sk = from_tagged(fluid, kBsk, ng, ns);
  ops.M_uf = from_tagged(fluid, kMuf, nu, nu);
  ops.A_dp = from_tagged(poro, kAdp, nv, nv);
  ops.B_p = from_tagged(poro, kBp, np, nv);
  ops.A_ep = from_tagged(poro, kAep, ne, ne);
  ops.B_ep = from_tagged(poro, kBep, np, ne);
  ops.M_pp = from_tagged(poro, kMpp, np, np);
  ops.M_eta = from_tagged(poro, kMeta, ne, ne);
  return ops;
}

// ---------------------------------------------------------------------------
// Interface forms

namespace {

enum InterfaceOp { kBnf, kBnp, kCee, kCep, kCpe, kCpp, kGe, kGp };

// Values of every local basis that lives on one interface quadrature point.
struct InterfacePoint {
  double weight;
  BdmBasis fluid;           // un-rowed BDM basis of the fluid triangle
  BdmBasis darcy;           // BDM basis of the poroelastic triangle
  std::array<double, 3> p1; // barycentric functions of the poroelastic triangle
  double phi_hat[2];
  double lambda_hat[2];
};

template <class Fn>
void for_each_interface_point(const Discretization& disc, const InterfaceSegment& seg, int order,
                              Fn&& fn) {
  const LineRule& rule = make_line_quadrature(order);
  const TriangleMesh& fmesh = *disc.fluid_mesh;
  const TriangleMesh& pmesh = *disc.poro_mesh;
  const CellGeometry fg = CellGeometry::of(fmesh, seg.fluid_triangle);
  const CellGeometry pg = CellGeometry::of(pmesh, seg.poro_triangle);
  const TraceMesh& tf = *disc.fluid_trace;
  const TraceMesh& tp = *disc.poro_trace;
  const double L = seg.length();
  for (int q = 0; q < rule.size(); ++q) {
    const double theta = rule.points[q];
    const Vec2 x = seg.x0 + theta * (seg.x1 - seg.x0);
    const double s = seg.s0 + theta * (seg.s1 - seg.s0);
    InterfacePoint ip;
    ip.weight = rule.weights[q] * L;
    ip.fluid = physical_bdm1_basis(fmesh, seg.fluid_triangle, fg, fg.pullback(x));
    const Vec2 pxi = pg.pullback(x);
    ip.darcy = physical_bdm1_basis(pmesh, seg.poro_triangle, pg, pxi);
    ip.p1 = p1_basis(pxi);
    const double tf_theta = (s - tf.breakpoints[seg.phi_cell]) / tf.segment_length(seg.phi_cell);
    const double tp_theta = (s - tp.breakpoints[seg.lambda_cell]) / tp.segment_length(seg.lambda_cell);
    ip.phi_hat[0] = 1.0 - tf_theta;
    ip.phi_hat[1] = tf_theta;
    ip.lambda_hat[0] = 1.0 - tp_theta;
    ip.lambda_hat[1] = tp_theta;
    fn(ip);
  }
}

SparseMatrix sized_from(const std::vector<Tagged>& e, int op, int rows, int cols) {
  return from_tagged(e, op, rows, cols);
}

}  // namespace

InterfaceOperators assemble_interface_forms(const ModelParams& params, const Discretization& disc,
                                            const std::vector<InterfaceSegment>& segments,
                                            const QuadratureOrders& orders) {
  std::vector<Tagged> out;
  for (const auto& seg : segments) {
    const CellDofs sd = disc.sigma_f.cell_dofs(seg.fluid_triangle);
    const CellDofs vd = disc.u_p.cell_dofs(seg.poro_triangle);
    const CellDofs ed = disc.eta_p.cell_dofs(seg.poro_triangle);
    const CellDofs fd = disc.phi.cell_dofs(seg.phi_cell);
    const CellDofs ld = disc.lambda.cell_dofs(seg.lambda_cell);
    const Vec2 nf = seg.n_f;
    const Vec2 np = -seg.n_f;
    const Vec2 tt = seg.t_f;
    const double kbjs = params.mu * params.alpha_bjs / std::sqrt(params.tangential_permeability(tt));

    double bnf[4][12] = {}, bnp[2][6] = {}, cee[6][6] = {}, cep[6][4] = {}, cpp[4][4] = {};
    double ge[2][6] = {}, gp[2][4] = {};
    for_each_interface_point(disc, seg, orders.interface, [&](const InterfacePoint& ip) {
      const double w = ip.weight;
      // eta basis (a, c) and phi basis (a, c): tangential and normal parts
      double eta_t[6], eta_n[6], phi_t[4], phi_n[4];
      for (int a = 0; a < 3; ++a) {
        for (int c = 0; c < 2; ++c) {
          eta_t[2 * a + c] = ip.p1[a] * tt[c];
          eta_n[2 * a + c] = ip.p1[a] * np[c];
        }
      }
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          phi_t[2 * a + c] = ip.phi_hat[a] * tt[c];
          phi_n[2 * a + c] = ip.phi_hat[a] * nf[c];
        }
      }
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          for (int r = 0; r < 2; ++r) {
            if (r != c) continue;
            for (int j = 0; j < 6; ++j) {
              bnf[2 * a + c][6 * r + j] -= w * ip.fluid.values[j].dot(nf) * ip.phi_hat[a];
            }
          }
        }
      }
      for (int b = 0; b < 2; ++b) {
        for (int j = 0; j < 6; ++j) bnp[b][j] += w * ip.darcy.values[j].dot(np) * ip.lambda_hat[b];
        for (int i = 0; i < 6; ++i) ge[b][i] -= w * eta_n[i] * ip.lambda_hat[b];
        for (int i = 0; i < 4; ++i) gp[b][i] -= w * phi_n[i] * ip.lambda_hat[b];
      }
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) cee[i][j] += w * kbjs * eta_t[i] * eta_t[j];
        for (int j = 0; j < 4; ++j) cep[i][j] -= w * kbjs * eta_t[i] * phi_t[j];
      }
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) cpp[i][j] += w * kbjs * phi_t[i] * phi_t[j];
      }
    });
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 12; ++j) out.push_back({kBnf, fd.index[i], sd.index[j], bnf[i][j]});
    }
    for (int b = 0; b < 2; ++b) {
      for (int j = 0; j < 6; ++j) out.push_back({kBnp, ld.index[b], vd.index[j], bnp[b][j]});
      for (int i = 0; i < 6; ++i) out.push_back({kGe, ld.index[b], ed.index[i], ge[b][i]});
      for (int i = 0; i < 4; ++i) out.push_back({kGp, ld.index[b], fd.index[i], gp[b][i]});
    }
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) out.push_back({kCee, ed.index[i], ed.index[j], cee[i][j]});
      for (int j = 0; j < 4; ++j) {
        out.push_back({kCep, ed.index[i], fd.index[j], cep[i][j]});
        out.push_back({kCpe, fd.index[j], ed.index[i], cep[i][j]});
      }
    }
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) out.push_back({kCpp, fd.index[i], fd.index[j], cpp[i][j]});
    }
  }

  const int ns = disc.sigma_f.dof_count(), nv = disc.u_p.dof_count(), ne = disc.eta_p.dof_count();
  const int nphi = disc.phi.dof_count(), nl = disc.lambda.dof_count();
  InterfaceOperators ops;
  ops.B_nf = sized_from(out, kBnf, nphi, ns);
  ops.B_np = sized_from(out, kBnp, nl, nv);
  ops.C_eta_eta = sized_from(out, kCee, ne, ne);
  ops.C_eta_phi = sized_from(out, kCep, ne, nphi);
  ops.C_phi_eta = sized_from(out, kCpe, nphi, ne);
  ops.C_phi_phi = sized_from(out, kCpp, nphi, nphi);
  ops.G_eta = sized_from(out, kGe, nl, ne);
  ops.G_phi = sized_from(out, kGp, nl, nphi);
  return ops;
}

SparseMatrix InterfaceOperators::c_bjs() const {
  const int ne = static_cast<int>(C_eta_eta.rows());
  const int nphi = static_cast<int>(C_phi_phi.rows());
  std::vector<Triplet> t;
  auto add = [&](const SparseMatrix& m, int r0, int c0) {
    for (int k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
    }
  };
  add(C_eta_eta, 0, 0);
  add(C_eta_phi, 0, ne);
  add(C_phi_eta, ne, 0);
  add(C_phi_phi, ne, ne);
  SparseMatrix m(ne + nphi, ne + nphi);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

// ---------------------------------------------------------------------------
// Nonlinear terms

NonlinearTerm assemble_convective(const ModelParams& params, const Discretization& disc,
                                  const Vector& w_f, Exec exec, const QuadratureOrders& orders) {
  const QuadratureRule& rule = make_quadrature(orders.convective);
  const TriangleMesh& mesh = *disc.fluid_mesh;
  const double scale = params.rho_f / (2.0 * params.mu);
  NonlinearTerm term;
  term.residual = Vector::Zero(disc.sigma_f.dof_count());

  struct Entry {
    int row;
    int col;  // -1 marks a residual entry
    double value;
  };
  const auto entries = gather_cells<Entry>(mesh.num_triangles(), exec, [&](int t, std::vector<Entry>& out) {
    const CellBasis cb = cell_basis(mesh, t, rule);
    const CellDofs sd = disc.sigma_f.cell_dofs(t);
    const CellDofs ud = disc.u_f.cell_dofs(t);
    const Vec2 u(w_f[ud.index[0]], w_f[ud.index[1]]);
    // u_f is constant on the cell, so only the basis means are needed.
    std::array<Vec2, 6> mean;
    mean.fill(Vec2::Zero());
    for (std::size_t q = 0; q < cb.weight.size(); ++q) {
      for (int j = 0; j < 6; ++j) mean[j] += cb.weight[q] * cb.basis[q].values[j];
    }
    const Mat2 md = deviatoric(u * u.transpose());
    std::array<Mat2, 2> dmd;
    for (int c = 0; c < 2; ++c) {
      const Vec2 e = Vec2::Unit(c);
      dmd[c] = deviatoric(e * u.transpose() + u * e.transpose());
    }
    for (int s = 0; s < 2; ++s) {
      for (int j = 0; j < 6; ++j) {
        const int row = sd.index[6 * s + j];
        out.push_back({row, -1, scale * md.row(s).dot(mean[j].transpose())});
        for (int c = 0; c < 2; ++c) {
          out.push_back({row, ud.index[c], scale * dmd[c].row(s).dot(mean[j].transpose())});
        }
      }
    }
  });
  std::vector<Triplet> trip;
  trip.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.col < 0) {
      term.residual[e.row] += e.value;
    } else {
      trip.emplace_back(e.row, e.col, e.value);
    }
  }
  term.jacobian.resize(disc.sigma_f.dof_count(), disc.u_f.dof_count());
  term.jacobian.setFromTriplets(trip.begin(), trip.end());
  return term;
}

NonlinearTerm assemble_interface_inertia(const ModelParams& params, const Discretization& disc,
                                         const std::vector<InterfaceSegment>& segments,
                                         const Vector& zeta, const QuadratureOrders& orders) {
  const int n = disc.phi.dof_count();
  NonlinearTerm term;
  term.residual = Vector::Zero(n);
  std::vector<Triplet> trip;
  for (const auto& seg : segments) {
    const CellDofs fd = disc.phi.cell_dofs(seg.phi_cell);
    const Vec2 nf = seg.n_f;
    double res[4] = {};
    double jac[4][4] = {};
    for_each_interface_point(disc, seg, orders.interface, [&](const InterfacePoint& ip) {
      Vec2 z = Vec2::Zero();
      for (int a = 0; a < 2; ++a) z += ip.phi_hat[a] * Vec2(zeta[fd.index[2 * a]], zeta[fd.index[2 * a + 1]]);
      const double zn = z.dot(nf);
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          const double psi = ip.phi_hat[a];
          res[2 * a + c] += ip.weight * params.rho_f * zn * z[c] * psi;
          for (int b = 0; b < 2; ++b) {
            for (int d = 0; d < 2; ++d) {
              const double dphi = ip.phi_hat[b];
              const double value = dphi * nf[d] * z[c] + (c == d ? zn * dphi : 0.0);
              jac[2 * a + c][2 * b + d] += ip.weight * params.rho_f * value * psi;
            }
          }
        }
      }
    });
    for (int i = 0; i < 4; ++i) {
      term.residual[fd.index[i]] += res[i];
      for (int j = 0; j < 4; ++j) trip.emplace_back(fd.index[i], fd.index[j], jac[i][j]);
    }
  }
  term.jacobian.resize(n, n);
  term.jacobian.setFromTriplets(trip.begin(), trip.end());
  return term;
}

// ---------------------------------------------------------------------------
// Loads

namespace {

template <class Fn>
void for_each_boundary_point(const TriangleMesh& mesh, int e, int order, Fn&& fn) {
  const LineRule& rule = make_line_quadrature(order);
  const int t = mesh.edge_triangles(e)[0];
  const int li = mesh.local_edge_index(t, e);
  const Vec2 n = mesh.edge_normal(e) * mesh.edge_sign(t, li);
  const CellGeometry g = CellGeometry::of(mesh, t);
  const Vec2& a = mesh.vertex(mesh.edge(e)[0]);
  const Vec2& b = mesh.vertex(mesh.edge(e)[1]);
  const double L = (b - a).norm();
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2 x = a + rule.points[q] * (b - a);
    fn(t, x, n, rule.weights[q] * L, physical_bdm1_basis(mesh, t, g, g.pullback(x)));
  }
}

}  // namespace

LoadVectors assemble_load(const ProblemData& problem, const Discretization& disc, double t,
                          Exec exec, const QuadratureOrders& orders) {
  const QuadratureRule& rule = make_quadrature(orders.load);
  const TriangleMesh& fmesh = *disc.fluid_mesh;
  const TriangleMesh& pmesh = *disc.poro_mesh;
  LoadVectors lv;
  lv.sigma_f = Vector::Zero(disc.sigma_f.dof_count());
  lv.u_f = Vector::Zero(disc.u_f.dof_count());
  lv.u_p = Vector::Zero(disc.u_p.dof_count());
  lv.eta_p = Vector::Zero(disc.eta_p.dof_count());
  lv.p_p = Vector::Zero(disc.p_p.dof_count());

  // 0 = sigma_f, 1 = u_f, 2 = u_p, 3 = eta_p, 4 = p_p
  const auto fluid = gather_cells<Tagged>(fmesh.num_triangles(), exec, [&](int c, std::vector<Tagged>& out) {
    if (!problem.f_f && !problem.q_f) return;
    const CellBasis cb = cell_basis(fmesh, c, rule);
    const CellDofs sd = disc.sigma_f.cell_dofs(c);
    const CellDofs ud = disc.u_f.cell_dofs(c);
    Vec2 f = Vec2::Zero();
    double tr[12] = {};
    for (std::size_t q = 0; q < cb.weight.size(); ++q) {
      if (problem.f_f) f += cb.weight[q] * problem.f_f(t, cb.points[q]);
      if (problem.q_f) {
        const double qf = problem.q_f(t, cb.points[q]);
        for (int s = 0; s < 2; ++s) {
          for (int j = 0; j < 6; ++j) tr[6 * s + j] -= 0.5 * cb.weight[q] * qf * cb.basis[q].values[j][s];
        }
      }
    }
    for (int k = 0; k < 2; ++k) out.push_back({1, ud.index[k], 0, f[k]});
    if (problem.q_f) {
      for (int a = 0; a < 12; ++a) out.push_back({0, sd.index[a], 0, tr[a]});
    }
  });

  const auto poro = gather_cells<Tagged>(pmesh.num_triangles(), exec, [&](int c, std::vector<Tagged>& out) {
    if (!problem.f_p && !problem.q_p) return;
    const CellGeometry g = CellGeometry::of(pmesh, c);
    const double jac = std::abs(g.det);
    const CellDofs ed = disc.eta_p.cell_dofs(c);
    double fe[6] = {};
    double qp = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 xi = rule.reference_point(q);
      const Vec2 x = g.map(xi);
      const double w = rule.weights[q] * jac;
      if (problem.f_p) {
        const Vec2 f = problem.f_p(t, x);
        const auto lam = p1_basis(xi);
        for (int a = 0; a < 3; ++a) {
          for (int k = 0; k < 2; ++k) fe[2 * a + k] += w * f[k] * lam[a];
        }
      }
      if (problem.q_p) qp += w * problem.q_p(t, x);
    }
    for (int i = 0; i < 6; ++i) out.push_back({3, ed.index[i], 0, fe[i]});
    out.push_back({4, c, 0, qp});
  });

  for (const auto* list : {&fluid, &poro}) {
    for (const auto& e : *list) {
      Vector* target[] = {&lv.sigma_f, &lv.u_f, &lv.u_p, &lv.eta_p, &lv.p_p};
      (*target[e.op])[e.row] += e.value;
    }
  }

  // <tau n, g> on the fluid Dirichlet boundary
  if (problem.fluid_velocity) {
    for (int e : fmesh.edges_with_tag(BoundaryTag::FluidDirichlet)) {
      const int tri = fmesh.edge_triangles(e)[0];
      const CellDofs sd = disc.sigma_f.cell_dofs(tri);
      for_each_boundary_point(fmesh, e, orders.boundary,
                              [&](int, const Vec2& x, const Vec2& n, double w, const BdmBasis& b) {
                                const Vec2 gv = problem.fluid_velocity(t, x);
                                for (int s = 0; s < 2; ++s) {
                                  for (int j = 0; j < 6; ++j) {
                                    lv.sigma_f[sd.index[6 * s + j]] += w * gv[s] * b.values[j].dot(n);
                                  }
                                }
                              });
    }
  }
  // -<v . n, g_p> on the Darcy pressure boundary
  if (problem.poro_pressure) {
    for (int e : pmesh.edges_with_tag(BoundaryTag::PoroDirichlet)) {
      const int tri = pmesh.edge_triangles(e)[0];
      const CellDofs vd = disc.u_p.cell_dofs(tri);
      for_each_boundary_point(pmesh, e, orders.boundary,
                              [&](int, const Vec2& x, const Vec2& n, double w, const BdmBasis& b) {
                                const double gp = problem.poro_pressure(t, x);
                                for (int j = 0; j < 6; ++j) lv.u_p[vd.index[j]] -= w * gp * b.values[j].dot(n);
                              });
    }
  }
  return lv;
}

Vector assemble_compressibility_mass(const ProblemData& problem, const Discretization& disc,
                                     double t, const QuadratureOrders& orders) {
  Vector d = Vector::Zero(disc.u_f.dof_count());
  if (!problem.q_f) return d;
  const QuadratureRule& rule = make_quadrature(orders.load);
  const TriangleMesh& mesh = *disc.fluid_mesh;
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    const CellGeometry g = CellGeometry::of(mesh, c);
    double sum = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      sum += rule.weights[q] * std::abs(g.det) * problem.q_f(t, g.map(rule.reference_point(q)));
    }
    d[2 * c] = problem.params.rho_f * sum;
    d[2 * c + 1] = problem.params.rho_f * sum;
  }
  return d;
}

}  // namespace nsbiot
