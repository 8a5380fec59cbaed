#include "nsbiot/system.hpp"

#include "nsbiot/quadrature.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace nsbiot {

const char* to_string(Field f) {
  switch (f) {
    case Field::Sigma: return "sigma_f";
    case Field::Up: return "u_p";
    case Field::Eta: return "eta_p";
    case Field::Uf: return "u_f";
    case Field::Pp: return "p_p";
    case Field::Gamma: return "gamma_f";
    case Field::Phi: return "phi";
    case Field::Lambda: return "lambda";
  }
  return "?";
}

BlockLayout BlockLayout::of(const Discretization& disc) {
  BlockLayout l;
  const FunctionSpace* spaces[kNumFields] = {&disc.sigma_f, &disc.u_p, &disc.eta_p, &disc.u_f,
                                             &disc.p_p,     &disc.gamma_f, &disc.phi, &disc.lambda};
  for (int f = 0; f < kNumFields; ++f) {
    l.offset[f] = l.total;
    l.size[f] = spaces[f]->dof_count();
    l.total += l.size[f];
  }
  return l;
}

Field BlockLayout::field_of(int dof) const {
  for (int f = kNumFields - 1; f >= 0; --f) {
    if (dof >= offset[f]) return static_cast<Field>(f);
  }
  throw std::out_of_range("dof outside layout");
}

void NewtonConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw std::invalid_argument("Newton tolerances must be > 0");
  if (max_iter < 1) throw std::invalid_argument("Newton max_iter must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("Newton damping must lie in (0, 1]");
  if (!(backward_error_floor >= 0.0)) throw std::invalid_argument("backward_error_floor must be >= 0");
}

// ---------------------------------------------------------------------------

struct CoupledSystem::Solver {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;

  // Row then column max-norm equilibration before the LU, plus a few steps
  // of iterative refinement against the unscaled matrix. Without the scaling
  // the coefficient spread of Example 2 defeats SparseLU's pivoting.
  Vector solve(const SparseMatrix& J, const Vector& b, double t, const NewtonReport& rep) {
    const int n = static_cast<int>(J.rows());
    Vector rs = Vector::Zero(n), cs = Vector::Zero(n);
    for (int k = 0; k < J.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(J, k); it; ++it) rs[it.row()] = std::max(rs[it.row()], std::abs(it.value()));
    }
    for (int i = 0; i < n; ++i) rs[i] = rs[i] > 0.0 ? 1.0 / rs[i] : 1.0;
    for (int k = 0; k < J.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(J, k); it; ++it) {
        cs[it.col()] = std::max(cs[it.col()], rs[it.row()] * std::abs(it.value()));
      }
    }
    for (int i = 0; i < n; ++i) cs[i] = cs[i] > 0.0 ? 1.0 / cs[i] : 1.0;
    SparseMatrix A = rs.asDiagonal() * J * cs.asDiagonal();
    A.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
      throw NewtonError("singular Jacobian factorization at t = " + std::to_string(t) + ": " +
                            lu.lastErrorMessage(),
                        rep);
    }
    Vector x = cs.cwiseProduct(lu.solve(rs.cwiseProduct(b)));
    for (int k = 0; k < 3; ++k) {
      const Vector r = rs.cwiseProduct(b - J * x);
      if (!(r.lpNorm<Eigen::Infinity>() > 1e-15 * rs.cwiseProduct(b).lpNorm<Eigen::Infinity>())) break;
      x += cs.cwiseProduct(lu.solve(r));
    }
    return x;
  }
};

namespace {

void add_block(std::vector<Triplet>& out, const SparseMatrix& m, int r0, int c0, double scale,
               bool transpose = false) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
      const int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
      out.emplace_back(r0 + r, c0 + c, scale * it.value());
    }
  }
}

}  // namespace

CoupledSystem::CoupledSystem(std::shared_ptr<const Discretization> disc, ProblemData problem,
                             double dt, Exec exec, QuadratureOrders orders)
    : disc_(std::move(disc)),
      problem_(std::move(problem)),
      dt_(dt),
      exec_(exec),
      orders_(orders),
      solver_(std::make_unique<Solver>()) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("dt must be > 0");
  problem_.params.validate();
  layout_ = BlockLayout::of(*disc_);
  sub_ = assemble_subdomain_forms(problem_.params, *disc_, exec_, orders_);
  iface_ = assemble_interface_forms(problem_.params, *disc_, disc_->segments, orders_);

  const auto& L = layout_;
  const int S = L.begin(Field::Sigma), V = L.begin(Field::Up), E = L.begin(Field::Eta);
  const int U = L.begin(Field::Uf), P = L.begin(Field::Pp), G = L.begin(Field::Gamma);
  const int F = L.begin(Field::Phi), M = L.begin(Field::Lambda);
  const double a = problem_.params.alpha_p;
  const double idt = 1.0 / dt_;

  std::vector<Triplet> t;
  // tau rows
  add_block(t, sub_.A_f, S, S, 1.0);
  add_block(t, iface_.B_nf, S, F, 1.0, true);
  add_block(t, sub_.B_f, S, U, 1.0, true);
  add_block(t, sub_.B_sk, S, G, 1.0, true);
  // v_p rows
  add_block(t, sub_.A_dp, V, V, 1.0);
  add_block(t, sub_.B_p, V, P, 1.0, true);
  add_block(t, iface_.B_np, V, M, 1.0, true);
  // xi_p rows
  add_block(t, sub_.M_eta, E, E, idt * idt);
  add_block(t, sub_.A_ep, E, E, 1.0);
  add_block(t, iface_.C_eta_eta, E, E, idt);
  add_block(t, sub_.B_ep, E, P, a, true);
  add_block(t, iface_.C_eta_phi, E, F, 1.0);
  add_block(t, iface_.G_eta, E, M, -1.0, true);
  // v_f rows
  add_block(t, sub_.M_uf, U, U, idt);
  add_block(t, sub_.B_f, U, S, -1.0);
  // w_p rows
  add_block(t, sub_.M_pp, P, P, idt);
  add_block(t, sub_.B_ep, P, E, -a * idt);
  add_block(t, sub_.B_p, P, V, -1.0);
  // chi rows
  add_block(t, sub_.B_sk, G, S, -1.0);
  // psi rows
  add_block(t, iface_.B_nf, F, S, -1.0);
  add_block(t, iface_.C_phi_eta, F, E, idt);
  add_block(t, iface_.C_phi_phi, F, F, 1.0);
  add_block(t, iface_.G_phi, F, M, -1.0, true);
  // xi rows
  add_block(t, iface_.G_eta, M, E, idt);
  add_block(t, iface_.G_phi, M, F, 1.0);
  add_block(t, iface_.B_np, M, V, -1.0);

  // Pattern of the nonlinear and time-dependent parts, and a full diagonal.
  const TriangleMesh& fmesh = *disc_->fluid_mesh;
  for (int c = 0; c < fmesh.num_triangles(); ++c) {
    const CellDofs sd = disc_->sigma_f.cell_dofs(c);
    const CellDofs ud = disc_->u_f.cell_dofs(c);
    for (int i = 0; i < 12; ++i) {
      for (int k = 0; k < 2; ++k) t.emplace_back(S + sd.index[i], U + ud.index[k], 0.0);
    }
  }
  for (const auto& seg : disc_->segments) {
    const CellDofs fd = disc_->phi.cell_dofs(seg.phi_cell);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) t.emplace_back(F + fd.index[i], F + fd.index[j], 0.0);
    }
  }
  for (int i = 0; i < L.total; ++i) t.emplace_back(i, i, 0.0);

  linear_.resize(L.total, L.total);
  linear_.setFromTriplets(t.begin(), t.end());
  linear_.makeCompressed();
}

CoupledSystem::~CoupledSystem() = default;

SystemState CoupledSystem::initial_state() const {
  const Discretization& d = *disc_;
  const ProblemData& p = problem_;
  SystemState s;
  s.t = 0.0;
  s.x = Vector::Zero(layout_.total);
  if (p.sigma0) s.field(layout_, Field::Sigma) = interpolate(d.sigma_f, p.sigma0);
  if (p.u_p0) s.field(layout_, Field::Up) = interpolate(d.u_p, p.u_p0);
  if (p.eta0) s.field(layout_, Field::Eta) = interpolate(d.eta_p, p.eta0);
  if (p.u_f0) s.field(layout_, Field::Uf) = interpolate(d.u_f, p.u_f0);
  if (p.p_p0) s.field(layout_, Field::Pp) = interpolate(d.p_p, p.p_p0);
  if (p.gamma0) s.field(layout_, Field::Gamma) = interpolate(d.gamma_f, p.gamma0);
  if (p.phi0) s.field(layout_, Field::Phi) = interpolate(d.phi, p.phi0);
  if (p.lambda0) s.field(layout_, Field::Lambda) = interpolate(d.lambda, p.lambda0);
  return s;
}

History CoupledSystem::initial_history(const SystemState& initial) const {
  History h;
  h.previous = initial;
  h.eta_before = initial.field(layout_, Field::Eta);
  if (problem_.u_s0) h.eta_before -= dt_ * interpolate(disc_->eta_p, problem_.u_s0);
  return h;
}

BlockSystem CoupledSystem::build_residual_and_jacobian(const Vector& x, const History& history,
                                                       double t, bool with_jacobian) const {
  const auto& L = layout_;
  if (x.size() != L.total) throw std::invalid_argument("iterate has the wrong size");
  if (history.previous.x.size() != L.total || history.eta_before.size() != L.count(Field::Eta)) {
    throw std::invalid_argument("history is not initialised (missing level m-1 or m-2)");
  }
  const Discretization& d = *disc_;
  const ModelParams& prm = problem_.params;
  const double idt = 1.0 / dt_;

  const Vector& xp = history.previous.x;
  const auto eta1 = xp.segment(L.begin(Field::Eta), L.count(Field::Eta));
  const auto uf1 = xp.segment(L.begin(Field::Uf), L.count(Field::Uf));
  const auto pp1 = xp.segment(L.begin(Field::Pp), L.count(Field::Pp));
  const Vector& eta2 = history.eta_before;

  BlockSystem bs;
  bs.rhs = Vector::Zero(L.total);
  const LoadVectors load = assemble_load(problem_, d, t, exec_, orders_);
  bs.rhs.segment(L.begin(Field::Sigma), L.count(Field::Sigma)) += load.sigma_f;
  bs.rhs.segment(L.begin(Field::Up), L.count(Field::Up)) += load.u_p;
  bs.rhs.segment(L.begin(Field::Eta), L.count(Field::Eta)) +=
      load.eta_p + idt * idt * (sub_.M_eta * (2.0 * eta1 - eta2)) + idt * (iface_.C_eta_eta * eta1);
  bs.rhs.segment(L.begin(Field::Uf), L.count(Field::Uf)) += load.u_f + idt * (sub_.M_uf * uf1);
  bs.rhs.segment(L.begin(Field::Pp), L.count(Field::Pp)) +=
      load.p_p + idt * (sub_.M_pp * pp1) - prm.alpha_p * idt * (sub_.B_ep * eta1);
  bs.rhs.segment(L.begin(Field::Phi), L.count(Field::Phi)) += idt * (iface_.C_phi_eta * eta1);
  bs.rhs.segment(L.begin(Field::Lambda), L.count(Field::Lambda)) += idt * (iface_.G_eta * eta1);

  bs.residual = linear_ * x - bs.rhs;

  std::vector<Triplet> extra;
  const Vector qmass = assemble_compressibility_mass(problem_, d, t, orders_);
  if (problem_.q_f) {
    const int U = L.begin(Field::Uf);
    for (int i = 0; i < qmass.size(); ++i) {
      bs.residual[U + i] -= qmass[i] * x[U + i];
      if (with_jacobian) extra.emplace_back(U + i, U + i, -qmass[i]);
    }
  }
  if (prm.convection_on) {
    const Vector uf = x.segment(L.begin(Field::Uf), L.count(Field::Uf));
    const NonlinearTerm kappa = assemble_convective(prm, d, uf, exec_, orders_);
    bs.residual.segment(L.begin(Field::Sigma), L.count(Field::Sigma)) += kappa.residual;
    const Vector phi = x.segment(L.begin(Field::Phi), L.count(Field::Phi));
    const NonlinearTerm inertia = assemble_interface_inertia(prm, d, d.segments, phi, orders_);
    bs.residual.segment(L.begin(Field::Phi), L.count(Field::Phi)) += inertia.residual;
    if (with_jacobian) {
      add_block(extra, kappa.jacobian, L.begin(Field::Sigma), L.begin(Field::Uf), 1.0);
      add_block(extra, inertia.jacobian, L.begin(Field::Phi), L.begin(Field::Phi), 1.0);
    }
  }
  if (with_jacobian) {
    SparseMatrix n(L.total, L.total);
    n.setFromTriplets(extra.begin(), extra.end());
    bs.jacobian = linear_ + n;
    bs.jacobian.makeCompressed();
  }
  return bs;
}

std::vector<std::pair<int, double>> CoupledSystem::essential_values(double t) const {
  const Discretization& d = *disc_;
  const TriangleMesh& fmesh = *d.fluid_mesh;
  const TriangleMesh& pmesh = *d.poro_mesh;
  std::map<int, double> values;
  auto put = [&](int dof, double v) {
    auto [it, inserted] = values.emplace(dof, v);
    if (!inserted && std::abs(it->second - v) > 1e-12 * std::max(1.0, std::abs(v))) {
      std::ostringstream os;
      os << "conflicting essential values on dof " << dof << " (" << to_string(layout_.field_of(dof))
         << "): " << it->second << " vs " << v;
      throw std::runtime_error(os.str());
    }
  };

  const int S = layout_.begin(Field::Sigma);
  const int stride = 2 * fmesh.num_edges();
  for (int e : fmesh.edges_with_tag(BoundaryTag::FluidNeumann)) {
    for (int r = 0; r < 2; ++r) {
      std::array<double, 2> m{0.0, 0.0};
      if (problem_.fluid_stress) {
        m = bdm_edge_moments(fmesh, e, [&](const Vec2& x, const Vec2& n) {
          return (problem_.fluid_stress(t, x) * n)[r];
        });
      }
      put(S + r * stride + 2 * e, m[0]);
      put(S + r * stride + 2 * e + 1, m[1]);
    }
  }
  const int V = layout_.begin(Field::Up);
  for (int e : pmesh.edges_with_tag(BoundaryTag::PoroNeumann)) {
    std::array<double, 2> m{0.0, 0.0};
    if (problem_.darcy_velocity) {
      m = bdm_edge_moments(pmesh, e, [&](const Vec2& x, const Vec2& n) {
        return problem_.darcy_velocity(t, x).dot(n);
      });
    }
    put(V + 2 * e, m[0]);
    put(V + 2 * e + 1, m[1]);
  }
  const int E = layout_.begin(Field::Eta);
  for (BoundaryTag tag : {BoundaryTag::PoroDirichlet, BoundaryTag::PoroNeumann}) {
    for (int e : pmesh.edges_with_tag(tag)) {
      for (int v : pmesh.edge(e)) {
        const Vec2 val = problem_.displacement ? problem_.displacement(t, pmesh.vertex(v)) : Vec2::Zero();
        put(E + 2 * v, val.x());
        put(E + 2 * v + 1, val.y());
      }
    }
  }
  return {values.begin(), values.end()};
}

namespace {

// One constrained sigma_f moment on a FluidNeumann edge, with the data needed
// to add rho_f (u.n)_+ u of the adjacent cell to its prescribed value.
struct OutflowRow {
  int dof;
  int row;          // 0 or 1: which tensor row
  int uf;           // first u_f dof of the adjacent cell
  double weight;    // signed integral of the moment's Lagrange weight over the edge
  Vec2 n;           // outward unit normal
};

std::vector<OutflowRow> outflow_rows(const TriangleMesh& mesh, const BlockLayout& L) {
  std::vector<OutflowRow> rows;
  const int stride = 2 * mesh.num_edges();
  for (int e : mesh.edges_with_tag(BoundaryTag::FluidNeumann)) {
    const int c = mesh.edge_triangles(e)[0];
    // the moments use the reference normal of the edge, which may point inward
    const Vec2 ref = mesh.edge_normal(e);
    const double sign = ref.dot(mesh.edge_midpoint(e) - mesh.centroid(c)) < 0.0 ? -1.0 : 1.0;
    const Vec2 n = sign * ref;
    const double w = sign * 0.5 * mesh.edge_length(e);
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 2; ++k) {
        rows.push_back({L.begin(Field::Sigma) + r * stride + 2 * e + k, r, L.begin(Field::Uf) + 2 * c, w, n});
      }
    }
  }
  return rows;
}

// Symmetric elimination of the fixed dofs, except that outflow rows become
// x_i - g_i + rho w (u.n)_+ u_r = 0 and keep their columns.
void eliminate(BlockSystem& system, const std::vector<std::pair<int, double>>& bc, int total,
               const std::vector<OutflowRow>& rows, const Vector& x, double rho) {
  std::vector<char> fixed(total, 0);
  std::vector<int> outflow(total, -1);
  for (const auto& [dof, value] : bc) {
    fixed[dof] = 1;
    system.residual[dof] = 0.0;
  }
  std::map<int, double> base(bc.begin(), bc.end());
  std::vector<std::array<double, 2>> slope(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const OutflowRow& o = rows[i];
    outflow[o.dof] = static_cast<int>(i);
    const Vec2 u(x[o.uf], x[o.uf + 1]);
    const double un = u.dot(o.n);
    slope[i] = {0.0, 0.0};
    if (un > 0.0) {
      for (int j = 0; j < 2; ++j) slope[i][j] = rho * o.weight * (o.n[j] * u[o.row] + (j == o.row ? un : 0.0));
    }
    system.residual[o.dof] = x[o.dof] - base.at(o.dof) + rho * o.weight * std::max(un, 0.0) * u[o.row];
  }
  if (system.jacobian.rows() == 0) return;
  SparseMatrix& J = system.jacobian;
  std::vector<int> found(rows.size(), 0);
  for (int k = 0; k < J.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(J, k); it; ++it) {
      const int r = it.row(), c = it.col();
      if (fixed[r]) {
        double v = r == c ? 1.0 : 0.0;
        if (const int i = outflow[r]; i >= 0 && (c == rows[i].uf || c == rows[i].uf + 1)) {
          v = slope[i][c - rows[i].uf];
          ++found[i];
        }
        it.valueRef() = v;
      } else if (fixed[c] && outflow[c] < 0) {
        it.valueRef() = 0.0;
      }
    }
  }
  for (int f : found) {
    if (f != 2) throw std::logic_error("outflow traction rows missing from the Jacobian pattern");
  }
}

}  // namespace

void CoupledSystem::apply_boundary_conditions(BlockSystem& system,
                                              const std::vector<std::pair<int, double>>& bc) const {
  eliminate(system, bc, layout_.total, {}, Vector(), 0.0);
}

std::array<double, kNumFields> CoupledSystem::block_norms(const Vector& v) const {
  std::array<double, kNumFields> n{};
  for (int f = 0; f < kNumFields; ++f) n[f] = v.segment(layout_.offset[f], layout_.size[f]).norm();
  return n;
}

NewtonReport CoupledSystem::newton_solve(const History& history, double t, const NewtonConfig& cfg,
                                         SystemState& result) const {
  cfg.validate();
  result = history.previous;
  result.t = t;
  const auto bc = essential_values(t);
  for (const auto& [dof, value] : bc) result.x[dof] = value;
  const std::vector<OutflowRow> outflow = problem_.traction_outflow && problem_.params.convection_on
                                              ? outflow_rows(*disc_->fluid_mesh, layout_)
                                              : std::vector<OutflowRow>{};
  // outflow moments start from the previous step, not from the bare -p n
  for (const OutflowRow& o : outflow) result.x[o.dof] = history.previous.x[o.dof];

  NewtonReport rep;
  for (int it = 0;; ++it) {
    BlockSystem bs = build_residual_and_jacobian(result.x, history, t, true);
    const Vector scale = bs.jacobian.cwiseAbs() * result.x.cwiseAbs() + bs.rhs.cwiseAbs();
    eliminate(bs, bc, layout_.total, outflow, result.x, problem_.params.rho_f);
    const auto norms = block_norms(bs.residual);
    const auto scales = block_norms(scale);
    if (it == 0) rep.initial_residual = norms;
    bool ok = true;
    for (int f = 0; f < kNumFields; ++f) {
      rep.tolerance[f] = std::max({cfg.abs_tol, cfg.rel_tol * rep.initial_residual[f],
                                   cfg.backward_error_floor * scales[f]});
      if (!(norms[f] <= rep.tolerance[f])) ok = false;
    }
    rep.final_residual = norms;
    if (ok) {
      rep.converged = true;
      return rep;
    }
    if (it == cfg.max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << cfg.max_iter << " iterations at t = " << t << ";";
      for (int f = 0; f < kNumFields; ++f) {
        os << ' ' << to_string(static_cast<Field>(f)) << '=' << norms[f] << '/' << rep.tolerance[f];
      }
      throw NewtonError(os.str(), rep);
    }
    const Vector delta = solver_->solve(bs.jacobian, -bs.residual, t, rep);
    if (!delta.allFinite()) throw NewtonError("non-finite Newton update at t = " + std::to_string(t), rep);
    result.x += cfg.damping * delta;
    rep.iterations = it + 1;
  }
}

SystemState time_loop(const CoupledSystem& system, const SystemState& initial, int steps,
                      const NewtonConfig& cfg, const StepObserver& observer) {
  if (steps < 1) throw std::invalid_argument("time_loop needs at least one step");
  const BlockLayout& L = system.layout();
  History h = system.initial_history(initial);
  SystemState current = initial;
  for (int m = 1; m <= steps; ++m) {
    const double t = initial.t + m * system.dt();
    StepRecord rec;
    rec.step = m;
    try {
      rec.newton = system.newton_solve(h, t, cfg, rec.state);
    } catch (const NewtonError& e) {
      throw NewtonError("step " + std::to_string(m) + ": " + e.what(), e.report());
    }
    if (observer) observer(rec, h);
    h.eta_before = h.previous.field(L, Field::Eta);
    h.previous = rec.state;
    current = std::move(rec.state);
  }
  return current;
}

Vector recover_fluid_pressure(const Discretization& disc, const ModelParams& params,
                              const Vector& sigma_f, const Vector& u_f, const TimeScalar& q_f,
                              double t) {
  const TriangleMesh& mesh = *disc.fluid_mesh;
  const QuadratureRule& rule = make_quadrature(2);
  Vector p(mesh.num_triangles());
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    const CellGeometry g = CellGeometry::of(mesh, c);
    const Vec2 u(u_f[2 * c], u_f[2 * c + 1]);
    double sum = 0.0;
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 xi = rule.reference_point(q);
      const double tr = evaluate_tensor(disc.sigma_f, sigma_f, c, xi).trace();
      const double qf = q_f ? q_f(t, g.map(xi)) : 0.0;
      sum += rule.weights[q] * -0.5 * (tr + params.rho_f * u.squaredNorm() - 2.0 * params.mu * qf);
    }
    p[c] = sum / 0.5;
  }
  return p;
}

}  // namespace nsbiot
