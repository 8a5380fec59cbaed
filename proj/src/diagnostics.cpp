#include "nsbiot/diagnostics.hpp"

#include "nsbiot/elements.hpp"
#include "nsbiot/quadrature.hpp"

namespace nsbiot {

ConservationResiduals conservation_residuals(const CoupledSystem& system, const SystemState& state,
                                             const History& history) {
  const Discretization& d = system.discretization();
  const ProblemData& prob = system.problem();
  const ModelParams& prm = prob.params;
  const BlockLayout& L = system.layout();
  const QuadratureOrders orders;
  const double dt = system.dt();
  const double t = state.t;
  const SystemState& prev = history.previous;

  const Vector up = state.field(L, Field::Up);
  const Vector eta = state.field(L, Field::Eta);
  const Vector eta1 = prev.field(L, Field::Eta);
  const Vector pp = state.field(L, Field::Pp);
  const Vector pp1 = prev.field(L, Field::Pp);
  const Vector sigma = state.field(L, Field::Sigma);
  const Vector uf = state.field(L, Field::Uf);
  const Vector uf1 = prev.field(L, Field::Uf);
  const Vector phi = state.field(L, Field::Phi);
  const Vector deta = (eta - eta1) / dt;

  ConservationResiduals r;
  const QuadratureRule& rule = make_quadrature(orders.load);
  const Vec2 centroid_ref(1.0 / 3.0, 1.0 / 3.0);

  const TriangleMesh& pm = *d.poro_mesh;
  r.darcy_mass.resize(pm.num_triangles());
  for (int c = 0; c < pm.num_triangles(); ++c) {
    const CellGeometry g = CellGeometry::of(pm, c);
    double q = 0.0;
    if (prob.q_p) {
      for (int k = 0; k < rule.size(); ++k) {
        q += rule.weights[k] * std::abs(g.det) * prob.q_p(t, g.map(rule.reference_point(k)));
      }
    }
    const double area = g.area();
    r.darcy_mass[c] = prm.s0 * (pp[c] - pp1[c]) / dt * area +
                      prm.alpha_p * evaluate_divergence(d.eta_p, deta, c, centroid_ref) * area +
                      evaluate_divergence(d.u_p, up, c, centroid_ref) * area - q;
  }

  const TriangleMesh& fm = *d.fluid_mesh;
  r.fluid_momentum.resize(2 * fm.num_triangles());
  r.weak_symmetry.resize(fm.num_triangles());
  for (int c = 0; c < fm.num_triangles(); ++c) {
    const CellGeometry g = CellGeometry::of(fm, c);
    Vec2 f = Vec2::Zero();
    double qf = 0.0, skew = 0.0;
    for (int k = 0; k < rule.size(); ++k) {
      const Vec2 xi = rule.reference_point(k);
      const Vec2 x = g.map(xi);
      const double w = rule.weights[k] * std::abs(g.det);
      if (prob.f_f) f += w * prob.f_f(t, x);
      if (prob.q_f) qf += w * prob.q_f(t, x);
      const Mat2 s = evaluate_tensor(d.sigma_f, sigma, c, xi);
      skew += w * (s(0, 1) - s(1, 0));
    }
    const double area = g.area();
    const Vec2 u(uf[2 * c], uf[2 * c + 1]);
    const Vec2 u1(uf1[2 * c], uf1[2 * c + 1]);
    const Vec2 div = evaluate_row_divergence(d.sigma_f, sigma, c, centroid_ref) * area;
    const Vec2 res = prm.rho_f * (u - u1) / dt * area - div - prm.rho_f * qf * u - f;
    r.fluid_momentum[2 * c] = res.x();
    r.fluid_momentum[2 * c + 1] = res.y();
    r.weak_symmetry[c] = skew;
  }

  const TraceMesh& tp = *d.poro_trace;
  r.interface_mass = Vector::Zero(tp.num_points());
  const LineRule& line = make_line_quadrature(orders.interface);
  for (const InterfaceSegment& seg : d.segments) {
    const CellGeometry g = CellGeometry::of(pm, seg.poro_triangle);
    const int k = seg.lambda_cell;
    const double len = seg.length();
    const Vec2 n_p = -seg.n_f;
    for (int q = 0; q < line.size(); ++q) {
      const double a = line.points[q];
      const Vec2 x = (1.0 - a) * seg.x0 + a * seg.x1;
      const double s = (1.0 - a) * seg.s0 + a * seg.s1;
      const Vec2 xi = g.pullback(x);
      const double flux = evaluate_trace_vector(d.phi, phi, s).dot(seg.n_f) +
                          evaluate_vector(d.eta_p, deta, seg.poro_triangle, xi).dot(n_p) +
                          evaluate_vector(d.u_p, up, seg.poro_triangle, xi).dot(n_p);
      const double theta = (s - tp.breakpoints[k]) / tp.segment_length(k);
      const double w = line.weights[q] * len;
      r.interface_mass[k] += w * (1.0 - theta) * flux;
      r.interface_mass[k + 1] += w * theta * flux;
    }
  }
  return r;
}

ConservationCheck check_conservation(const ConservationResiduals& r, const NewtonReport& n,
                                     double factor) {
  auto tol = [&](Field f) { return factor * n.tolerance[static_cast<int>(f)]; };
  ConservationCheck c;
  c.darcy = r.max_darcy() <= tol(Field::Pp);
  c.momentum = r.max_momentum() <= tol(Field::Uf);
  c.interface = r.max_interface() <= tol(Field::Lambda);
  c.symmetry = r.max_symmetry() <= tol(Field::Gamma);
  return c;
}

double discrete_energy(const CoupledSystem& system, const SystemState& state,
                       const Vector& eta_previous) {
  const BlockLayout& L = system.layout();
  const SubdomainOperators& op = system.subdomain_operators();
  const Vector u = state.field(L, Field::Uf);
  const Vector p = state.field(L, Field::Pp);
  const Vector eta = state.field(L, Field::Eta);
  const Vector v = (eta - eta_previous) / system.dt();
  return 0.5 * (u.dot(op.M_uf * u) + p.dot(op.M_pp * p) + eta.dot(op.A_ep * eta) + v.dot(op.M_eta * v));
}

}  // namespace nsbiot
