#include "nsbiot/mms.hpp"

#include "nsbiot/elements.hpp"
#include "nsbiot/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace nsbiot {

namespace {

constexpr double kPi = std::numbers::pi;

Mat2 sym(const Mat2& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Mat2 ExactSolution::sigma_f(double t, const Vec2& x) const {
  const Vec2 u = u_f(t, x);
  return -p_f(t, x) * Mat2::Identity() + 2.0 * params.mu * sym(grad_u_f(t, x)) -
         params.rho_f * u * u.transpose();
}

Vec2 ExactSolution::div_sigma_f(double t, const Vec2& x) const {
  const Vec2 u = u_f(t, x);
  const Mat2 g = grad_u_f(t, x);
  return -grad_p_f(t, x) + 2.0 * params.mu * div_e_u_f(t, x) - params.rho_f * (g * u + u * g.trace());
}

Mat2 ExactSolution::gamma_f(double t, const Vec2& x) const {
  const Mat2 g = grad_u_f(t, x);
  return 0.5 * (g - g.transpose());
}

Vec2 ExactSolution::u_p(double t, const Vec2& x) const {
  return -(params.K * grad_p_p(t, x)) / params.mu;
}

double ExactSolution::div_u_p(double t, const Vec2& x) const {
  return -(params.K.cwiseProduct(hess_p_p(t, x))).sum() / params.mu;
}

ExactSolution example1_solution(const ModelParams& params) {
  ExactSolution e;
  e.params = params;
  auto w = [](const Vec2& x) { return Vec2(-3.0 * x.x() + std::cos(x.y()), x.y() + 1.0); };
  auto grad_w = [](const Vec2& x) {
    Mat2 g;
    g << -3.0, -std::sin(x.y()), 0.0, 1.0;
    return g;
  };
  auto div_e_w = [](const Vec2& x) { return Vec2(-0.5 * std::cos(x.y()), 0.0); };
  auto a = [](double t) { return kPi * std::cos(kPi * t); };
  auto da = [](double t) { return -kPi * kPi * std::sin(kPi * t); };

  e.u_f = [=](double t, const Vec2& x) -> Vec2 { return a(t) * w(x); };
  e.grad_u_f = [=](double t, const Vec2& x) -> Mat2 { return a(t) * grad_w(x); };
  e.dt_u_f = [=](double t, const Vec2& x) -> Vec2 { return da(t) * w(x); };
  e.div_e_u_f = [=](double t, const Vec2& x) -> Vec2 { return a(t) * div_e_w(x); };

  e.p_p = [](double t, const Vec2& x) {
    return std::exp(t) * std::sin(kPi * x.x()) * std::cos(0.5 * kPi * x.y());
  };
  e.grad_p_p = [](double t, const Vec2& x) -> Vec2 {
    const double et = std::exp(t);
    return {et * kPi * std::cos(kPi * x.x()) * std::cos(0.5 * kPi * x.y()),
            -et * 0.5 * kPi * std::sin(kPi * x.x()) * std::sin(0.5 * kPi * x.y())};
  };
  e.hess_p_p = [](double t, const Vec2& x) -> Mat2 {
    const double et = std::exp(t);
    const double p = et * std::sin(kPi * x.x()) * std::cos(0.5 * kPi * x.y());
    const double pxy = -et * 0.5 * kPi * kPi * std::cos(kPi * x.x()) * std::sin(0.5 * kPi * x.y());
    Mat2 h;
    h << -kPi * kPi * p, pxy, pxy, -0.25 * kPi * kPi * p;
    return h;
  };
  e.dt_p_p = e.p_p;
  const TimeScalar p_p = e.p_p;
  e.p_f = [=](double t, const Vec2& x) { return p_p(t, x) + 2.0 * kPi * std::cos(kPi * t); };
  e.grad_p_f = e.grad_p_p;

  e.eta = [=](double t, const Vec2& x) -> Vec2 { return std::sin(kPi * t) * w(x); };
  e.grad_eta = [=](double t, const Vec2& x) -> Mat2 { return std::sin(kPi * t) * grad_w(x); };
  e.dt_eta = [=](double t, const Vec2& x) -> Vec2 { return a(t) * w(x); };
  e.dtt_eta = [=](double t, const Vec2& x) -> Vec2 { return da(t) * w(x); };
  e.grad_dt_eta = [=](double t, const Vec2& x) -> Mat2 { return a(t) * grad_w(x); };
  e.div_e_eta = [=](double t, const Vec2& x) -> Vec2 { return std::sin(kPi * t) * div_e_w(x); };
  e.grad_div_eta = [](double, const Vec2&) -> Vec2 { return Vec2::Zero(); };
  return e;
}

Sources manufactured_sources(const ExactSolution& ex) {
  Sources s;
  const ModelParams& p = ex.params;
  s.f_f = [ex, p](double t, const Vec2& x) -> Vec2 {
    const Vec2 u = ex.u_f(t, x);
    const Vec2 div_T = -ex.grad_p_f(t, x) + 2.0 * p.mu * ex.div_e_u_f(t, x);
    const Vec2 convective = p.convection_on ? Vec2(ex.grad_u_f(t, x) * u) : Vec2::Zero();
    return p.rho_f * (ex.dt_u_f(t, x) + convective) - div_T;
  };
  s.f_p = [ex, p](double t, const Vec2& x) -> Vec2 {
    const Vec2 div_s = p.lambda_p * ex.grad_div_eta(t, x) + 2.0 * p.mu_p * ex.div_e_eta(t, x) -
                       p.alpha_p * ex.grad_p_p(t, x);
    return p.rho_p * ex.dtt_eta(t, x) - div_s;
  };
  s.q_p = [ex, p](double t, const Vec2& x) {
    return p.s0 * ex.dt_p_p(t, x) + p.alpha_p * ex.grad_dt_eta(t, x).trace() + ex.div_u_p(t, x);
  };
  s.q_f = [ex](double t, const Vec2& x) { return ex.q_f(t, x); };
  return s;
}

ProblemData make_mms_problem(const ExactSolution& ex) {
  ProblemData d;
  d.params = ex.params;
  const Sources s = manufactured_sources(ex);
  d.f_f = s.f_f;
  d.f_p = s.f_p;
  d.q_p = s.q_p;
  d.q_f = s.q_f;
  d.fluid_velocity = ex.u_f;
  d.fluid_stress = [ex](double t, const Vec2& x) { return ex.sigma_f(t, x); };
  d.poro_pressure = ex.p_p;
  d.darcy_velocity = [ex](double t, const Vec2& x) { return ex.u_p(t, x); };
  d.displacement = ex.eta;

  d.sigma0 = [ex](const Vec2& x) { return ex.sigma_f(0.0, x); };
  d.u_p0 = [ex](const Vec2& x) { return ex.u_p(0.0, x); };
  d.eta0 = [ex](const Vec2& x) { return ex.eta(0.0, x); };
  d.u_f0 = [ex](const Vec2& x) { return ex.u_f(0.0, x); };
  d.p_p0 = [ex](const Vec2& x) { return ex.p_p(0.0, x); };
  d.gamma0 = [ex](const Vec2& x) { return ex.gamma_f(0.0, x); };
  d.phi0 = [ex](const Vec2& x) { return ex.u_f(0.0, x); };
  d.lambda0 = [ex](const Vec2& x) { return ex.p_p(0.0, x); };
  d.u_s0 = [ex](const Vec2& x) { return ex.dt_eta(0.0, x); };
  return d;
}

// ---------------------------------------------------------------------------

const char* to_string(ErrorField f) {
  switch (f) {
    case ErrorField::Sigma: return "sigma_f";
    case ErrorField::Uf: return "u_f";
    case ErrorField::Gamma: return "gamma_f";
    case ErrorField::Pf: return "p_f";
    case ErrorField::Pp: return "p_p";
    case ErrorField::Up: return "u_p";
    case ErrorField::Eta: return "eta_p";
    case ErrorField::Phi: return "phi";
    case ErrorField::Lambda: return "lambda";
  }
  return "?";
}

bool uses_max_in_time(ErrorField f) {
  return f == ErrorField::Uf || f == ErrorField::Pp || f == ErrorField::Eta;
}

namespace {

constexpr int kErrorOrder = 6;

// Squared L2 error and squared tangential-derivative error of a P1 trace field,
// given its breakpoint values, against an exact vector field (scalar fields
// use the first component).
std::pair<double, double> trace_error_sq(const TraceMesh& trace, const std::vector<Vec2>& nodal,
                                         const std::function<Vec2(const Vec2&)>& exact,
                                         const std::function<Vec2(const Vec2&, const Vec2&)>& exact_ds) {
  const LineRule& rule = make_line_quadrature(kMaxLineOrder);
  double l2 = 0.0, d2 = 0.0;
  for (int s = 0; s < trace.num_segments(); ++s) {
    const double len = trace.segment_length(s);
    const Vec2 tan = (trace.points[s + 1] - trace.points[s]) / len;
    const Vec2 dds = (nodal[s + 1] - nodal[s]) / len;
    for (int q = 0; q < rule.size(); ++q) {
      const double r = rule.points[q];
      const Vec2 x = (1.0 - r) * trace.points[s] + r * trace.points[s + 1];
      const Vec2 vh = (1.0 - r) * nodal[s] + r * nodal[s + 1];
      l2 += rule.weights[q] * len * (vh - exact(x)).squaredNorm();
      d2 += rule.weights[q] * len * (dds - exact_ds(x, tan)).squaredNorm();
    }
  }
  return {l2, d2};
}

double half_norm(const std::pair<double, double>& sq) {
  return std::sqrt(std::sqrt(sq.first) * std::sqrt(sq.first + sq.second));
}

}  // namespace

FieldErrors step_errors(const Discretization& disc, const BlockLayout& L, const SystemState& state,
                        const ExactSolution& ex) {
  const double t = state.t;
  const QuadratureRule& rule = make_quadrature(kErrorOrder);
  const Vector sigma = state.field(L, Field::Sigma);
  const Vector uf = state.field(L, Field::Uf);
  const Vector gamma = state.field(L, Field::Gamma);
  const Vector up = state.field(L, Field::Up);
  const Vector pp = state.field(L, Field::Pp);
  const Vector eta = state.field(L, Field::Eta);
  const Vector pf = recover_fluid_pressure(disc, ex.params, sigma, uf,
                                           [&ex](double tt, const Vec2& x) { return ex.q_f(tt, x); }, t);

  double s_l2 = 0.0, s_div = 0.0, u_l4 = 0.0, g_l2 = 0.0, pf_l2 = 0.0;
  const TriangleMesh& fm = *disc.fluid_mesh;
  for (int c = 0; c < fm.num_triangles(); ++c) {
    const CellGeometry g = CellGeometry::of(fm, c);
    const double jac = std::abs(g.det);
    const Vec2 uh(uf[2 * c], uf[2 * c + 1]);
    const Mat2 gh = skew_tensor(gamma[c]);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 xi = rule.reference_point(q);
      const Vec2 x = g.map(xi);
      const double w = rule.weights[q] * jac;
      s_l2 += w * (evaluate_tensor(disc.sigma_f, sigma, c, xi) - ex.sigma_f(t, x)).squaredNorm();
      s_div += w * std::pow((evaluate_row_divergence(disc.sigma_f, sigma, c, xi) - ex.div_sigma_f(t, x)).norm(),
                            4.0 / 3.0);
      u_l4 += w * std::pow((uh - ex.u_f(t, x)).squaredNorm(), 2);
      g_l2 += w * (gh - ex.gamma_f(t, x)).squaredNorm();
      pf_l2 += w * std::pow(pf[c] - ex.p_f(t, x), 2);
    }
  }

  double pp_l2 = 0.0, up_l2 = 0.0, up_div = 0.0, eta_l2 = 0.0, eta_grad = 0.0;
  const TriangleMesh& pm = *disc.poro_mesh;
  for (int c = 0; c < pm.num_triangles(); ++c) {
    const CellGeometry g = CellGeometry::of(pm, c);
    const double jac = std::abs(g.det);
    const Mat2 grad_h = evaluate_gradient(disc.eta_p, eta, c);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2 xi = rule.reference_point(q);
      const Vec2 x = g.map(xi);
      const double w = rule.weights[q] * jac;
      pp_l2 += w * std::pow(pp[c] - ex.p_p(t, x), 2);
      up_l2 += w * (evaluate_vector(disc.u_p, up, c, xi) - ex.u_p(t, x)).squaredNorm();
      up_div += w * std::pow(evaluate_divergence(disc.u_p, up, c, xi) - ex.div_u_p(t, x), 2);
      eta_l2 += w * (evaluate_vector(disc.eta_p, eta, c, xi) - ex.eta(t, x)).squaredNorm();
      eta_grad += w * (grad_h - ex.grad_eta(t, x)).squaredNorm();
    }
  }

  const Vector phi = state.field(L, Field::Phi);
  const Vector lam = state.field(L, Field::Lambda);
  const TraceMesh& tf = *disc.fluid_trace;
  const TraceMesh& tp = *disc.poro_trace;
  std::vector<Vec2> phi_nodes(tf.num_points()), lam_nodes(tp.num_points());
  for (int i = 0; i < tf.num_points(); ++i) phi_nodes[i] = Vec2(phi[2 * i], phi[2 * i + 1]);
  for (int i = 0; i < tp.num_points(); ++i) lam_nodes[i] = Vec2(lam[i], 0.0);
  const auto phi_sq = trace_error_sq(
      tf, phi_nodes, [&](const Vec2& x) { return ex.u_f(t, x); },
      [&](const Vec2& x, const Vec2& tan) -> Vec2 { return ex.grad_u_f(t, x) * tan; });
  const auto lam_sq = trace_error_sq(
      tp, lam_nodes, [&](const Vec2& x) { return Vec2(ex.p_p(t, x), 0.0); },
      [&](const Vec2& x, const Vec2& tan) { return Vec2(ex.grad_p_p(t, x).dot(tan), 0.0); });

  FieldErrors e{};
  e[static_cast<int>(ErrorField::Sigma)] = std::sqrt(s_l2 + std::pow(s_div, 1.5));
  e[static_cast<int>(ErrorField::Uf)] = std::pow(u_l4, 0.25);
  e[static_cast<int>(ErrorField::Gamma)] = std::sqrt(g_l2);
  e[static_cast<int>(ErrorField::Pf)] = std::sqrt(pf_l2);
  e[static_cast<int>(ErrorField::Pp)] = std::sqrt(pp_l2);
  e[static_cast<int>(ErrorField::Up)] = std::sqrt(up_l2 + up_div);
  e[static_cast<int>(ErrorField::Eta)] = std::sqrt(eta_l2 + eta_grad);
  e[static_cast<int>(ErrorField::Phi)] = half_norm(phi_sq);
  e[static_cast<int>(ErrorField::Lambda)] = half_norm(lam_sq);
  return e;
}

void ErrorAccumulator::add(const FieldErrors& e) {
  for (int f = 0; f < kNumErrorFields; ++f) {
    sum_sq_[f] += e[f] * e[f];
    max_[f] = std::max(max_[f], e[f]);
  }
  ++count_;
}

FieldErrors ErrorAccumulator::result() const {
  FieldErrors r{};
  for (int f = 0; f < kNumErrorFields; ++f) {
    r[f] = uses_max_in_time(static_cast<ErrorField>(f)) ? max_[f] : std::sqrt(dt_ * sum_sq_[f]);
  }
  return r;
}

FieldErrors compute_error_norms(const Discretization& disc, const BlockLayout& layout,
                                const std::vector<SystemState>& trajectory,
                                const ExactSolution& exact, double dt) {
  ErrorAccumulator acc(dt);
  for (const SystemState& s : trajectory) acc.add(step_errors(disc, layout, s, exact));
  return acc.result();
}

double LevelResult::h_for(ErrorField f) const {
  switch (f) {
    case ErrorField::Sigma:
    case ErrorField::Uf:
    case ErrorField::Gamma:
    case ErrorField::Pf: return h_f;
    case ErrorField::Pp:
    case ErrorField::Up:
    case ErrorField::Eta: return h_p;
    case ErrorField::Phi: return h_tf;
    case ErrorField::Lambda: return h_tp;
  }
  return h_f;
}

std::optional<double> convergence_rate(double e0, double e1, double h0, double h1) {
  if (!(e0 > 0.0) || !(e1 > 0.0) || !std::isfinite(e0) || !std::isfinite(e1)) return std::nullopt;
  if (!(h0 > 0.0) || !(h1 > 0.0) || h0 == h1) return std::nullopt;
  return std::log(e0 / e1) / std::log(h0 / h1);
}

std::vector<std::array<std::optional<double>, kNumErrorFields>> convergence_rates(
    const ErrorReport& report) {
  std::vector<std::array<std::optional<double>, kNumErrorFields>> rates;
  for (std::size_t i = 0; i + 1 < report.levels.size(); ++i) {
    const LevelResult& a = report.levels[i];
    const LevelResult& b = report.levels[i + 1];
    std::array<std::optional<double>, kNumErrorFields> r;
    for (int f = 0; f < kNumErrorFields; ++f) {
      const auto ef = static_cast<ErrorField>(f);
      r[f] = convergence_rate(a.errors[f], b.errors[f], a.h_for(ef), b.h_for(ef));
    }
    rates.push_back(r);
  }
  return rates;
}

void write_convergence_csv(const ErrorReport& report, std::ostream& out) {
  out << "level,h_f,h_p,h_tf,h_tp";
  for (int f = 0; f < kNumErrorFields; ++f) {
    const char* n = to_string(static_cast<ErrorField>(f));
    out << ",err_" << n << ",rate_" << n;
  }
  out << ",avg_newton\n";
  const auto rates = convergence_rates(report);
  out << std::setprecision(10);
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const LevelResult& l = report.levels[i];
    out << l.level << ',' << l.h_f << ',' << l.h_p << ',' << l.h_tf << ',' << l.h_tp;
    for (int f = 0; f < kNumErrorFields; ++f) {
      out << ',' << l.errors[f] << ',';
      if (i > 0 && rates[i - 1][f]) out << *rates[i - 1][f];
    }
    out << ',' << l.avg_newton << '\n';
  }
}

}  // namespace nsbiot
