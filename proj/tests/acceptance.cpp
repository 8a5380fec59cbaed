// Acceptance run: one PASS/FAIL line per criterion, details indented below.
#include "nsbiot/elements.hpp"
#include "nsbiot/quadrature.hpp"
#include "nsbiot/scenarios.hpp"

#include <CLI11.hpp>
#include <Eigen/SparseLU>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

using namespace nsbiot;

namespace {

int failures = 0;
ConservationSummary conservation_all;

void verdict(int id, bool ok, const std::string& what) {
  std::printf("%s  %d  %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void detail(const char* fmt, auto... args) {
  std::printf("      ");
  std::printf(fmt, args...);
  std::printf("\n");
}

void merge(ConservationSummary& into, const ConservationSummary& s) {
  into.darcy = std::max(into.darcy, s.darcy);
  into.momentum = std::max(into.momentum, s.momentum);
  into.interface = std::max(into.interface, s.interface);
  into.symmetry = std::max(into.symmetry, s.symmetry);
  into.steps += s.steps;
}

// Published coarsest-level errors and asymptotic rates.
constexpr std::array<double, kNumErrorFields> kPublishedCoarsest{0.7527, 0.6321, 0.0629, 0.1366, 0.0689,
                                                                 0.0547, 0.0001, 0.0050, 0.0046};

struct RateBand {
  double lo, hi;
};

RateBand rate_band(ErrorField f, bool finest) {
  switch (f) {
    case ErrorField::Sigma: return {finest ? 0.95 : 0.85, 1e9};  // higher pre-asymptotic rates are fine
    case ErrorField::Phi: return {1.35, 1.75};
    case ErrorField::Lambda: return {1.40, 1.60};
    default: return {0.85, 1.15};
  }
}

bool rates_ok(const ErrorReport& report, const char* label) {
  const auto rates = convergence_rates(report);
  bool ok = rates.size() >= 2;
  for (int f = 0; f < kNumErrorFields; ++f) {
    const auto field = static_cast<ErrorField>(f);
    std::string line;
    bool field_ok = true;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      char buf[32];
      if (rates[i][f]) {
        std::snprintf(buf, sizeof buf, " %.3f", *rates[i][f]);
      } else {
        std::snprintf(buf, sizeof buf, " undefined");
      }
      line += buf;
      if (i + 2 >= rates.size()) {
        const RateBand b = rate_band(field, i + 1 == rates.size());
        if (!rates[i][f] || *rates[i][f] < b.lo || *rates[i][f] > b.hi) field_ok = false;
      }
    }
    ok = ok && field_ok;
    detail("%s %-8s rates%s  %s", label, to_string(field), line.c_str(), field_ok ? "ok" : "out of band");
  }
  return ok;
}

// ||(I - P0) div u_p||, summed over the time levels: a lower bound for the H(div) error of any
// discrete Darcy velocity with piecewise constant divergence.
double darcy_divergence_bound(const TriangleMesh& mesh, const ExactSolution& ex, double dt, int steps) {
  const QuadratureRule& q = make_quadrature(6);
  double sum = 0.0;
  for (int m = 1; m <= steps; ++m) {
    const double t = m * dt;
    double err2 = 0.0;
    for (int c = 0; c < mesh.num_triangles(); ++c) {
      const CellGeometry g = CellGeometry::of(mesh, c);
      const double jac = std::abs(g.det);
      double mean = 0.0;
      for (int i = 0; i < q.size(); ++i) mean += q.weights[i] * jac * ex.div_u_p(t, g.map(q.reference_point(i)));
      mean /= mesh.area(c);
      for (int i = 0; i < q.size(); ++i) {
        const double d = ex.div_u_p(t, g.map(q.reference_point(i))) - mean;
        err2 += q.weights[i] * jac * d * d;
      }
    }
    sum += dt * err2;
  }
  return std::sqrt(sum);
}

// min over continuous P1 v of |eta(t) - v|_{H1}: a lower bound for the H1 error of any P1 displacement.
double displacement_gradient_bound(const TriangleMesh& mesh, const ExactSolution& ex, double t) {
  const QuadratureRule& q = make_quadrature(6);
  const int n = mesh.num_vertices();
  std::vector<Triplet> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
  double full = 0.0;
  for (int c = 0; c < mesh.num_triangles(); ++c) {
    const CellGeometry g = CellGeometry::of(mesh, c);
    const auto grads = p1_gradients(g);
    const auto& v = mesh.triangle(c);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trip.emplace_back(v[a], v[b], mesh.area(c) * grads[a].dot(grads[b]));
    }
    for (int i = 0; i < q.size(); ++i) {
      const double w = q.weights[i] * std::abs(g.det);
      const Mat2 G = ex.grad_eta(t, g.map(q.reference_point(i)));
      full += w * G.squaredNorm();
      for (int a = 0; a < 3; ++a) {
        for (int k = 0; k < 2; ++k) rhs(v[a], k) += w * G.row(k).dot(grads[a]);
      }
    }
  }
  trip.emplace_back(0, 0, 1e3);  // pin the constant mode
  SparseMatrix K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SparseMatrix> lu(K);
  double proj = 0.0;
  for (int k = 0; k < 2; ++k) {
    Vector b = rhs.col(k);
    const Vector c = lu.solve(b);
    // energy of the projection, without the pinning penalty
    SparseMatrix K0 = K;
    K0.coeffRef(0, 0) -= 1e3;
    proj += c.dot(K0 * c);
  }
  return std::sqrt(std::max(0.0, full - proj));
}

void criterion_1_2_3(const ScenarioConfig& base) {
  const auto t0 = std::chrono::steady_clock::now();
  const Example1Result r = run_example1(base, InterfaceGrids::NonMatching);
  merge(conservation_all, r.conservation);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail("example 1, %d levels, non-matching grids, %.1f s", base.levels, secs);
  for (const auto& l : r.report.levels) {
    detail("level %d  h_f %.4f h_p %.4f h_tf %.4f h_tp %.4f  avg Newton %.2f", l.level, l.h_f, l.h_p, l.h_tf,
           l.h_tp, l.avg_newton);
  }
  const bool rates = rates_ok(r.report, "");
  verdict(1, rates, "convergence rates over the last two level pairs (Example 1, 4 levels)");

  bool mags = true;
  const LevelResult& c = r.report.levels.front();
  for (int f = 0; f < kNumErrorFields; ++f) {
    const double ratio = c.errors[f] / kPublishedCoarsest[f];
    const bool ok = ratio >= 0.5 && ratio <= 2.0;
    mags = mags && ok;
    detail("%-8s coarsest error %.4e  published %.4e  ratio %.2f  %s", to_string(static_cast<ErrorField>(f)),
           c.errors[f], kPublishedCoarsest[f], ratio, ok ? "ok" : "outside factor 2");
  }
  const ExactSolution ex = example1_solution(ModelParams::convergence_test());
  const MeshPair m0 = example1_meshes(0);
  const double up_bound = darcy_divergence_bound(m0.poro, ex, base.dt, base.steps());
  const double eta_bound = displacement_gradient_bound(m0.poro, ex, base.t_final);
  detail("lower bound for u_p on the coarsest grid (P0 projection of div u_p): %.4e", up_bound);
  detail("lower bound for eta_p on the coarsest grid (H1 best approximation at T): %.4e", eta_bound);
  verdict(2, mags, "coarsest-level errors within a factor of 2 of the published values");

  double worst_avg = 0.0;
  for (const auto& l : r.report.levels) worst_avg = std::max(worst_avg, l.avg_newton);
  ScenarioConfig lin = base;
  lin.convection_on = false;
  const Example1Result rl = run_example1(lin, InterfaceGrids::NonMatching);
  merge(conservation_all, rl.conservation);
  bool one = rl.max_newton == 1;
  for (const auto& l : rl.report.levels) one = one && l.avg_newton == 1.0;
  detail("with convection: worst level average %.2f iterations per step, max %d", worst_avg, r.max_newton);
  detail("without convection: max %d iteration(s) per step", rl.max_newton);
  verdict(3, worst_avg <= 4.0 && one, "Newton: average <= 4 per step, exactly 1 without convection");
}

void criterion_4() {
  MeshPair m = example1_meshes(0);
  m.fluid = build_rectangle_mesh({0, 1, 0, 1}, 1, 1, Diagonal::Left, Subdomain::Fluid);
  m.poro = build_rectangle_mesh({0, 1, -1, 0}, 1, 1, Diagonal::Left, Subdomain::Poroelastic);
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  m.fluid = tag_boundaries(std::move(m.fluid), {
      {[&](const Vec2& x) { return near(x.y(), 1.0); }, BoundaryTag::FluidDirichlet},
      {[&](const Vec2& x) { return near(x.x(), 0.0) || near(x.x(), 1.0); }, BoundaryTag::FluidNeumann},
      {[&](const Vec2& x) { return near(x.y(), 0.0); }, BoundaryTag::Interface},
  });
  m.poro = tag_boundaries(std::move(m.poro), {
      {[&](const Vec2& x) { return near(x.y(), -1.0); }, BoundaryTag::PoroDirichlet},
      {[&](const Vec2& x) { return near(x.x(), 0.0) || near(x.x(), 1.0); }, BoundaryTag::PoroNeumann},
      {[&](const Vec2& x) { return near(x.y(), 0.0); }, BoundaryTag::Interface},
  });
  auto disc = std::make_shared<const Discretization>(Discretization::build(std::move(m.fluid), std::move(m.poro)));
  ModelParams p = ModelParams::convergence_test();
  p.K << 1.3, 0.2, 0.2, 0.7;
  const CoupledSystem sys(disc, make_mms_problem(example1_solution(p)), 1e-2);
  const int n = sys.layout().total;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd = [&](int k) {
    Vector v(k);
    for (int i = 0; i < k; ++i) v[i] = u(rng);
    return v;
  };
  History h;
  h.previous.x = rnd(n);
  h.eta_before = rnd(sys.layout().count(Field::Eta));
  double worst = 1e9;
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = rnd(n), d = rnd(n);
    const BlockSystem b = sys.build_residual_and_jacobian(x, h, 0.01);
    const Vector jd = b.jacobian * d;
    double e[2];
    const double eps[2] = {1e-4, 1e-5};
    for (int k = 0; k < 2; ++k) {
      const Vector r = sys.build_residual_and_jacobian(x + eps[k] * d, h, 0.01, false).residual;
      e[k] = ((r - b.residual) / eps[k] - jd).norm();
    }
    const double slope = std::log10(e[0] / e[1]);
    worst = std::min(worst, slope);
    detail("trial %d: error %.3e at 1e-4, %.3e at 1e-5, slope %.3f", trial, e[0], e[1], slope);
  }
  verdict(4, worst >= 0.9, "Jacobian finite-difference slope >= 0.9 on a 2-cell-per-subdomain mesh");
}

void criterion_6() {
  MeshPair m = example1_meshes(1);
  auto disc = std::make_shared<const Discretization>(Discretization::build(std::move(m.fluid), std::move(m.poro)));
  ProblemData data;
  data.params = ModelParams::convergence_test();
  data.params.convection_on = false;
  const CoupledSystem sys(disc, data, 1e-2);
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SystemState s0;
  s0.x = Vector::Zero(sys.layout().total);
  for (int i = 0; i < s0.x.size(); ++i) s0.x[i] = u(rng);
  for (const auto& [dof, v] : sys.essential_values(0.0)) s0.x[dof] = v;
  const int steps = 60;
  std::vector<double> energy{discrete_energy(sys, s0, s0.field(sys.layout(), Field::Eta))};
  time_loop(sys, s0, steps, NewtonConfig{}, [&](const StepRecord& r, const History& before) {
    energy.push_back(discrete_energy(sys, r.state, before.previous.field(sys.layout(), Field::Eta)));
    conservation_all.add(conservation_residuals(sys, r.state, before), r.newton);
  });
  bool ok = true;
  double worst_increase = -1e300;
  for (std::size_t m = 1; m < energy.size(); ++m) {
    const double inc = energy[m] - energy[m - 1];
    worst_increase = std::max(worst_increase, inc / energy[m - 1]);
    if (inc > 1e-12 * energy[m - 1]) ok = false;
  }
  detail("E^0 %.6e, E^%d %.6e, largest relative change %.3e", energy.front(), steps, energy.back(), worst_increase);
  verdict(6, ok, "discrete energy non-increasing over 60 Stokes-Biot steps from random data");
}

void criterion_7(const ScenarioConfig& base) {
  double worst = 0.0;
  for (int level = 0; level < 3; ++level) {
    MeshPair m = example1_meshes(level, InterfaceGrids::Matching);
    auto disc = std::make_shared<const Discretization>(Discretization::build(std::move(m.fluid), std::move(m.poro)));
    const auto direct = matching_interface_segments(*disc->fluid_mesh, *disc->poro_mesh, *disc->fluid_trace,
                                                    *disc->poro_trace);
    ModelParams p = ModelParams::convergence_test();
    p.K << 1.5, 0.3, 0.3, 0.8;
    const InterfaceOperators a = assemble_interface_forms(p, *disc, disc->segments);
    const InterfaceOperators b = assemble_interface_forms(p, *disc, direct);
    for (auto [x, y] : {std::pair{&a.B_nf, &b.B_nf}, {&a.B_np, &b.B_np}, {&a.C_eta_eta, &b.C_eta_eta},
                        {&a.C_eta_phi, &b.C_eta_phi}, {&a.C_phi_eta, &b.C_phi_eta}, {&a.C_phi_phi, &b.C_phi_phi},
                        {&a.G_eta, &b.G_eta}, {&a.G_phi, &b.G_phi}}) {
      const SparseMatrix d = *x - *y;
      for (int k = 0; k < d.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
      }
    }
  }
  detail("matching grids, levels 0-2: max |merged - direct| = %.3e", worst);
  const Example1Result r = run_example1(base, InterfaceGrids::Nested);
  merge(conservation_all, r.conservation);
  const bool rates = rates_ok(r.report, "nested");
  verdict(7, worst <= 1e-12 && rates, "merged == direct assembly to 1e-12; nested-grid rates within criterion 1");
}

void criterion_8(int refinement, const std::string& out_dir) {
  ScenarioConfig c = ScenarioConfig::example2();
  c.refinement = refinement;
  c.output_dir = out_dir;
  std::filesystem::create_directories(out_dir);
  Example2Result r;
  bool finished = true;
  std::cout.flush();
  try {
    r = run_example2(c, true, &std::cout);  // snapshot lines as the run goes
  } catch (const std::exception& e) {
    finished = false;
    std::cout.flush();
    detail("run aborted: %s", e.what());
  }
  merge(conservation_all, r.conservation);
  bool gap = false;
  if (finished && !r.snapshots.empty()) {
    for (const auto& s : r.snapshots) {
      if (!s.in_band) detail("t = %5.0f out of band", s.t);
    }
    gap = r.snapshots.back().peak_in_gap && r.snapshots.back().t == c.t_final;
    detail("%d steps, %d Newton iterations (max %d), %.0f s", r.steps, r.total_newton, r.max_newton, r.seconds);
  }
  const bool ok = finished && r.steps == 400 && r.band_ok() && gap && r.seconds <= 3600.0;
  verdict(8, ok, "Example 2: 400 steps, pressures in band, velocity peak in the gap at t = 400, <= 1 h");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int refinement = 2;
  bool skip_filter = false;
  std::string out_dir = "acceptance_filter";
  app.add_option("--filter-refinement", refinement, "Example 2 cell size 0.05 / 2^N");
  app.add_option("--filter-out", out_dir, "Example 2 snapshot directory");
  app.add_flag("--skip-filter", skip_filter, "leave out the Example 2 run (criterion 8 reported as FAIL)");
  CLI11_PARSE(app, argc, argv);

  const ScenarioConfig base = ScenarioConfig::example1();
  try {
    criterion_1_2_3(base);
    criterion_4();
    criterion_6();
    criterion_7(base);
    if (!skip_filter) criterion_8(refinement, out_dir);
  } catch (const std::exception& e) {
    std::printf("error: %s\n", e.what());
    return 1;
  }
  detail("worst defect / tolerance over %d steps: darcy %.3g, momentum %.3g, interface %.3g, symmetry %.3g",
         conservation_all.steps, conservation_all.darcy, conservation_all.momentum, conservation_all.interface,
         conservation_all.symmetry);
  verdict(5, conservation_all.worst() <= 10.0, "conservation residuals <= 10x Newton tolerance at every step");
  if (skip_filter) verdict(8, false, "Example 2 skipped");
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
