#include "nsbiot/scenarios.hpp"

#include "nsbiot/elements.hpp"
#include "nsbiot/vtk.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace nsbiot {

namespace {

constexpr double kTagTol = 1e-9;

bool near(double a, double b) { return std::abs(a - b) < kTagTol; }

TriangleMesh tag_example1_fluid(TriangleMesh m) {
  return tag_boundaries(std::move(m), {
      {[](const Vec2& x) { return near(x.y(), 1.0); }, BoundaryTag::FluidDirichlet},
      {[](const Vec2& x) { return near(x.x(), 0.0) || near(x.x(), 1.0); }, BoundaryTag::FluidNeumann},
      {[](const Vec2& x) { return near(x.y(), 0.0); }, BoundaryTag::Interface},
  });
}

TriangleMesh tag_example1_poro(TriangleMesh m) {
  return tag_boundaries(std::move(m), {
      {[](const Vec2& x) { return near(x.y(), -1.0); }, BoundaryTag::PoroDirichlet},
      {[](const Vec2& x) { return near(x.x(), 0.0) || near(x.x(), 1.0); }, BoundaryTag::PoroNeumann},
      {[](const Vec2& x) { return near(x.y(), 0.0); }, BoundaryTag::Interface},
  });
}

TriangleMesh refine_times(TriangleMesh m, int n) {
  for (int i = 0; i < n; ++i) m = refine_uniform(m);
  return m;
}

}  // namespace

MeshPair example1_meshes(int level, InterfaceGrids grids) {
  if (level < 0) throw std::invalid_argument("level must be >= 0");
  const Rectangle top{0.0, 1.0, 0.0, 1.0};
  const Rectangle bottom{0.0, 1.0, -1.0, 0.0};
  TriangleMesh fluid = build_rectangle_mesh(top, 4, 4, Diagonal::Left, Subdomain::Fluid);
  TriangleMesh poro;
  switch (grids) {
    case InterfaceGrids::NonMatching:
      poro = build_rectangle_mesh(bottom, 3, 3, Diagonal::Crisscross, Subdomain::Poroelastic);
      break;
    case InterfaceGrids::Nested:
      poro = build_rectangle_mesh(bottom, 8, 8, Diagonal::Left, Subdomain::Poroelastic);
      break;
    case InterfaceGrids::Matching:
      poro = build_rectangle_mesh(bottom, 4, 4, Diagonal::Left, Subdomain::Poroelastic);
      break;
  }
  return {refine_times(tag_example1_fluid(std::move(fluid)), level),
          refine_times(tag_example1_poro(std::move(poro)), level)};
}

void ConservationSummary::add(const ConservationResiduals& r, const NewtonReport& n) {
  auto ratio = [&](double v, Field f) { return v / n.tolerance[static_cast<int>(f)]; };
  darcy = std::max(darcy, ratio(r.max_darcy(), Field::Pp));
  momentum = std::max(momentum, ratio(r.max_momentum(), Field::Uf));
  interface = std::max(interface, ratio(r.max_interface(), Field::Lambda));
  symmetry = std::max(symmetry, ratio(r.max_symmetry(), Field::Gamma));
  ++steps;
}

double ConservationSummary::worst() const { return std::max({darcy, momentum, interface, symmetry}); }

Example1Result run_example1(const ScenarioConfig& cfg, InterfaceGrids grids, std::ostream* log) {
  cfg.validate();
  const ModelParams params =
      cfg.scenario == ScenarioKind::Custom ? cfg.effective_params() : [&] {
        ModelParams p = ModelParams::convergence_test();
        p.convection_on = cfg.convection_on;
        return p;
      }();
  const ExactSolution exact = example1_solution(params);
  const ProblemData problem = make_mms_problem(exact);
  const Exec exec = cfg.parallel ? Exec::Parallel : Exec::Serial;
  const int steps = cfg.steps();

  Example1Result out;
  for (int level = 0; level < cfg.levels; ++level) {
    MeshPair meshes = example1_meshes(level, grids);
    auto disc = std::make_shared<const Discretization>(
        Discretization::build(std::move(meshes.fluid), std::move(meshes.poro)));
    CoupledSystem system(disc, problem, cfg.dt, exec);
    ErrorAccumulator acc(cfg.dt);
    int newton_total = 0;
    const SystemState initial = system.initial_state();
    try {
      time_loop(system, initial, steps, cfg.newton, [&](const StepRecord& rec, const History& before) {
        acc.add(step_errors(*disc, system.layout(), rec.state, exact));
        out.conservation.add(conservation_residuals(system, rec.state, before), rec.newton);
        newton_total += rec.newton.iterations;
        out.max_newton = std::max(out.max_newton, rec.newton.iterations);
      });
    } catch (const NewtonError& e) {
      throw NewtonError("level " + std::to_string(level) + ", " + e.what(), e.report());
    }
    LevelResult lr;
    lr.level = level;
    lr.h_f = disc->fluid_mesh->max_diameter();
    lr.h_p = disc->poro_mesh->max_diameter();
    lr.h_tf = disc->fluid_trace->max_segment_length();
    lr.h_tp = disc->poro_trace->max_segment_length();
    lr.errors = acc.result();
    lr.avg_newton = static_cast<double>(newton_total) / steps;
    out.report.levels.push_back(lr);
    if (log) {
      *log << "level " << level << ": h_f " << lr.h_f << ", h_p " << lr.h_p << ", "
           << system.layout().total << " unknowns, avg Newton " << lr.avg_newton << '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

const Rectangle kChannel{0.0, 2.5, 0.0, 0.25};
const Rectangle kFilter{1.15, 1.35, 0.0, 0.2};

}  // namespace

bool in_filter_gap(const Vec2& x) {
  return x.x() >= kFilter.x0 && x.x() <= kFilter.x1 && x.y() >= kFilter.y1 && x.y() <= kChannel.y1;
}

MeshPair example2_meshes(int refinement) {
  if (refinement < 0) throw std::invalid_argument("refinement must be >= 0");
  const int scale = 1 << refinement;
  // cells of 0.05 / 2^k: 50 x 5 in the channel, 4 x 4 in the filter at k = 0
  TriangleMesh fluid = build_rectangle_mesh(kChannel, 50 * scale, 5 * scale, Diagonal::Left,
                                            Subdomain::Fluid, {kFilter});
  TriangleMesh poro = build_rectangle_mesh(kFilter, 4 * scale, 4 * scale, Diagonal::Left,
                                           Subdomain::Poroelastic);
  auto on_filter_bottom = [](const Vec2& x) { return x.x() > kFilter.x0 && x.x() < kFilter.x1; };
  fluid = tag_boundaries(std::move(fluid), {
      {[](const Vec2& x) { return near(x.x(), kChannel.x0) || near(x.x(), kChannel.x1); },
       BoundaryTag::FluidNeumann},
      {[&](const Vec2& x) { return near(x.y(), kChannel.y1) || (near(x.y(), 0.0) && !on_filter_bottom(x)); },
       BoundaryTag::FluidDirichlet},
      {[](const Vec2& x) {
         return !near(x.y(), 0.0) && !near(x.y(), kChannel.y1) && !near(x.x(), kChannel.x0) &&
                !near(x.x(), kChannel.x1);
       },
       BoundaryTag::Interface},
  });
  poro = tag_boundaries(std::move(poro), {
      {[](const Vec2& x) { return near(x.y(), 0.0); }, BoundaryTag::PoroNeumann},
      {[](const Vec2& x) { return !near(x.y(), 0.0); }, BoundaryTag::Interface},
  });
  return {std::move(fluid), std::move(poro)};
}

ProblemData example2_problem(const ModelParams& params) {
  ProblemData d;
  d.params = params;
  // -p n on the inlet and outlet, relative to p_ref; T_f n where fluid leaves
  d.traction_outflow = true;
  d.fluid_stress = [](double, const Vec2& x) -> Mat2 {
    return x.x() < 0.5 * kChannel.x1 ? Mat2(-kFilterPressureDrop * Mat2::Identity()) : Mat2(Mat2::Zero());
  };
  return d;
}

bool Example2Result::band_ok() const {
  for (const auto& s : snapshots) {
    if (!s.in_band) return false;
  }
  return !snapshots.empty();
}

void write_fields(const CoupledSystem& system, const SystemState& state, const std::string& prefix,
                  double pressure_shift) {
  const Discretization& d = system.discretization();
  const BlockLayout& L = system.layout();
  const Vec2 mid(1.0 / 3.0, 1.0 / 3.0);

  const Vector sigma = state.field(L, Field::Sigma);
  const Vector uf = state.field(L, Field::Uf);
  const Vector gamma = state.field(L, Field::Gamma);
  const Vector pf = recover_fluid_pressure(d, system.problem().params, sigma, uf, system.problem().q_f, state.t);
  const TriangleMesh& fm = *d.fluid_mesh;
  VtkDataset f = VtkDataset::from_mesh(fm);
  std::vector<Vec2> u(fm.num_triangles()), row0(fm.num_triangles()), row1(fm.num_triangles());
  std::vector<double> p(fm.num_triangles()), g(fm.num_triangles());
  for (int c = 0; c < fm.num_triangles(); ++c) {
    u[c] = Vec2(uf[2 * c], uf[2 * c + 1]);
    const Mat2 s = evaluate_tensor(d.sigma_f, sigma, c, mid) - pressure_shift * Mat2::Identity();
    row0[c] = s.row(0).transpose();
    row1[c] = s.row(1).transpose();
    p[c] = pf[c] + pressure_shift;
    g[c] = gamma[c];
  }
  f.add_cell_vector("u_f", u);
  f.add_cell_scalar("p_f", p);
  f.add_cell_scalar("gamma_f", g);
  f.add_cell_vector("sigma_f_row0", row0);
  f.add_cell_vector("sigma_f_row1", row1);
  write_vtk(f, prefix + "_fluid.vtk", "fluid t=" + std::to_string(state.t));

  const TriangleMesh& pm = *d.poro_mesh;
  const Vector eta = state.field(L, Field::Eta);
  const Vector up = state.field(L, Field::Up);
  const Vector pp = state.field(L, Field::Pp);
  VtkDataset q = VtkDataset::from_mesh(pm);
  std::vector<Vec2> e(pm.num_vertices()), v(pm.num_triangles());
  std::vector<double> pv(pm.num_triangles());
  for (int i = 0; i < pm.num_vertices(); ++i) e[i] = Vec2(eta[2 * i], eta[2 * i + 1]);
  for (int c = 0; c < pm.num_triangles(); ++c) {
    v[c] = evaluate_vector(d.u_p, up, c, mid);
    pv[c] = pp[c] + pressure_shift;
  }
  q.add_point_vector("eta_p", e);
  q.add_cell_vector("u_p", v);
  q.add_cell_scalar("p_p", pv);
  write_vtk(q, prefix + "_poro.vtk", "poroelastic t=" + std::to_string(state.t));
}

Example2Result run_example2(const ScenarioConfig& cfg, bool write_files, std::ostream* log) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  MeshPair meshes = example2_meshes(cfg.refinement);
  auto disc = std::make_shared<const Discretization>(
      Discretization::build(std::move(meshes.fluid), std::move(meshes.poro)));
  CoupledSystem system(disc, example2_problem(cfg.effective_params()), cfg.dt,
                       cfg.parallel ? Exec::Parallel : Exec::Serial);
  if (write_files) std::filesystem::create_directories(cfg.output_dir);
  if (log) {
    *log << "filter: h_f " << disc->fluid_mesh->max_diameter() << ", " << system.layout().total
         << " unknowns, " << cfg.steps() << " steps\n";
  }

  const double lo = kFilterReferencePressure - 10.0 * kFilterPressureDrop;
  const double hi = kFilterReferencePressure + kFilterPressureDrop + 10.0 * kFilterPressureDrop;
  const int steps = cfg.steps();
  Example2Result out;
  const BlockLayout& L = system.layout();

  time_loop(system, system.initial_state(), steps, cfg.newton, [&](const StepRecord& rec, const History& before) {
    out.steps = rec.step;
    out.total_newton += rec.newton.iterations;
    out.max_newton = std::max(out.max_newton, rec.newton.iterations);
    out.conservation.add(conservation_residuals(system, rec.state, before), rec.newton);
    if (rec.step % cfg.cadence != 0 && rec.step != steps) return;

    FilterSnapshot s;
    s.step = rec.step;
    s.t = rec.state.t;
    const Vector uf = rec.state.field(L, Field::Uf);
    const Vector pf = recover_fluid_pressure(*disc, system.problem().params, rec.state.field(L, Field::Sigma),
                                             uf, nullptr, rec.state.t);
    const Vector pp = rec.state.field(L, Field::Pp);
    s.p_f_min = pf.minCoeff() + kFilterReferencePressure;
    s.p_f_max = pf.maxCoeff() + kFilterReferencePressure;
    s.p_p_min = pp.minCoeff() + kFilterReferencePressure;
    s.p_p_max = pp.maxCoeff() + kFilterReferencePressure;
    int peak = 0;
    for (int c = 0; c < disc->fluid_mesh->num_triangles(); ++c) {
      const double speed = std::hypot(uf[2 * c], uf[2 * c + 1]);
      if (speed > s.peak_speed) {
        s.peak_speed = speed;
        peak = c;
      }
    }
    s.peak_location = disc->fluid_mesh->centroid(peak);
    s.peak_in_gap = in_filter_gap(s.peak_location);
    s.in_band = s.p_f_min >= lo && s.p_f_max <= hi && s.p_p_min >= lo && s.p_p_max <= hi;
    if (write_files) {
      std::ostringstream name;
      name << cfg.output_dir << "/filter_" << std::setw(5) << std::setfill('0') << rec.step;
      write_fields(system, rec.state, name.str(), kFilterReferencePressure);
      s.fluid_file = name.str() + "_fluid.vtk";
      s.poro_file = name.str() + "_poro.vtk";
    }
    if (log) {
      *log << std::setprecision(9) << "t = " << s.t << "  p_f in [" << s.p_f_min << ", " << s.p_f_max
           << "]  p_p in [" << s.p_p_min << ", " << s.p_p_max << "]  max|u_f| = " << s.peak_speed
           << " at (" << s.peak_location.x() << ", " << s.peak_location.y() << ")  Newton "
           << rec.newton.iterations << '\n';
    }
    out.snapshots.push_back(s);
  });
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace nsbiot
