#include "helpers.hpp"

#include <doctest.h>

using namespace nsbiot;
using nsbiot::testing::discretize;
using nsbiot::testing::random_vector;
using nsbiot::testing::unit_pair;

namespace {

/// Fluid at rest under a pressure P(t) = 1 + 2t shared with the pores.
/// Every field lies in its discrete space and is linear in time, so the
/// scheme must reproduce it exactly.
ProblemData resting_fluid(const ModelParams& params) {
  ProblemData d;
  d.params = params;
  auto P = [](double t) { return 1.0 + 2.0 * t; };
  const double s0 = params.s0;
  d.q_p = [s0](double, const Vec2&) { return s0 * 2.0; };
  d.fluid_stress = [P](double t, const Vec2&) { return Mat2(-P(t) * Mat2::Identity()); };
  d.poro_pressure = [P](double t, const Vec2&) { return P(t); };
  d.sigma0 = [P](const Vec2&) { return Mat2(-P(0) * Mat2::Identity()); };
  d.p_p0 = [P](const Vec2&) { return P(0); };
  d.lambda0 = [P](const Vec2&) { return P(0); };
  return d;
}

double fd_slope(const CoupledSystem& sys, const Vector& x, const Vector& dir, const History& h, double t) {
  const BlockSystem base = sys.build_residual_and_jacobian(x, h, t);
  const Vector jd = base.jacobian * dir;
  std::array<double, 2> err{};
  const std::array<double, 2> eps{1e-4, 1e-5};
  for (int k = 0; k < 2; ++k) {
    const Vector r = sys.build_residual_and_jacobian(x + eps[k] * dir, h, t, false).residual;
    err[k] = ((r - base.residual) / eps[k] - jd).norm();
  }
  return std::log(err[0] / err[1]) / std::log(eps[0] / eps[1]);
}

}  // namespace

TEST_CASE("block layout partitions the unknowns") {
  auto disc = discretize(unit_pair(2, 3, Diagonal::Left, Diagonal::Crisscross));
  const BlockLayout L = BlockLayout::of(*disc);
  int next = 0;
  for (int f = 0; f < kNumFields; ++f) {
    CHECK(L.offset[f] == next);
    next += L.size[f];
  }
  CHECK(L.total == next);
  CHECK(L.count(Field::Sigma) == disc->sigma_f.dof_count());
  CHECK(L.count(Field::Lambda) == disc->lambda.dof_count());
  CHECK(L.field_of(0) == Field::Sigma);
  CHECK(L.field_of(L.begin(Field::Pp)) == Field::Pp);
  CHECK(L.field_of(L.total - 1) == Field::Lambda);
  CHECK(std::string(to_string(Field::Eta)) == "eta_p");
}

TEST_CASE("Jacobian matches finite differences on a two-cell mesh") {
  auto disc = discretize(unit_pair(1, 1));
  const ModelParams p = ModelParams::convergence_test();
  const CoupledSystem sys(disc, make_mms_problem(example1_solution(p)), 1e-2);
  std::mt19937 rng(17);
  History h;
  h.previous.x = random_vector(sys.layout().total, rng);
  h.eta_before = random_vector(sys.layout().count(Field::Eta), rng);
  for (int trial = 0; trial < 3; ++trial) {
    const Vector x = random_vector(sys.layout().total, rng);
    const Vector d = random_vector(sys.layout().total, rng);
    CHECK(fd_slope(sys, x, d, h, 0.01) >= 0.9);
  }
}

TEST_CASE("zero data has the zero solution") {
  auto disc = discretize(unit_pair(2, 2));
  ProblemData zero;
  const CoupledSystem sys(disc, zero, 0.1);
  const SystemState s0 = sys.initial_state();
  CHECK(s0.x.norm() == 0.0);
  const History h = sys.initial_history(s0);
  const BlockSystem b = sys.build_residual_and_jacobian(s0.x, h, 0.1);
  CHECK(b.residual.norm() == 0.0);
  const SystemState end = time_loop(sys, s0, 3, NewtonConfig{});
  CHECK(end.x.norm() == 0.0);
  CHECK(end.t == doctest::Approx(0.3));
}

TEST_CASE("malformed history is rejected") {
  auto disc = discretize(unit_pair(1, 1));
  const CoupledSystem sys(disc, ProblemData{}, 0.1);
  History h;
  CHECK_THROWS_AS(sys.build_residual_and_jacobian(Vector::Zero(sys.layout().total), h, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(CoupledSystem(disc, ProblemData{}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(time_loop(sys, sys.initial_state(), 0, NewtonConfig{}), std::invalid_argument);
}

TEST_CASE("conflicting essential values are rejected") {
  auto disc = discretize(unit_pair(2, 2));
  ProblemData d;
  auto calls = std::make_shared<int>(0);
  d.displacement = [calls](double, const Vec2&) { return Vec2(static_cast<double>((*calls)++), 0.0); };
  const CoupledSystem sys(disc, d, 0.1);
  CHECK_THROWS_AS(sys.essential_values(0.0), std::runtime_error);
}

TEST_CASE("symmetric elimination") {
  auto disc = discretize(unit_pair(2, 2));
  const CoupledSystem sys(disc, make_mms_problem(example1_solution(ModelParams::convergence_test())), 0.1);
  const SystemState s0 = sys.initial_state();
  BlockSystem b = sys.build_residual_and_jacobian(s0.x, sys.initial_history(s0), 0.1);
  const auto bc = sys.essential_values(0.1);
  REQUIRE(!bc.empty());
  CHECK(std::is_sorted(bc.begin(), bc.end()));
  sys.apply_boundary_conditions(b, bc);
  std::vector<char> fixed(sys.layout().total, 0);
  for (const auto& [dof, v] : bc) fixed[dof] = 1;
  for (int k = 0; k < b.jacobian.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(b.jacobian, k); it; ++it) {
      if (fixed[it.row()] || fixed[it.col()]) CHECK(it.value() == (it.row() == it.col() ? 1.0 : 0.0));
    }
  }
  for (const auto& [dof, v] : bc) CHECK(b.residual[dof] == 0.0);
}

TEST_CASE("example 2 inlet stress dofs") {
  MeshPair m = example2_meshes(0);
  auto disc = discretize(std::move(m));
  const CoupledSystem sys(disc, example2_problem(ModelParams::air_filter()), 1.0);
  const auto bc = sys.essential_values(1.0);
  const Vector inlet = interpolate(disc->sigma_f, TensorField([](const Vec2&) {
    return Mat2(-kFilterPressureDrop * Mat2::Identity());
  }));
  const TriangleMesh& fm = *disc->fluid_mesh;
  const int stride = 2 * fm.num_edges();
  std::map<int, double> values(bc.begin(), bc.end());
  int checked = 0;
  for (int e : fm.edges_with_tag(BoundaryTag::FluidNeumann)) {
    const bool at_inlet = fm.edge_midpoint(e).x() < 1.0;
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 2; ++k) {
        const int dof = r * stride + 2 * e + k;
        REQUIRE(values.count(dof) == 1);
        CHECK(values[dof] == doctest::Approx(at_inlet ? inlet[dof] : 0.0).scale(1e-12));
        ++checked;
      }
    }
  }
  CHECK(checked == 4 * 10);
}

TEST_CASE("resting fluid is reproduced exactly") {
  auto disc = discretize(unit_pair(2, 3, Diagonal::Left, Diagonal::Crisscross));
  ModelParams p = ModelParams::convergence_test();
  p.s0 = 0.5;
  const CoupledSystem sys(disc, resting_fluid(p), 0.05);
  const BlockLayout& L = sys.layout();
  const SystemState end = time_loop(sys, sys.initial_state(), 4, NewtonConfig{});
  const double P = 1.0 + 2.0 * 0.2;
  const Vector sigma = interpolate(disc->sigma_f, TensorField([&](const Vec2&) { return Mat2(-P * Mat2::Identity()); }));
  CHECK((end.field(L, Field::Sigma) - sigma).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((end.field(L, Field::Pp).array() - P).abs().maxCoeff() < 1e-9);
  CHECK((end.field(L, Field::Lambda).array() - P).abs().maxCoeff() < 1e-9);
  for (Field f : {Field::Up, Field::Eta, Field::Uf, Field::Gamma, Field::Phi}) {
    CHECK(end.field(L, f).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  const Vector pf = recover_fluid_pressure(*disc, p, end.field(L, Field::Sigma), end.field(L, Field::Uf));
  CHECK((pf.array() - P).abs().maxCoeff() < 1e-9);
}

TEST_CASE("Newton iteration counts") {
  auto disc = discretize(unit_pair(4, 3, Diagonal::Left, Diagonal::Crisscross));
  ModelParams p = ModelParams::convergence_test();
  p.convection_on = false;
  const CoupledSystem linear(disc, make_mms_problem(example1_solution(p)), 1e-3);
  time_loop(linear, linear.initial_state(), 3, NewtonConfig{}, [](const StepRecord& r, const History&) {
    CHECK(r.newton.iterations == 1);
    CHECK(r.newton.converged);
  });
  p.convection_on = true;
  const CoupledSystem full(disc, make_mms_problem(example1_solution(p)), 1e-3);
  time_loop(full, full.initial_state(), 3, NewtonConfig{}, [](const StepRecord& r, const History&) {
    CHECK(r.newton.iterations >= 1);
    CHECK(r.newton.iterations <= 4);
  });

  NewtonConfig tight;
  tight.max_iter = 1;
  tight.abs_tol = 1e-30;
  tight.rel_tol = 1e-30;
  tight.backward_error_floor = 0.0;
  CHECK_THROWS_AS(time_loop(full, full.initial_state(), 1, tight), NewtonError);
  NewtonConfig bad;
  bad.damping = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("outflow traction: T_f n = -P n where fluid leaves, sigma_f n = -P n elsewhere") {
  auto disc = discretize(unit_pair(4, 3));
  const TriangleMesh& mesh = *disc->fluid_mesh;
  for (double push : {5.0, -5.0}) {
    CAPTURE(push);
    ProblemData d;
    d.params = ModelParams::convergence_test();
    d.f_f = [push](double, const Vec2&) { return Vec2(push, 0.0); };
    d.fluid_stress = [](double, const Vec2&) { return Mat2(-Mat2::Identity()); };
    d.traction_outflow = true;
    const double rho = d.params.rho_f;
    const CoupledSystem sys(disc, d, 0.1);
    const BlockLayout& L = sys.layout();
    int iterations = 0;
    const SystemState end = time_loop(sys, sys.initial_state(), 2, NewtonConfig{},
                                      [&](const StepRecord& r, const History&) {
                                        iterations = std::max(iterations, r.newton.iterations);
                                      });
    CHECK(iterations <= 4);

    const Vector sigma = end.field(L, Field::Sigma);
    const Vector uf = end.field(L, Field::Uf);
    int outflow = 0;
    for (int e : mesh.edges_with_tag(BoundaryTag::FluidNeumann)) {
      const int c = mesh.edge_triangles(e)[0];
      const Vec2 n(mesh.edge_midpoint(e).x() < 0.5 ? -1.0 : 1.0, 0.0);
      const Vec2 u(uf[2 * c], uf[2 * c + 1]);
      if (u.dot(n) > 1e-3) ++outflow;
      const CellGeometry g = CellGeometry::of(mesh, c);
      for (int v : mesh.edge(e)) {
        const Vec2 sn = evaluate_tensor(disc->sigma_f, sigma, c, g.pullback(mesh.vertex(v))) * n;
        const Vec2 traction = sn + rho * std::max(u.dot(n), 0.0) * u;
        CAPTURE(e);
        CHECK((traction + n).norm() < 1e-9);
      }
    }
    CHECK(outflow > 0);
  }
}

TEST_CASE("one step of time_loop equals one newton_solve") {
  auto disc = discretize(unit_pair(2, 2));
  const CoupledSystem sys(disc, make_mms_problem(example1_solution(ModelParams::convergence_test())), 1e-3);
  const SystemState s0 = sys.initial_state();
  SystemState direct;
  sys.newton_solve(sys.initial_history(s0), 1e-3, NewtonConfig{}, direct);
  const SystemState looped = time_loop(sys, s0, 1, NewtonConfig{});
  CHECK((direct.x.array() == looped.x.array()).all());
}

TEST_CASE("runs are deterministic and independent of the execution mode") {
  auto disc = discretize(unit_pair(4, 3, Diagonal::Left, Diagonal::Crisscross));
  const ProblemData d = make_mms_problem(example1_solution(ModelParams::convergence_test()));
  const CoupledSystem serial(disc, d, 1e-3, Exec::Serial);
  const CoupledSystem parallel(disc, d, 1e-3, Exec::Parallel);
  const Vector a = time_loop(serial, serial.initial_state(), 3, NewtonConfig{}).x;
  const Vector b = time_loop(serial, serial.initial_state(), 3, NewtonConfig{}).x;
  const Vector c = time_loop(parallel, parallel.initial_state(), 3, NewtonConfig{}).x;
  CHECK((a.array() == b.array()).all());
  CHECK((a.array() == c.array()).all());
}

TEST_CASE("recovered fluid pressure") {
  auto disc = discretize(unit_pair(2, 2));
  ModelParams p = ModelParams::convergence_test();
  const int nu = disc->u_f.dof_count();
  const Vector s = interpolate(disc->sigma_f, TensorField([](const Vec2&) { return Mat2(-3.0 * Mat2::Identity()); }));
  const Vector pf = recover_fluid_pressure(*disc, p, s, Vector::Zero(nu));
  CHECK((pf.array() - 3.0).abs().maxCoeff() < 1e-12);
  p.rho_f = 2.0;
  const Vector u = interpolate(disc->u_f, VectorField([](const Vec2&) { return Vec2(1, 0); }));
  const Vector pu = recover_fluid_pressure(*disc, p, Vector::Zero(disc->sigma_f.dof_count()), u);
  CHECK((pu.array() + 1.0).abs().maxCoeff() < 1e-12);
  const Vector pq = recover_fluid_pressure(*disc, p, Vector::Zero(disc->sigma_f.dof_count()), Vector::Zero(nu),
                                           [](double, const Vec2&) { return 0.5; }, 0.0);
  CHECK((pq.array() - 0.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("conservation and energy after a few steps") {
  auto disc = discretize(unit_pair(4, 3, Diagonal::Left, Diagonal::Crisscross));
  const CoupledSystem sys(disc, make_mms_problem(example1_solution(ModelParams::convergence_test())), 1e-3);
  time_loop(sys, sys.initial_state(), 3, NewtonConfig{}, [&](const StepRecord& r, const History& before) {
    const ConservationResiduals c = conservation_residuals(sys, r.state, before);
    CHECK(c.darcy_mass.size() == disc->poro_mesh->num_triangles());
    CHECK(c.fluid_momentum.size() == 2 * disc->fluid_mesh->num_triangles());
    CHECK(c.interface_mass.size() == disc->lambda.dof_count());
    CHECK(check_conservation(c, r.newton).all());
  });

  // energy of a known state: rho_f |u|^2 / 2 over the unit square
  SystemState s;
  s.x = Vector::Zero(sys.layout().total);
  s.field(sys.layout(), Field::Uf) = interpolate(disc->u_f, VectorField([](const Vec2&) { return Vec2(1, 1); }));
  CHECK(discrete_energy(sys, s, Vector::Zero(sys.layout().count(Field::Eta))) == doctest::Approx(1.0));
}
