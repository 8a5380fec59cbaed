// Serial reference vs OpenMP assembly of the cell kernels.
#include "nsbiot/scenarios.hpp"

#include <benchmark/benchmark.h>

using namespace nsbiot;

namespace {

std::shared_ptr<const Discretization> level(int refine) {
  MeshPair m = example1_meshes(refine);
  return std::make_shared<const Discretization>(Discretization::build(std::move(m.fluid), std::move(m.poro)));
}

Exec mode(const benchmark::State& state) { return state.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_SubdomainForms(benchmark::State& state) {
  const auto disc = level(static_cast<int>(state.range(0)));
  const ModelParams p = ModelParams::convergence_test();
  for (auto _ : state) benchmark::DoNotOptimize(assemble_subdomain_forms(p, *disc, mode(state)));
  state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_Convective(benchmark::State& state) {
  const auto disc = level(static_cast<int>(state.range(0)));
  const ModelParams p = ModelParams::convergence_test();
  const Vector w = Vector::Ones(disc->u_f.dof_count());
  for (auto _ : state) benchmark::DoNotOptimize(assemble_convective(p, *disc, w, mode(state)));
  state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_Load(benchmark::State& state) {
  const auto disc = level(static_cast<int>(state.range(0)));
  const ProblemData d = make_mms_problem(example1_solution(ModelParams::convergence_test()));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_load(d, *disc, 0.005, mode(state)));
  state.SetLabel(state.range(1) ? "parallel" : "serial");
}

void BM_Residual(benchmark::State& state) {
  const auto disc = level(static_cast<int>(state.range(0)));
  const CoupledSystem sys(disc, make_mms_problem(example1_solution(ModelParams::convergence_test())), 1e-3,
                          mode(state));
  const SystemState s0 = sys.initial_state();
  const History h = sys.initial_history(s0);
  for (auto _ : state) benchmark::DoNotOptimize(sys.build_residual_and_jacobian(s0.x, h, 1e-3));
  state.SetLabel(state.range(1) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_SubdomainForms)->ArgsProduct({{2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Convective)->ArgsProduct({{2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Load)->ArgsProduct({{2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Residual)->ArgsProduct({{2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
