#pragma once

#include "nsbiot/config.hpp"
#include "nsbiot/diagnostics.hpp"
#include "nsbiot/mms.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nsbiot {

enum class InterfaceGrids {
  NonMatching,  // fluid 4x4 left diagonals, poroelastic 3x3 crisscross
  Nested,       // poroelastic grid at half the fluid mesh size
  Matching,     // same 4x4 grid on both sides
};

struct MeshPair {
  TriangleMesh fluid;
  TriangleMesh poro;
};

/// Unit squares above and below y = 0, refined `level` times.
MeshPair example1_meshes(int level, InterfaceGrids grids = InterfaceGrids::NonMatching);

/// Worst ratio of each local defect to the block tolerance Newton used, over
/// all steps seen.
struct ConservationSummary {
  double darcy = 0.0, momentum = 0.0, interface = 0.0, symmetry = 0.0;
  int steps = 0;

  void add(const ConservationResiduals& r, const NewtonReport& n);
  double worst() const;
};

struct Example1Result {
  ErrorReport report;
  ConservationSummary conservation;
  int max_newton = 0;
};

/// Manufactured-solution study over cfg.levels refinements. `custom` uses the
/// coefficients of cfg, `example1` the unit ones. Progress goes to `log`.
Example1Result run_example1(const ScenarioConfig& cfg, InterfaceGrids grids, std::ostream* log = nullptr);

// Air filter ---------------------------------------------------------------

constexpr double kFilterReferencePressure = 100.0;  // kPa
constexpr double kFilterPressureDrop = 2e-6;         // kPa

/// Channel (0,2.5)x(0,0.25) without the filter (1.15,1.35)x(0,0.2), and the
/// filter itself, both with cells of size 0.05 / 2^refinement.
MeshPair example2_meshes(int refinement);

/// Unknowns are stored relative to the reference pressure: p - p_ref,
/// sigma + p_ref I, lambda - p_ref. All initial data vanish in these variables.
ProblemData example2_problem(const ModelParams& params);

struct FilterSnapshot {
  int step = 0;
  double t = 0.0;
  double p_f_min = 0.0, p_f_max = 0.0;  // absolute, kPa
  double p_p_min = 0.0, p_p_max = 0.0;
  double peak_speed = 0.0;
  Vec2 peak_location = Vec2::Zero();
  bool in_band = false;
  bool peak_in_gap = false;
  std::string fluid_file, poro_file;
};

struct Example2Result {
  std::vector<FilterSnapshot> snapshots;
  int steps = 0;
  int total_newton = 0;
  int max_newton = 0;
  ConservationSummary conservation;
  double seconds = 0.0;
  bool band_ok() const;
};

/// True when x lies in the open channel above the filter.
bool in_filter_gap(const Vec2& x);

/// Runs the filter flow. Snapshots every cfg.cadence steps and at the last
/// step; VTK files go to cfg.output_dir unless `write_files` is false.
Example2Result run_example2(const ScenarioConfig& cfg, bool write_files = true, std::ostream* log = nullptr);

/// One legacy-VTK file per subdomain: <prefix>_fluid.vtk and <prefix>_poro.vtk.
/// `pressure_shift` is added to every pressure written.
void write_fields(const CoupledSystem& system, const SystemState& state, const std::string& prefix,
                  double pressure_shift = 0.0);

}  // namespace nsbiot
