// Command-line driver: convergence study, air filter, config-file runs.
#include "nsbiot/scenarios.hpp"
#include "nsbiot/vtk.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

using namespace nsbiot;

namespace {

struct Overrides {
  std::optional<int> levels;
  std::optional<double> dt;
  std::optional<double> t_final;
  bool no_convection = false;
  std::optional<std::string> out;
  std::optional<int> cadence;
  std::optional<double> newton_tol;
  bool serial = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--dt", o.dt, "time step [s]");
  cmd->add_option("--t-final", o.t_final, "final time [s]");
  cmd->add_flag("--no-convection", o.no_convection, "drop the convective terms (Stokes-Biot)");
  cmd->add_option("--newton-tol", o.newton_tol, "absolute Newton tolerance");
  cmd->add_flag("--serial", o.serial, "serial assembly");
  cmd->add_flag("-q,--quiet", o.quiet, "no progress output");
}

void apply(const Overrides& o, ScenarioConfig& cfg) {
  if (o.levels) cfg.levels = *o.levels;
  if (o.dt) cfg.dt = *o.dt;
  if (o.t_final) cfg.t_final = *o.t_final;
  if (o.no_convection) cfg.convection_on = false;
  if (o.out) cfg.output_dir = *o.out;
  if (o.cadence) cfg.cadence = *o.cadence;
  if (o.newton_tol) cfg.newton.abs_tol = *o.newton_tol;
  if (o.serial) cfg.parallel = false;
  cfg.validate();
  cfg.newton.validate();
}

void print_table(const ErrorReport& report) {
  const auto rates = convergence_rates(report);
  std::cout << "level    h_f      h_p   ";
  for (int f = 0; f < kNumErrorFields; ++f) {
    std::cout << ' ' << std::setw(10) << to_string(static_cast<ErrorField>(f)) << "  rate ";
  }
  std::cout << " newton\n";
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const LevelResult& l = report.levels[i];
    std::cout << std::setw(5) << l.level << ' ' << std::fixed << std::setprecision(4) << std::setw(8)
              << l.h_f << ' ' << std::setw(8) << l.h_p << ' ';
    for (int f = 0; f < kNumErrorFields; ++f) {
      std::cout << ' ' << std::scientific << std::setprecision(3) << std::setw(10) << l.errors[f] << ' ';
      if (i > 0 && rates[i - 1][f]) {
        std::cout << std::fixed << std::setprecision(3) << std::setw(5) << *rates[i - 1][f];
      } else {
        std::cout << "    -";
      }
    }
    std::cout << ' ' << std::fixed << std::setprecision(2) << l.avg_newton << '\n';
  }
  std::cout << std::defaultfloat;
}

int run_converge(ScenarioConfig cfg, InterfaceGrids grids, const std::optional<std::string>& csv,
                 bool quiet) {
  const Example1Result r = run_example1(cfg, grids, quiet ? nullptr : &std::cerr);
  print_table(r.report);
  std::cout << "conservation (defect / tolerance): darcy " << r.conservation.darcy << ", momentum "
            << r.conservation.momentum << ", interface " << r.conservation.interface
            << ", symmetry " << r.conservation.symmetry << '\n';
  if (csv) {
    const auto parent = std::filesystem::path(*csv).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(*csv);
    if (!out) throw IoError("cannot write " + *csv);
    write_convergence_csv(r.report, out);
  }
  return 0;
}

int run_filter(const ScenarioConfig& cfg, bool write_files, bool quiet) {
  const Example2Result r = run_example2(cfg, write_files, quiet ? nullptr : &std::cerr);
  for (const auto& s : r.snapshots) {
    std::cout << "t = " << s.t << ": p_f [" << std::setprecision(10) << s.p_f_min << ", " << s.p_f_max
              << "], p_p [" << s.p_p_min << ", " << s.p_p_max << "], max |u_f| " << std::setprecision(4)
              << s.peak_speed << " at (" << s.peak_location.x() << ", " << s.peak_location.y() << ")"
              << (s.peak_in_gap ? " in gap" : "") << (s.in_band ? "" : " OUT OF BAND") << '\n';
  }
  std::cout << r.steps << " steps, " << r.total_newton << " Newton iterations (max " << r.max_newton
            << "), " << r.seconds << " s\n";
  return r.band_ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navier-Stokes / Biot mixed finite element solver"};
  app.require_subcommand(1);

  Overrides conv_o;
  std::optional<std::string> csv;
  std::string grids_name = "nonmatching";
  auto* conv = app.add_subcommand("converge", "manufactured-solution convergence study");
  conv->add_option("--levels", conv_o.levels, "refinement levels")->check(CLI::PositiveNumber);
  conv->add_option("--out", csv, "write the convergence table as CSV");
  conv->add_option("--grids", grids_name, "interface grids")
      ->check(CLI::IsMember({"nonmatching", "nested", "matching"}));
  add_common(conv, conv_o);

  Overrides filt_o;
  int refinement = -1;
  bool no_files = false;
  auto* filt = app.add_subcommand("filter", "air flow through a poroelastic filter");
  filt->add_option("--out", filt_o.out, "directory for VTK snapshots");
  filt->add_option("--cadence", filt_o.cadence, "snapshot every N steps")->check(CLI::PositiveNumber);
  filt->add_option("--refinement", refinement, "cell size 0.05 / 2^N")->check(CLI::NonNegativeNumber);
  filt->add_flag("--no-files", no_files, "skip VTK output");
  add_common(filt, filt_o);

  Overrides run_o;
  std::string config_path;
  auto* run = app.add_subcommand("run", "run a key = value config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--levels", run_o.levels, "refinement levels")->check(CLI::PositiveNumber);
  run->add_option("--out", run_o.out, "output directory");
  run->add_option("--cadence", run_o.cadence, "snapshot every N steps")->check(CLI::PositiveNumber);
  add_common(run, run_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*conv) {
      ScenarioConfig cfg = ScenarioConfig::example1();
      apply(conv_o, cfg);
      const InterfaceGrids g = grids_name == "nested"     ? InterfaceGrids::Nested
                               : grids_name == "matching" ? InterfaceGrids::Matching
                                                          : InterfaceGrids::NonMatching;
      return run_converge(cfg, g, csv, conv_o.quiet);
    }
    if (*filt) {
      ScenarioConfig cfg = ScenarioConfig::example2();
      if (refinement >= 0) cfg.refinement = refinement;
      apply(filt_o, cfg);
      return run_filter(cfg, !no_files, filt_o.quiet);
    }
    if (!std::filesystem::exists(config_path)) {
      std::cerr << "error: config file not found: " << config_path << '\n';
      return 1;
    }
    ScenarioConfig cfg = load_config(config_path);
    apply(run_o, cfg);
    if (cfg.scenario == ScenarioKind::Example2) return run_filter(cfg, true, run_o.quiet);
    const InterfaceGrids g = cfg.nested ? InterfaceGrids::Nested : InterfaceGrids::NonMatching;
    return run_converge(cfg, g, run_o.out ? std::optional<std::string>(*run_o.out + "/convergence.csv")
                                          : std::nullopt,
                        run_o.quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
