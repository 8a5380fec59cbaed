#pragma once

#include "nsbiot/params.hpp"
#include "nsbiot/system.hpp"

#include <stdexcept>
#include <string>

namespace nsbiot {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { Example1, Example2, Custom };
const char* to_string(ScenarioKind k);

/// Run configuration. `custom` runs the manufactured-solution study with
/// user-chosen coefficients.
struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Example1;
  int levels = 4;
  double dt = 1e-3;
  double t_final = 0.01;
  ModelParams params = ModelParams::convergence_test();
  NewtonConfig newton;
  std::string output_dir = "out";
  int cadence = 20;
  bool convection_on = true;
  int refinement = 2;   // Example 2 cell size 0.05 / 2^refinement
  bool nested = false;  // Example 1 poroelastic grid at half the fluid mesh size
  bool parallel = true;

  static ScenarioConfig example1();
  static ScenarioConfig example2();

  /// Throws ConfigError on the first violated bound.
  void validate() const;
  /// Number of time steps, round(t_final / dt).
  int steps() const;
  /// params with convection_on applied.
  ModelParams effective_params() const;

  bool operator==(const ScenarioConfig& o) const;
};

/// Flat `key = value` text, one entry per line, '#' comments.
std::string serialize(const ScenarioConfig& cfg);
/// Missing keys keep the defaults of the named scenario (scenario key first
/// when present). Throws ConfigError with the offending line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

}  // namespace nsbiot
