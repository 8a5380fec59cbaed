#include "nsbiot/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace nsbiot {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Example1: return "example1";
    case ScenarioKind::Example2: return "example2";
    case ScenarioKind::Custom: return "custom";
  }
  return "?";
}

ScenarioConfig ScenarioConfig::example1() { return {}; }

ScenarioConfig ScenarioConfig::example2() {
  ScenarioConfig c;
  c.scenario = ScenarioKind::Example2;
  c.levels = 1;
  c.dt = 1.0;
  c.t_final = 400.0;
  c.params = ModelParams::air_filter();
  c.output_dir = "filter_out";
  return c;
}

void ScenarioConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(t_final >= dt * (1.0 - 1e-12))) throw ConfigError("t_final must be >= dt");
  if (std::abs(t_final / dt - std::round(t_final / dt)) > 1e-9 * (t_final / dt)) {
    throw ConfigError("t_final must be a whole multiple of dt");
  }
  if (levels < 1) throw ConfigError("levels must be >= 1");
  if (cadence < 1) throw ConfigError("cadence must be >= 1");
  if (refinement < 0 || refinement > 6) throw ConfigError("refinement must lie in 0..6");
  try {
    params.validate();
    newton.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

int ScenarioConfig::steps() const { return static_cast<int>(std::llround(t_final / dt)); }

ModelParams ScenarioConfig::effective_params() const {
  ModelParams p = params;
  p.convection_on = convection_on;
  return p;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  return scenario == o.scenario && levels == o.levels && dt == o.dt && t_final == o.t_final &&
         effective_params() == o.effective_params() && newton.abs_tol == o.newton.abs_tol &&
         newton.rel_tol == o.newton.rel_tol && newton.max_iter == o.newton.max_iter &&
         newton.damping == o.newton.damping &&
         newton.backward_error_floor == o.newton.backward_error_floor &&
         output_dir == o.output_dir && cadence == o.cadence && convection_on == o.convection_on &&
         refinement == o.refinement && nested == o.nested && parallel == o.parallel;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, int line) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": not a number: '" + v + "'");
  }
  return out;
}

int to_int(const std::string& v, int line) {
  int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": not an integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("line " + std::to_string(line) + ": not a boolean: '" + v + "'");
}

ScenarioKind to_kind(const std::string& v, int line) {
  if (v == "example1") return ScenarioKind::Example1;
  if (v == "example2") return ScenarioKind::Example2;
  if (v == "custom") return ScenarioKind::Custom;
  throw ConfigError("line " + std::to_string(line) + ": unknown scenario '" + v + "'");
}

}  // namespace

std::string serialize(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "scenario = " << to_string(c.scenario) << '\n'
    << "levels = " << c.levels << '\n'
    << "dt = " << fmt(c.dt) << '\n'
    << "t_final = " << fmt(c.t_final) << '\n'
    << "mu = " << fmt(c.params.mu) << '\n'
    << "rho_f = " << fmt(c.params.rho_f) << '\n'
    << "rho_p = " << fmt(c.params.rho_p) << '\n'
    << "lambda_p = " << fmt(c.params.lambda_p) << '\n'
    << "mu_p = " << fmt(c.params.mu_p) << '\n'
    << "s0 = " << fmt(c.params.s0) << '\n'
    << "K11 = " << fmt(c.params.K(0, 0)) << '\n'
    << "K12 = " << fmt(c.params.K(0, 1)) << '\n'
    << "K21 = " << fmt(c.params.K(1, 0)) << '\n'
    << "K22 = " << fmt(c.params.K(1, 1)) << '\n'
    << "alpha_p = " << fmt(c.params.alpha_p) << '\n'
    << "alpha_bjs = " << fmt(c.params.alpha_bjs) << '\n'
    << "convection = " << (c.convection_on ? "true" : "false") << '\n'
    << "newton_abs_tol = " << fmt(c.newton.abs_tol) << '\n'
    << "newton_rel_tol = " << fmt(c.newton.rel_tol) << '\n'
    << "newton_max_iter = " << c.newton.max_iter << '\n'
    << "newton_damping = " << fmt(c.newton.damping) << '\n'
    << "newton_floor = " << fmt(c.newton.backward_error_floor) << '\n'
    << "output_dir = " << c.output_dir << '\n'
    << "cadence = " << c.cadence << '\n'
    << "refinement = " << c.refinement << '\n'
    << "nested = " << (c.nested ? "true" : "false") << '\n'
    << "parallel = " << (c.parallel ? "true" : "false") << '\n';
  return o.str();
}

ScenarioConfig parse_config(const std::string& text) {
  std::vector<std::tuple<int, std::string, std::string>> entries;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
    if (!seen.emplace(key, line).second) {
      throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    }
    entries.emplace_back(line, key, value);
  }

  ScenarioConfig c;
  if (auto it = seen.find("scenario"); it != seen.end()) {
    for (const auto& [ln, k, v] : entries) {
      if (k == "scenario") {
        const ScenarioKind kind = to_kind(v, ln);
        c = kind == ScenarioKind::Example2 ? ScenarioConfig::example2() : ScenarioConfig::example1();
        c.scenario = kind;
      }
    }
  }
  for (const auto& [ln, k, v] : entries) {
    if (k == "scenario") continue;
    else if (k == "levels") c.levels = to_int(v, ln);
    else if (k == "dt") c.dt = to_double(v, ln);
    else if (k == "t_final") c.t_final = to_double(v, ln);
    else if (k == "mu") c.params.mu = to_double(v, ln);
    else if (k == "rho_f") c.params.rho_f = to_double(v, ln);
    else if (k == "rho_p") c.params.rho_p = to_double(v, ln);
    else if (k == "lambda_p") c.params.lambda_p = to_double(v, ln);
    else if (k == "mu_p") c.params.mu_p = to_double(v, ln);
    else if (k == "s0") c.params.s0 = to_double(v, ln);
    else if (k == "K11") c.params.K(0, 0) = to_double(v, ln);
    else if (k == "K12") c.params.K(0, 1) = to_double(v, ln);
    else if (k == "K21") c.params.K(1, 0) = to_double(v, ln);
    else if (k == "K22") c.params.K(1, 1) = to_double(v, ln);
    else if (k == "alpha_p") c.params.alpha_p = to_double(v, ln);
    else if (k == "alpha_bjs") c.params.alpha_bjs = to_double(v, ln);
    else if (k == "convection") c.convection_on = to_bool(v, ln);
    else if (k == "newton_abs_tol") c.newton.abs_tol = to_double(v, ln);
    else if (k == "newton_rel_tol") c.newton.rel_tol = to_double(v, ln);
    else if (k == "newton_max_iter") c.newton.max_iter = to_int(v, ln);
    else if (k == "newton_damping") c.newton.damping = to_double(v, ln);
    else if (k == "newton_floor") c.newton.backward_error_floor = to_double(v, ln);
    else if (k == "output_dir") c.output_dir = v;
    else if (k == "cadence") c.cadence = to_int(v, ln);
    else if (k == "refinement") c.refinement = to_int(v, ln);
    else if (k == "nested") c.nested = to_bool(v, ln);
    else if (k == "parallel") c.parallel = to_bool(v, ln);
    else throw ConfigError("line " + std::to_string(ln) + ": unknown key '" + k + "'");
  }
  c.params.convection_on = c.convection_on;
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nsbiot
