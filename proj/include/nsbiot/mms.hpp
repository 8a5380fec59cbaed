#pragma once

#include "nsbiot/system.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nsbiot {

using TimeMatrix = std::function<Mat2(double t, const Vec2& x)>;

/// Primary exact fields and the derivatives the sources need. Derived fields
/// (stress, vorticity, Darcy velocity, ...) are computed from these.
struct ExactSolution {
  ModelParams params;

  TimeVector u_f;
  TimeMatrix grad_u_f;   // row i = grad of component i
  TimeVector dt_u_f;
  TimeVector div_e_u_f;  // row-wise div of the symmetric gradient
  TimeScalar p_f;
  TimeVector grad_p_f;

  TimeScalar p_p;
  TimeVector grad_p_p;
  TimeMatrix hess_p_p;
  TimeScalar dt_p_p;

  TimeVector eta;
  TimeMatrix grad_eta;
  TimeVector dt_eta;
  TimeVector dtt_eta;
  TimeMatrix grad_dt_eta;
  TimeVector div_e_eta;
  TimeVector grad_div_eta;

  Mat2 sigma_f(double t, const Vec2& x) const;
  Vec2 div_sigma_f(double t, const Vec2& x) const;
  Mat2 gamma_f(double t, const Vec2& x) const;
  Vec2 u_p(double t, const Vec2& x) const;
  double div_u_p(double t, const Vec2& x) const;
  double q_f(double t, const Vec2& x) const { return grad_u_f(t, x).trace(); }
};

/// u_f = pi cos(pi t) (-3x + cos y, y + 1), p_p = e^t sin(pi x) cos(pi y / 2),
/// p_f = p_p + 2 pi cos(pi t), eta = sin(pi t) (-3x + cos y, y + 1).
ExactSolution example1_solution(const ModelParams& params);

struct Sources {
  TimeVector f_f;
  TimeVector f_p;
  TimeScalar q_p;
  TimeScalar q_f;
};

Sources manufactured_sources(const ExactSolution& exact);

/// Sources, boundary data from the exact traces, and initial data at t = 0.
ProblemData make_mms_problem(const ExactSolution& exact);

enum class ErrorField { Sigma, Uf, Gamma, Pf, Pp, Up, Eta, Phi, Lambda };
constexpr int kNumErrorFields = 9;
const char* to_string(ErrorField f);
/// True for fields measured in the max-in-time norm.
bool uses_max_in_time(ErrorField f);

/// Spatial error of every field at one time level.
using FieldErrors = std::array<double, kNumErrorFields>;

FieldErrors step_errors(const Discretization& disc, const BlockLayout& layout,
                        const SystemState& state, const ExactSolution& exact);

/// Discrete-in-time norms: sqrt(dt * sum) or max over the levels added.
class ErrorAccumulator {
 public:
  explicit ErrorAccumulator(double dt) : dt_(dt) {}
  void add(const FieldErrors& e);
  FieldErrors result() const;
  int levels() const { return count_; }

 private:
  double dt_;
  FieldErrors sum_sq_{};
  FieldErrors max_{};
  int count_ = 0;
};

FieldErrors compute_error_norms(const Discretization& disc, const BlockLayout& layout,
                                const std::vector<SystemState>& trajectory,
                                const ExactSolution& exact, double dt);

struct LevelResult {
  int level = 0;
  double h_f = 0.0, h_p = 0.0, h_tf = 0.0, h_tp = 0.0;
  FieldErrors errors{};
  double avg_newton = 0.0;

  /// Mesh size matching the field's norm.
  double h_for(ErrorField f) const;
};

struct ErrorReport {
  std::vector<LevelResult> levels;
};

/// log(e0 / e1) / log(h0 / h1); empty when an error is zero or not finite.
std::optional<double> convergence_rate(double e0, double e1, double h0, double h1);

/// rates[i][f] between levels i and i + 1.
std::vector<std::array<std::optional<double>, kNumErrorFields>> convergence_rates(
    const ErrorReport& report);

void write_convergence_csv(const ErrorReport& report, std::ostream& out);

}  // namespace nsbiot
