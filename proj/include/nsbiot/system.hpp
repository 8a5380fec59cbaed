#pragma once

#include "nsbiot/forms.hpp"

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsbiot {

/// Unknowns in the order of the global vector.
enum class Field { Sigma, Up, Eta, Uf, Pp, Gamma, Phi, Lambda };
constexpr int kNumFields = 8;
const char* to_string(Field f);

struct BlockLayout {
  std::array<int, kNumFields> offset{};
  std::array<int, kNumFields> size{};
  int total = 0;

  static BlockLayout of(const Discretization& disc);
  int begin(Field f) const { return offset[static_cast<int>(f)]; }
  int count(Field f) const { return size[static_cast<int>(f)]; }
  Field field_of(int dof) const;
};

/// Coefficients of all eight fields at one time level.
struct SystemState {
  Vector x;
  double t = 0.0;

  auto field(const BlockLayout& l, Field f) { return x.segment(l.begin(f), l.count(f)); }
  auto field(const BlockLayout& l, Field f) const { return x.segment(l.begin(f), l.count(f)); }
};

/// Previous level and the displacement two levels back.
struct History {
  SystemState previous;
  Vector eta_before;
};

struct NewtonConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_iter = 20;
  double damping = 1.0;
  /// Residuals below backward_error_floor * (|J||x| + |rhs|) count as
  /// converged: no linear solve can do better.
  double backward_error_floor = 1e-12;

  void validate() const;
};

struct NewtonReport {
  int iterations = 0;
  bool converged = false;
  std::array<double, kNumFields> initial_residual{};
  std::array<double, kNumFields> final_residual{};
  std::array<double, kNumFields> tolerance{};  // effective per-block tolerance at exit
};

class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, NewtonReport report)
      : std::runtime_error(what), report_(report) {}
  const NewtonReport& report() const { return report_; }

 private:
  NewtonReport report_;
};

/// Residual and Jacobian of the fully discrete system, without constraints.
struct BlockSystem {
  Vector residual;
  SparseMatrix jacobian;
  Vector rhs;  // load plus history terms (for scaling)
};

/// The monolithic backward-Euler system of one refinement level and step size.
class CoupledSystem {
 public:
  CoupledSystem(std::shared_ptr<const Discretization> disc, ProblemData problem, double dt,
                Exec exec = Exec::Serial, QuadratureOrders orders = {});
  ~CoupledSystem();
  CoupledSystem(const CoupledSystem&) = delete;
  CoupledSystem& operator=(const CoupledSystem&) = delete;

  const Discretization& discretization() const { return *disc_; }
  const ProblemData& problem() const { return problem_; }
  const BlockLayout& layout() const { return layout_; }
  const SubdomainOperators& subdomain_operators() const { return sub_; }
  const InterfaceOperators& interface_operators() const { return iface_; }
  double dt() const { return dt_; }

  /// Interpolated initial data; history seeded with eta^{-1} = eta^0 - dt u_s0.
  SystemState initial_state() const;
  History initial_history(const SystemState& initial) const;

  /// Residual (and Jacobian unless `with_jacobian` is false) at iterate x for
  /// level time t. Throws std::invalid_argument on a malformed history.
  BlockSystem build_residual_and_jacobian(const Vector& x, const History& history, double t,
                                          bool with_jacobian = true) const;

  /// Essential values at time t as (global dof, value), sorted by dof.
  /// Throws std::runtime_error when one dof receives two different values.
  std::vector<std::pair<int, double>> essential_values(double t) const;

  /// Symmetric elimination: constrained rows and columns become identity rows
  /// with zero residual.
  void apply_boundary_conditions(BlockSystem& system, const std::vector<std::pair<int, double>>& bc) const;

  /// Solves level t starting from history.previous. Throws NewtonError.
  NewtonReport newton_solve(const History& history, double t, const NewtonConfig& cfg,
                            SystemState& result) const;

  /// Per-block 2-norms.
  std::array<double, kNumFields> block_norms(const Vector& v) const;

 private:
  struct Solver;

  std::shared_ptr<const Discretization> disc_;
  ProblemData problem_;
  double dt_;
  Exec exec_;
  QuadratureOrders orders_;
  BlockLayout layout_;
  SubdomainOperators sub_;
  InterfaceOperators iface_;
  SparseMatrix linear_;  // all linear blocks, with the full Newton pattern
  std::unique_ptr<Solver> solver_;
};

struct StepRecord {
  int step = 0;
  SystemState state;
  NewtonReport newton;
};

using StepObserver = std::function<void(const StepRecord&, const History& before)>;

/// Advances `steps` backward-Euler levels. Returns the final state; every
/// level goes through the observer. Newton failure is rethrown with the step.
SystemState time_loop(const CoupledSystem& system, const SystemState& initial, int steps,
                      const NewtonConfig& cfg, const StepObserver& observer = {});

/// Cellwise P0 fluid pressure p = -(tr sigma + rho_f |u|^2 - 2 mu q_f) / 2.
Vector recover_fluid_pressure(const Discretization& disc, const ModelParams& params,
                              const Vector& sigma_f, const Vector& u_f, const TimeScalar& q_f = {},
                              double t = 0.0);

}  // namespace nsbiot
