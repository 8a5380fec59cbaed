#pragma once

#include "nsbiot/function_space.hpp"
#include "nsbiot/params.hpp"

#include <functional>

namespace nsbiot {

using TimeScalar = std::function<double(double t, const Vec2& x)>;
using TimeVector = std::function<Vec2(double t, const Vec2& x)>;
using TimeTensor = std::function<Mat2(double t, const Vec2& x)>;

/// Everything a run needs besides the meshes. Empty callables mean zero.
struct ProblemData {
  ModelParams params;

  TimeVector f_f;
  TimeVector f_p;
  TimeScalar q_p;
  /// Prescribed div u_f. When set, the fluid equations pick up the
  /// compressibility terms -(1/2)(q_f, tr tau) and -rho_f q_f (u_f, v_f), and
  /// the recovered pressure gains 2 mu q_f / 2.
  TimeScalar q_f;

  TimeVector fluid_velocity;  // u_f on FluidDirichlet (natural)
  TimeTensor fluid_stress;    // sigma_f n = fluid_stress n on FluidNeumann (essential)
  /// With convection on: where u_f . n > 0 on FluidNeumann, fluid_stress n
  /// prescribes T_f n = sigma_f n + rho_f (u_f . n) u_f instead of sigma_f n.
  bool traction_outflow = false;
  TimeScalar poro_pressure;   // p_p on PoroDirichlet (natural)
  TimeVector darcy_velocity;  // u_p . n on PoroNeumann (essential)
  TimeVector displacement;    // eta_p on every external poroelastic edge (essential)

  TensorField sigma0;
  VectorField u_p0;
  VectorField eta0;
  VectorField u_f0;
  ScalarField p_p0;
  TensorField gamma0;
  VectorField phi0;
  ScalarField lambda0;
  VectorField u_s0;  // initial structure velocity
};

}  // namespace nsbiot
