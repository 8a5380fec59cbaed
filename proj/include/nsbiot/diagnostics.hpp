#pragma once

#include "nsbiot/system.hpp"

namespace nsbiot {

/// Local balance defects of one converged step, recomputed from the fields
/// with quadrature (not from the assembled operators).
struct ConservationResiduals {
  Vector darcy_mass;        // per poroelastic cell
  Vector fluid_momentum;    // per fluid cell and component (2t + c)
  Vector interface_mass;    // per multiplier basis function on the poroelastic trace
  Vector weak_symmetry;     // per fluid cell

  double max_darcy() const { return darcy_mass.lpNorm<Eigen::Infinity>(); }
  double max_momentum() const { return fluid_momentum.lpNorm<Eigen::Infinity>(); }
  double max_interface() const { return interface_mass.lpNorm<Eigen::Infinity>(); }
  double max_symmetry() const { return weak_symmetry.lpNorm<Eigen::Infinity>(); }
};

ConservationResiduals conservation_residuals(const CoupledSystem& system, const SystemState& state,
                                             const History& history);

/// Result of comparing the defects with 10x the block tolerances Newton used.
struct ConservationCheck {
  bool darcy = false, momentum = false, interface = false, symmetry = false;
  bool all() const { return darcy && momentum && interface && symmetry; }
};

ConservationCheck check_conservation(const ConservationResiduals& r, const NewtonReport& newton,
                                     double factor = 10.0);

/// 1/2 (rho_f |u_f|^2 + s0 |p_p|^2 + a_e(eta, eta) + rho_p |d_t eta|^2).
double discrete_energy(const CoupledSystem& system, const SystemState& state,
                       const Vector& eta_previous);

}  // namespace nsbiot
