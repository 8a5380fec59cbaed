#pragma once

#include "nsbiot/mesh.hpp"

#include <stdexcept>

namespace nsbiot {

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical coefficients. Units follow whatever the scenario uses; the two
/// presets are the unit-coefficient convergence test and the air filter
/// (kPa, m, s, Mg).
struct ModelParams {
  double mu = 1.0;        // fluid viscosity
  double rho_f = 1.0;     // fluid density
  double rho_p = 1.0;     // solid density
  double lambda_p = 1.0;  // Lame
  double mu_p = 1.0;      // Lame
  double s0 = 1.0;        // storage coefficient
  Mat2 K = Mat2::Identity();
  double alpha_p = 1.0;    // Biot-Willis
  double alpha_bjs = 1.0;  // friction
  bool convection_on = true;

  /// Throws ParameterError naming the first violated bound.
  void validate() const;
  Mat2 K_inverse() const;
  /// K_t = (K t) . t for a unit tangent t.
  double tangential_permeability(const Vec2& t) const { return (K * t).dot(t); }

  static ModelParams convergence_test();
  static ModelParams air_filter();

  bool operator==(const ModelParams& o) const;
};

}  // namespace nsbiot
