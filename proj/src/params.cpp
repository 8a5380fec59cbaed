#include "nsbiot/params.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace nsbiot {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be > 0");
}

}  // namespace

void ModelParams::validate() const {
  require_positive(mu, "mu");
  require_positive(rho_f, "rho_f");
  require_positive(rho_p, "rho_p");
  require_positive(lambda_p, "lambda_p");
  require_positive(mu_p, "mu_p");
  require_positive(s0, "s0");
  if (!(alpha_p > 0.0 && alpha_p <= 1.0)) throw ParameterError("alpha_p must lie in (0, 1]");
  if (!(alpha_bjs >= 0.0) || !std::isfinite(alpha_bjs)) throw ParameterError("alpha_bjs must be >= 0");
  if (!K.allFinite()) throw ParameterError("K has non-finite entries");
  if (std::abs(K(0, 1) - K(1, 0)) > 1e-12 * K.norm()) throw ParameterError("K must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> eig(K);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ParameterError("K must be positive definite");
}

Mat2 ModelParams::K_inverse() const { return K.inverse(); }

ModelParams ModelParams::convergence_test() { return ModelParams{}; }

ModelParams ModelParams::air_filter() {
  ModelParams p;
  p.mu = 1.81e-8;
  p.rho_f = 1.225e-3;
  p.rho_p = 1.601e-2;
  p.lambda_p = 1e4;
  p.mu_p = 1e5;
  p.s0 = 7e-2;
  p.K << 0.505e-6, -0.495e-6, -0.495e-6, 0.505e-6;
  p.alpha_p = 1.0;
  p.alpha_bjs = 1.0;
  return p;
}

bool ModelParams::operator==(const ModelParams& o) const {
  return mu == o.mu && rho_f == o.rho_f && rho_p == o.rho_p && lambda_p == o.lambda_p &&
         mu_p == o.mu_p && s0 == o.s0 && K == o.K && alpha_p == o.alpha_p &&
         alpha_bjs == o.alpha_bjs && convection_on == o.convection_on;
}

}  // namespace nsbiot
