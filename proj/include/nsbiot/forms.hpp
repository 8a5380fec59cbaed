#pragma once

#include "nsbiot/function_space.hpp"
#include "nsbiot/parallel.hpp"
#include "nsbiot/params.hpp"
#include "nsbiot/problem.hpp"

#include <Eigen/SparseCore>

#include <memory>
#include <vector>

namespace nsbiot {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Quadrature orders used by the assemblers.
struct QuadratureOrders {
  int cell = 4;
  int convective = 6;
  int interface = 5;
  int load = 6;
  int boundary = 7;
};

/// One segment of the interface partition with the cells on both sides.
struct InterfaceSegment {
  double s0 = 0.0, s1 = 0.0;  // arc length
  Vec2 x0, x1;
  int fluid_triangle = -1;
  int poro_triangle = -1;
  int phi_cell = -1;     // segment of the fluid trace
  int lambda_cell = -1;  // segment of the poroelastic trace
  Vec2 n_f;              // outward from the fluid; n_p = -n_f
  Vec2 t_f;              // n_f rotated by +90 degrees

  double length() const { return (x1 - x0).norm(); }
};

/// Meshes, traces and the eight discrete spaces of one refinement level.
struct Discretization {
  std::shared_ptr<const TriangleMesh> fluid_mesh;
  std::shared_ptr<const TriangleMesh> poro_mesh;
  std::shared_ptr<const TraceMesh> fluid_trace;
  std::shared_ptr<const TraceMesh> poro_trace;
  std::shared_ptr<const TraceMesh> merged_trace;

  FunctionSpace sigma_f;  // BDM1 tensor rows
  FunctionSpace u_p;      // BDM1
  FunctionSpace eta_p;    // continuous P1 vector
  FunctionSpace u_f;      // P0 vector
  FunctionSpace p_p;      // P0
  FunctionSpace gamma_f;  // P0 skew
  FunctionSpace phi;      // P1 on the fluid trace
  FunctionSpace lambda;   // P1 on the poroelastic trace

  std::vector<InterfaceSegment> segments;  // merged partition

  /// Both meshes must be fully tagged and share the Interface polyline.
  static Discretization build(TriangleMesh fluid, TriangleMesh poro);
};

/// Segments of the merged partition. Throws MeshError when a segment does not
/// lie inside one parent edge on each side.
std::vector<InterfaceSegment> merged_interface_segments(const TriangleMesh& fluid,
                                                        const TriangleMesh& poro,
                                                        const TraceMesh& fluid_trace,
                                                        const TraceMesh& poro_trace,
                                                        const TraceMesh& merged);

/// Segments read straight off matching traces (no merge). Throws MeshError
/// unless the two traces have the same breakpoints.
std::vector<InterfaceSegment> matching_interface_segments(const TriangleMesh& fluid,
                                                          const TriangleMesh& poro,
                                                          const TraceMesh& fluid_trace,
                                                          const TraceMesh& poro_trace);

struct SubdomainOperators {
  SparseMatrix A_f;    // (1/2mu)(sigma^d, tau^d)          sigma x sigma
  SparseMatrix B_f;    // (div sigma, v)                    u_f x sigma
  SparseMatrix B_sk;   // (sigma, chi)                      gamma x sigma
  SparseMatrix M_uf;   // rho_f (u, v)                      u_f x u_f
  SparseMatrix A_dp;   // mu (K^-1 u, v)                    u_p x u_p
  SparseMatrix B_p;    // -(div u, w)                       p_p x u_p
  SparseMatrix A_ep;   // 2 mu_p (e, e) + lambda_p (div, div)  eta x eta
  SparseMatrix B_ep;   // -(div eta, w)                     p_p x eta
  SparseMatrix M_pp;   // s0 (p, w)                         p_p x p_p
  SparseMatrix M_eta;  // rho_p (eta, xi)                   eta x eta
};

SubdomainOperators assemble_subdomain_forms(const ModelParams& params, const Discretization& disc,
                                            Exec exec = Exec::Serial,
                                            const QuadratureOrders& orders = {});

/// Interface operators, rows = test space, columns = trial space.
struct InterfaceOperators {
  SparseMatrix B_nf;       // -<sigma n_f, psi>                    phi x sigma
  SparseMatrix B_np;       // <v . n_p, xi>                        lambda x u_p
  SparseMatrix C_eta_eta;  // c_BJS blocks, c = mu alpha_BJS / sqrt(K_t)
  SparseMatrix C_eta_phi;  //   rows eta, cols phi
  SparseMatrix C_phi_eta;  //   rows phi, cols eta
  SparseMatrix C_phi_phi;
  SparseMatrix G_eta;      // -<eta . n_p, xi>                     lambda x eta
  SparseMatrix G_phi;      // -<phi . n_f, xi>                     lambda x phi

  /// The full c_BJS form on (eta, phi) x (eta, phi).
  SparseMatrix c_bjs() const;
};

InterfaceOperators assemble_interface_forms(const ModelParams& params, const Discretization& disc,
                                            const std::vector<InterfaceSegment>& segments,
                                            const QuadratureOrders& orders = {});

/// Residual contribution of a quadratic term and its derivative at the iterate.
struct NonlinearTerm {
  Vector residual;
  SparseMatrix jacobian;
};

/// kappa_w(w, tau) with rows sigma, columns u_f.
NonlinearTerm assemble_convective(const ModelParams& params, const Discretization& disc,
                                  const Vector& w_f, Exec exec = Exec::Serial,
                                  const QuadratureOrders& orders = {});

/// l_zeta(zeta, psi) with rows and columns phi.
NonlinearTerm assemble_interface_inertia(const ModelParams& params, const Discretization& disc,
                                         const std::vector<InterfaceSegment>& segments,
                                         const Vector& zeta, const QuadratureOrders& orders = {});

/// Right-hand sides at time t, one vector per tested space. Includes the
/// natural boundary terms for fluid velocity and Darcy pressure data.
struct LoadVectors {
  Vector sigma_f;
  Vector u_p;
  Vector eta_p;
  Vector u_f;
  Vector p_p;
};

LoadVectors assemble_load(const ProblemData& problem, const Discretization& disc, double t,
                          Exec exec = Exec::Serial, const QuadratureOrders& orders = {});

/// Diagonal of rho_f (q_f u, v) over the P0 fluid velocity (zero without q_f).
Vector assemble_compressibility_mass(const ProblemData& problem, const Discretization& disc,
                                     double t, const QuadratureOrders& orders = {});

}  // namespace nsbiot
