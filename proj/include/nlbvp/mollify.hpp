#ifndef NLBVP_MOLLIFY_HPP
#define NLBVP_MOLLIFY_HPP

#include "nlbvp/assembly.hpp"

namespace nlbvp {

struct MollifyDiagnostics {
  double eta_weighted_l2 = 0.0;   // ||eta f_delta||_L2
  double eta2_grad_l2 = 0.0;      // ||eta^2 grad f_delta||_L2 (1D difference gradient)
  GridFunction pointwise;         // f_delta as a nodal function
};

struct MollifyResult {
  Eigen::VectorXd load;           // Dirichlet path: assembled pairing
  GridFunction pointwise;         // Neumann path: f0^delta + F1^delta
  MollifyDiagnostics diagnostics;
};

/// Dirichlet mollification f_delta = K*_{delta,alpha} f through the weak
/// pairing (load vector); the pointwise field is carried for diagnostics only.
MollifyResult mollify_dirichlet(const RoughData& f, const Workspace& ws,
                                const Eigen::VectorXd& phi,
                                const std::vector<Vec2>& grad_phi);

/// Neumann mollification: nodal f0^delta + F1^delta. f1 must vanish on the
/// declared support collar; the construction preserves <f,1> exactly at the
/// quadrature level.
MollifyResult mollify_neumann(const RoughData& f, const Workspace& ws,
                              const Eigen::VectorXd& phi,
                              const std::vector<Vec2>& grad_phi);

/// Discrete H^-1 norm surrogate: dual norm of a load vector over the discrete
/// H^1_0 unit ball, one CG solve with the local P1 Laplacian (1D). Upper
/// bound only: it fixes one representation of the functional.
double discrete_hminus1_norm(const Mesh& mesh, const Eigen::VectorXd& load);

// 1D difference gradient of a nodal function (component 0).
Eigen::VectorXd difference_gradient_1d(const GridFunction& f);

}  // namespace nlbvp

#endif
