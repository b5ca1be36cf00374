#ifndef NLBVP_OPERATORS_HPP
#define NLBVP_OPERATORS_HPP

#include "nlbvp/grid_function.hpp"
#include "nlbvp/kernels.hpp"

namespace nlbvp {

/// Per-mesh kernel data: cached horizons, gradients, neighbor radii and the
/// trust classification. A volume node is trusted when its kernel
/// neighborhood is resolved (at least min_neighbors others in reach) and its
/// horizon sits above the grading floor; nodes below the floor are
/// quadrature-limited and flagged rather than guessed at.
struct Workspace {
  const Mesh* mesh = nullptr;
  const TwoPointKernel* kernel = nullptr;
  Eigen::VectorXd eta;          // zero on boundary nodes
  std::vector<Vec2> grad_eta;
  Eigen::VectorXd reach;
  std::vector<char> trusted;    // volume nodes only; boundary nodes are never trusted
  int n_untrusted_volume = 0;
  double trust_eta_floor = 0.0;

  int n_nodes() const { return mesh->n_nodes(); }

  // Iterates volume nodes j (never boundary nodes) with |x_j - x_i| within the
  // mirrored kernel reach of node i, in fixed order. Includes j == i.
  void for_each_neighbor(int i, const std::function<void(int, double)>& fn) const;

  double trusted_l2_norm(const Eigen::VectorXd& nodal) const;
  double trusted_measure() const;
};

Workspace make_workspace(const Mesh& mesh, const TwoPointKernel& kernel,
                         bool require_resolved = true, int min_neighbors = 3);

// Phi_{delta,alpha}(x_i) = sum_j w_j rho_{delta,alpha}(x_i, x_j); the kernel's
// alpha is used. Positive at every volume node.
Eigen::VectorXd phi_vector(const Workspace& ws);
// Quadrature of the kernel x-gradient (same nodes/weights as phi_vector).
std::vector<Vec2> grad_phi_vector(const Workspace& ws);

// (L_delta u)(x_i) = 2 sum_j w_j rho_{delta,2}(x_i,x_j) (u_i - u_j); requires
// the workspace kernel to carry alpha = 2.
GridFunction apply_L(const Workspace& ws, const GridFunction& u);

// K u = (1/Phi) sum w rho u ; shares quadrature with phi so K(1) == 1 exactly.
GridFunction apply_K(const Workspace& ws, const GridFunction& u, const Eigen::VectorXd& phi);
GridFunction apply_K_star(const Workspace& ws, const GridFunction& u,
                          const Eigen::VectorXd& phi);

// grad K u via the closed-form kernel gradient; both terms carry u(y)-u(x),
// so constants map to the zero field exactly.
VectorGridFunction grad_K(const Workspace& ws, const GridFunction& u,
                          const Eigen::VectorXd& phi, const std::vector<Vec2>& grad_phi);

// F1(x_i) = sum_j w_j rho_{delta,2}(x_i,x_j) (x_j - x_i): ghost-force diagnostic.
VectorGridFunction f1_field(const Workspace& ws);

}  // namespace nlbvp

#endif
