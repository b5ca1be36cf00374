#ifndef NLBVP_ASSEMBLY_HPP
#define NLBVP_ASSEMBLY_HPP

#include <Eigen/SparseCore>

#include "nlbvp/operators.hpp"

namespace nlbvp {

/// Galerkin data for the nonlocal bilinear form B_{rho,delta} with lumped
/// (nodal) quadrature: v^T B u equals the double sum
///   sum_ij w_i w_j rho_{delta,2}(x_i,x_j) (u_i-u_j)(v_i-v_j).
struct OperatorAssembly {
  const Mesh* mesh = nullptr;
  Eigen::SparseMatrix<double> stiffness;  // symmetric PSD, B 1 = 0
  Eigen::VectorXd phi0, phi2;             // nodal Phi_{delta,0}, Phi_{delta,2}
  Eigen::VectorXd lumped_mass;            // volume weights
  // boundary pairing: integral of g * (trace of hat_i) reduces to the
  // boundary quadrature weight at boundary node i for P1 hats
  std::vector<int> boundary_pair_node;
  Eigen::VectorXd boundary_pair_weight;

  double energy(const Eigen::VectorXd& u) const { return u.dot(stiffness * u); }
  std::string stiffness_to_coordinate_text() const;  // "i j value" rows
};

OperatorAssembly assemble(const Workspace& ws);

/// Nonlocal seminorm [u] for horizon fraction R in (0,1): square root of the
/// double quadrature of |u(x)-u(y)|^2 / eta(x)^{d+2} over |y-x| <= R eta(x).
double seminorm(const Workspace& ws, const GridFunction& u, double R);

// B(u,v) as the direct double sum (no matrix needed).
double bilinear_form(const Workspace& ws, const GridFunction& u, const GridFunction& v);

// Lumped L2 load: w .* f.
Eigen::VectorXd load_l2(const GridFunction& f);

// Boundary load: entry i = boundary quadrature of g * trace(hat_i).
Eigen::VectorXd neumann_boundary_load(const Mesh& mesh,
                                      const std::function<double(const Vec2&)>& g);
Eigen::VectorXd neumann_boundary_load(const Mesh& mesh, const Eigen::VectorXd& g_at_bnodes);

// Phi-weighted mean (1/|Omega|) sum_i w_i Phi0_i u_i.
double phi_weighted_mean(const GridFunction& u, const Eigen::VectorXd& phi0);

/// Load vector for mollified H^-1 data: entry i = <f0, K v_i>_w + <f1, grad(K v_i)>_w,
/// assembled through the discrete adjoints (K* on f0, grad_K^T on w.*f1).
/// ws0 carries the mollifying kernel (any alpha >= 0).
Eigen::VectorXd load_hminus1_mollified(const Workspace& ws0, const RoughData& f,
                                       const Eigen::VectorXd& phi_alpha,
                                       const std::vector<Vec2>& grad_phi_alpha);

}  // namespace nlbvp

#endif
