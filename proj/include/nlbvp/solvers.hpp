#ifndef NLBVP_SOLVERS_HPP
#define NLBVP_SOLVERS_HPP

#include "nlbvp/assembly.hpp"

namespace nlbvp {

enum class ProblemKind { dirichlet_homog, dirichlet_inhomog, neumann };

struct Solution {
  GridFunction u;
  ProblemKind problem = ProblemKind::dirichlet_homog;
  double delta = 0.0;
  int iterations = 0;
  double linear_residual = 0.0;
  double energy = 0.0;
  double constraint_residual = 0.0;  // trace mismatch (Dirichlet) or Phi-mean (Neumann)

  std::string to_csv() const;  // x[,y],u
  json metadata() const;
};

struct PcgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  std::vector<double> history_tail;
};

// Jacobi-preconditioned conjugate gradients on an SPD operator.
PcgResult pcg(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
              const Eigen::VectorXd& jacobi_diag, const Eigen::VectorXd& b, Eigen::VectorXd& x,
              double tol, int max_iter);

// Discrete harmonic extension of boundary data: affine interpolant on the
// interval, normalized Poisson-kernel sum on the disk.
Eigen::VectorXd harmonic_extension(const Mesh& mesh,
                                   const std::function<double(const Vec2&)>& g);
Eigen::VectorXd harmonic_extension(const Mesh& mesh, const Eigen::VectorXd& g_at_bnodes);

// Constrained set for the Dirichlet paths: boundary nodes plus the
// sub-resolution collar (pinned to the lifting; the collar shrinks to the
// boundary as h_min -> 0, realizing the trace condition at finite resolution).
std::vector<char> dirichlet_constrained_mask(const Workspace& ws);

/// Reduced SPD block over the free (trusted interior) nodes.
struct DirichletSystem {
  const Mesh* mesh = nullptr;
  std::vector<char> constrained;
  std::vector<int> free_ids;
  std::vector<int> local;  // global -> local, -1 when constrained
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd diag;
  Eigen::VectorXd mass;  // lumped mass on free nodes

  static DirichletSystem build(const OperatorAssembly& asm_, const Workspace& ws);
  PcgResult solve(const Eigen::VectorXd& rhs_free, Eigen::VectorXd& x, double tol,
                  int max_iter) const;
};

/// Condensed Neumann system: boundary and sub-resolution nodes are tied to the
/// nearest trusted node, so the boundary load enters through the condensed
/// hats; the Phi-weighted-mean constraint fixes the constant through a
/// rank-one augmented SPD operator (Lagrange-multiplier equivalent).
struct NeumannSystem {
  const Mesh* mesh = nullptr;
  std::vector<int> master;  // node -> representative node
  std::vector<int> reps;    // representative ids
  std::vector<int> local;   // node -> condensed index
  Eigen::SparseMatrix<double> Bt;
  Eigen::VectorXd c;        // condensed w .* Phi0 (constraint functional)
  Eigen::VectorXd mass;     // condensed lumped mass
  Eigen::VectorXd diag;
  double beta = 1.0;

  static NeumannSystem build(const OperatorAssembly& asm_, const Workspace& ws);
  Eigen::VectorXd condense(const Eigen::VectorXd& full) const;
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  // Solves Bt x = rhs - lambda c with c^T x = 0; rhs is consistency-shifted
  // internally and the constant component removed exactly afterwards.
  PcgResult solve(Eigen::VectorXd rhs, Eigen::VectorXd& x, double tol, int max_iter) const;
};

Solution solve_dirichlet(const OperatorAssembly& asm_, const Workspace& ws,
                         const Eigen::VectorXd& f_load,
                         const std::function<double(const Vec2&)>& g, double tol = 1e-10,
                         int max_iter = 50000);

Solution solve_neumann(const OperatorAssembly& asm_, const Workspace& ws,
                       const Eigen::VectorXd& f_load, const Eigen::VectorXd& g_load,
                       double tol = 1e-10, int max_iter = 50000, double tol_compat = 1e-8);

/// Jacobi-style fixed-point iteration u <- K_{delta,2} u + f/(2 Phi_{delta,2})
/// with Dirichlet data imposed on the constrained set every sweep. Converges
/// to the same discrete solution as solve_dirichlet (matched quadrature).
Solution solve_fixed_point(const Workspace& ws, const GridFunction& f,
                           const std::function<double(const Vec2&)>& g, double tol,
                           int max_iter, const GridFunction* u0 = nullptr);

// Nearest trusted volume node per node (Neumann condensation).
std::vector<int> tie_masters(const Workspace& ws);

}  // namespace nlbvp

#endif
