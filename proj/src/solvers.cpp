#include "nlbvp/solvers.hpp"

#include <cmath>
#include <limits>

namespace nlbvp {

std::string Solution::to_csv() const {
  const Mesh& mesh = *u.mesh;
  std::string out = mesh.dim() == 1 ? "x,u\n" : "x,y,u\n";
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    out += fmt17(mesh.nodes[i][0]);
    if (mesh.dim() == 2) out += "," + fmt17(mesh.nodes[i][1]);
    out += "," + fmt17(u.values[i]) + "\n";
  }
  return out;
}

json Solution::metadata() const {
  const char* p = problem == ProblemKind::neumann
                      ? "neumann"
                      : (problem == ProblemKind::dirichlet_homog ? "dirichlet_homog"
                                                                 : "dirichlet_inhomog");
  return json{{"problem", p},
              {"delta", delta},
              {"iters", iterations},
              {"residual", linear_residual},
              {"energy", energy},
              {"constraint_residual", constraint_residual}};
}

PcgResult pcg(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
              const Eigen::VectorXd& jacobi_diag, const Eigen::VectorXd& b, Eigen::VectorXd& x,
              double tol, int max_iter) {
  const int n = static_cast<int>(b.size());
  PcgResult res;
  Eigen::VectorXd invd = jacobi_diag.unaryExpr([](double d) { return d > 0 ? 1.0 / d : 1.0; });
  Eigen::VectorXd r(n), z(n), p(n), Ap(n);
  if (x.size() != n) x = Eigen::VectorXd::Zero(n);
  apply(x, Ap);
  r = b - Ap;
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  if (r.norm() / b_norm <= tol) {
    res.converged = true;
    res.rel_residual = r.norm() / b_norm;
    return res;
  }
  z = invd.cwiseProduct(r);
  p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    apply(p, Ap);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) {
      res.rel_residual = r.norm() / b_norm;
      res.history_tail.push_back(res.rel_residual);
      return res;  // lost positive-definiteness; caller reports
    }
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    const double rel = r.norm() / b_norm;
    res.iterations = it + 1;
    if (res.history_tail.size() >= 16) res.history_tail.erase(res.history_tail.begin());
    res.history_tail.push_back(rel);
    if (rel <= tol) {
      res.converged = true;
      res.rel_residual = rel;
      return res;
    }
    z = invd.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.rel_residual = r.norm() / b_norm;
  return res;
}

Eigen::VectorXd harmonic_extension(const Mesh& mesh,
                                   const std::function<double(const Vec2&)>& g) {
  const int n = mesh.n_nodes();
  Eigen::VectorXd G(n);
  if (mesh.boundary_nodes.empty()) fail_validation("mesh has no boundary nodes");
  if (mesh.dim() == 1) {
    const double a = mesh.domain.a(), b = mesh.domain.b();
    const double ga = g(Vec2(a, 0.0)), gb = g(Vec2(b, 0.0));
    for (int i = 0; i < n; ++i) {
      const double t = (mesh.nodes[i][0] - a) / (b - a);
      G[i] = (1.0 - t) * ga + t * gb;
    }
    return G;
  }
  // Normalized discrete Poisson-kernel sum: harmonic up to quadrature, exact
  // on constants.
  const Vec2 c = mesh.domain.center();
  const double R = mesh.domain.radius();
  const auto& bq = mesh.boundary_quad;
  for (int i = 0; i < n; ++i) {
    if (mesh.is_boundary(i)) {
      G[i] = g(mesh.nodes[i]);
      continue;
    }
    const Vec2 x = mesh.nodes[i];
    const double rr = (x - c).squaredNorm();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < bq.node.size(); ++k) {
      const Vec2& y = mesh.nodes[bq.node[k]];
      const double ker = (R * R - rr) / std::max((x - y).squaredNorm(), 1e-300);
      const double wk = bq.weight[static_cast<int>(k)] * ker;
      num += wk * g(y);
      den += wk;
    }
    G[i] = num / den;
  }
  return G;
}

Eigen::VectorXd harmonic_extension(const Mesh& mesh, const Eigen::VectorXd& g_at_bnodes) {
  if (g_at_bnodes.size() != static_cast<int>(mesh.boundary_nodes.size()))
    fail_validation("boundary data size mismatch");
  std::vector<std::pair<Vec2, double>> table;
  for (std::size_t k = 0; k < mesh.boundary_nodes.size(); ++k)
    table.emplace_back(mesh.nodes[mesh.boundary_nodes[k]], g_at_bnodes[static_cast<int>(k)]);
  auto g = [table](const Vec2& x) {
    double best = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (const auto& [p, v] : table) {
      const double d = (p - x).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
    return best;
  };
  return harmonic_extension(mesh, g);
}

std::vector<char> dirichlet_constrained_mask(const Workspace& ws) {
  const int n = ws.n_nodes();
  std::vector<char> constrained(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    constrained[static_cast<std::size_t>(i)] =
        (ws.mesh->is_boundary(i) || !ws.trusted[i]) ? 1 : 0;
  return constrained;
}

std::vector<int> tie_masters(const Workspace& ws) {
  const Mesh& mesh = *ws.mesh;
  const int n = mesh.n_nodes();
  std::vector<int> master(static_cast<std::size_t>(n), -1);
  bool any_trusted = false;
  for (int i = 0; i < n; ++i)
    if (ws.trusted[i]) {
      master[static_cast<std::size_t>(i)] = i;
      any_trusted = true;
    }
  if (!any_trusted) fail_resolution("no trusted nodes: mesh cannot resolve the kernel anywhere");
  for (int i = 0; i < n; ++i) {
    if (master[static_cast<std::size_t>(i)] >= 0) continue;
    double radius = 2.0 * mesh.h_max;
    int best = -1;
    double best_d2 = 0.0;
    for (int tries = 0; tries < 40 && best < 0; ++tries) {
      mesh.for_each_in_ball(mesh.nodes[i], radius, [&](int j) {
        if (!ws.trusted[j]) return;
        const double d2 = (mesh.nodes[j] - mesh.nodes[i]).squaredNorm();
        if (best < 0 || d2 < best_d2 || (d2 == best_d2 && j < best)) {
          best = j;
          best_d2 = d2;
        }
      });
      radius *= 2.0;
    }
    if (best < 0) fail_resolution("tie search found no trusted node", json{{"node", i}});
    master[static_cast<std::size_t>(i)] = best;
  }
  return master;
}

DirichletSystem DirichletSystem::build(const OperatorAssembly& asm_, const Workspace& ws) {
  DirichletSystem ds;
  ds.mesh = ws.mesh;
  ds.constrained = dirichlet_constrained_mask(ws);
  const int n = ws.n_nodes();
  ds.local.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i)
    if (!ds.constrained[static_cast<std::size_t>(i)]) {
      ds.local[static_cast<std::size_t>(i)] = static_cast<int>(ds.free_ids.size());
      ds.free_ids.push_back(i);
    }
  if (ds.free_ids.empty()) fail_resolution("no free nodes left after constraining the collar");
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < asm_.stiffness.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(asm_.stiffness, k); it; ++it) {
      const int li = ds.local[static_cast<std::size_t>(it.row())];
      const int lj = ds.local[static_cast<std::size_t>(it.col())];
      if (li >= 0 && lj >= 0) trips.emplace_back(li, lj, it.value());
    }
  const int m = static_cast<int>(ds.free_ids.size());
  ds.A.resize(m, m);
  ds.A.setFromTriplets(trips.begin(), trips.end());
  ds.A.makeCompressed();
  ds.diag = ds.A.diagonal();
  ds.mass.resize(m);
  for (int k = 0; k < m; ++k) ds.mass[k] = ws.mesh->weights[ds.free_ids[static_cast<std::size_t>(k)]];
  return ds;
}

PcgResult DirichletSystem::solve(const Eigen::VectorXd& rhs_free, Eigen::VectorXd& x,
                                 double tol, int max_iter) const {
  auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = A * v; };
  return pcg(apply, diag, rhs_free, x, tol, max_iter);
}

NeumannSystem NeumannSystem::build(const OperatorAssembly& asm_, const Workspace& ws) {
  NeumannSystem ns;
  ns.mesh = ws.mesh;
  ns.master = tie_masters(ws);
  const int n = ws.n_nodes();
  ns.local.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i)
    if (ns.master[static_cast<std::size_t>(i)] == i) {
      ns.local[static_cast<std::size_t>(i)] = static_cast<int>(ns.reps.size());
      ns.reps.push_back(i);
    }
  auto lid = [&](int i) {
    return ns.local[static_cast<std::size_t>(ns.master[static_cast<std::size_t>(i)])];
  };
  const int m = static_cast<int>(ns.reps.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < asm_.stiffness.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(asm_.stiffness, k); it; ++it)
      trips.emplace_back(lid(static_cast<int>(it.row())), lid(static_cast<int>(it.col())),
                         it.value());
  ns.Bt.resize(m, m);
  ns.Bt.setFromTriplets(trips.begin(), trips.end());
  ns.Bt.makeCompressed();
  ns.c = Eigen::VectorXd::Zero(m);
  ns.mass = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) {
    ns.c[lid(i)] += ws.mesh->weights[i] * asm_.phi0[i];
    ns.mass[lid(i)] += ws.mesh->weights[i];
  }
  ns.beta = ns.Bt.diagonal().mean();
  const double cc = ns.c.squaredNorm();
  ns.diag = ns.Bt.diagonal() + (ns.beta / cc) * ns.c.cwiseProduct(ns.c);
  return ns;
}

Eigen::VectorXd NeumannSystem::condense(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(reps.size());
  for (int i = 0; i < full.size(); ++i)
    out[local[static_cast<std::size_t>(master[static_cast<std::size_t>(i)])]] += full[i];
  return out;
}

Eigen::VectorXd NeumannSystem::expand(const Eigen::VectorXd& reduced) const {
  Eigen::VectorXd out(master.size());
  for (std::size_t i = 0; i < master.size(); ++i)
    out[static_cast<int>(i)] = reduced[local[static_cast<std::size_t>(master[i])]];
  return out;
}

PcgResult NeumannSystem::solve(Eigen::VectorXd rhs, Eigen::VectorXd& x, double tol,
                               int max_iter) const {
  // consistency shift: the Lagrange multiplier on the Phi-weighted mean
  const double lambda = rhs.sum() / c.sum();
  rhs -= lambda * c;
  const double cc = c.squaredNorm();
  auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    out = Bt * v + (beta * c.dot(v) / cc) * c;
  };
  PcgResult res = pcg(apply, diag, rhs, x, tol, max_iter);
  // exact constraint: remove the component along constants
  const double shift = c.dot(x) / c.sum();
  x.array() -= shift;
  return res;
}

Solution solve_dirichlet(const OperatorAssembly& asm_, const Workspace& ws,
                         const Eigen::VectorXd& f_load,
                         const std::function<double(const Vec2&)>& g, double tol,
                         int max_iter) {
  const Mesh& mesh = *ws.mesh;
  if (mesh.boundary_nodes.empty()) fail_validation("Dirichlet solve requires boundary nodes");
  const int n = mesh.n_nodes();

  const Eigen::VectorXd G = harmonic_extension(mesh, g);
  DirichletSystem ds = DirichletSystem::build(asm_, ws);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (ds.constrained[static_cast<std::size_t>(i)]) u[i] = G[i];

  const Eigen::VectorXd r_full = f_load - asm_.stiffness * u;
  Eigen::VectorXd b(ds.free_ids.size());
  for (std::size_t k = 0; k < ds.free_ids.size(); ++k)
    b[static_cast<int>(k)] = r_full[ds.free_ids[k]];

  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  PcgResult cg = ds.solve(b, x, tol, max_iter);
  if (!cg.converged && b.norm() > 0.0)
    fail_solver("Dirichlet CG did not converge",
                json{{"iterations", cg.iterations},
                     {"rel_residual", cg.rel_residual},
                     {"history_tail", cg.history_tail}});

  for (std::size_t k = 0; k < ds.free_ids.size(); ++k) u[ds.free_ids[k]] += x[static_cast<int>(k)];

  Solution sol;
  sol.u = GridFunction(mesh, u);
  bool homog = true;
  for (int b_i : mesh.boundary_nodes)
    if (std::abs(G[b_i]) > 0) homog = false;
  sol.problem = homog ? ProblemKind::dirichlet_homog : ProblemKind::dirichlet_inhomog;
  sol.delta = ws.kernel->delta();
  sol.iterations = cg.iterations;
  sol.linear_residual = cg.rel_residual;
  sol.energy = asm_.energy(u);
  double mismatch = 0.0;
  for (int b_i : mesh.boundary_nodes)
    mismatch = std::max(mismatch, std::abs(u[b_i] - g(mesh.nodes[b_i])));
  sol.constraint_residual = mismatch;
  return sol;
}

Solution solve_neumann(const OperatorAssembly& asm_, const Workspace& ws,
                       const Eigen::VectorXd& f_load, const Eigen::VectorXd& g_load,
                       double tol, int max_iter, double tol_compat) {
  const double defect = f_load.sum() + g_load.sum();
  const double scale = f_load.cwiseAbs().sum() + g_load.cwiseAbs().sum();
  if (std::abs(defect) > tol_compat * std::max(scale, 1e-30))
    fail_validation("Neumann compatibility violated: <f,1> + <g,1> != 0",
                    json{{"defect", defect}, {"scale", scale}, {"tol_compat", tol_compat}});

  NeumannSystem ns = NeumannSystem::build(asm_, ws);
  Eigen::VectorXd rhs = ns.condense(f_load + g_load);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  PcgResult cg = ns.solve(rhs, x, tol, max_iter);
  if (!cg.converged && rhs.norm() > 0.0)
    fail_solver("Neumann CG did not converge",
                json{{"iterations", cg.iterations},
                     {"rel_residual", cg.rel_residual},
                     {"history_tail", cg.history_tail}});

  Solution sol;
  sol.u = GridFunction(*ws.mesh, ns.expand(x));
  sol.problem = ProblemKind::neumann;
  sol.delta = ws.kernel->delta();
  sol.iterations = cg.iterations;
  sol.linear_residual = cg.rel_residual;
  sol.energy = asm_.energy(sol.u.values);
  sol.constraint_residual = std::abs(phi_weighted_mean(sol.u, asm_.phi0));
  return sol;
}

Solution solve_fixed_point(const Workspace& ws, const GridFunction& f,
                           const std::function<double(const Vec2&)>& g, double tol,
                           int max_iter, const GridFunction* u0) {
  if (ws.kernel->alpha() != 2.0)
    fail_validation("fixed-point solve requires the alpha = 2 kernel");
  const Mesh& mesh = *ws.mesh;
  const int n = mesh.n_nodes();
  const Eigen::VectorXd phi2 = phi_vector(ws);
  const Eigen::VectorXd G = harmonic_extension(mesh, g);
  const auto constrained = dirichlet_constrained_mask(ws);

  GridFunction u = u0 ? *u0 : GridFunction(mesh);
  u.check();
  for (int i = 0; i < n; ++i)
    if (constrained[static_cast<std::size_t>(i)]) u.values[i] = G[i];

  double prev_update = 0.0;
  double contraction = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    GridFunction ku = apply_K(ws, u, phi2);
    double update = 0.0;
    for (int i = 0; i < n; ++i) {
      if (constrained[static_cast<std::size_t>(i)]) {
        u.values[i] = G[i];
        continue;
      }
      const double next = ku.values[i] + f.values[i] / (2.0 * phi2[i]);
      update = std::max(update, std::abs(next - u.values[i]));
      u.values[i] = next;
    }
    if (prev_update > 0.0 && update > 0.0)
      contraction = std::max(0.9 * contraction, std::min(update / prev_update, 0.9999999));
    prev_update = update;
    // geometric-tail extrapolation of the remaining error
    const double projected =
        contraction > 0.0 ? update * contraction / (1.0 - contraction) : update;
    if (update == 0.0 || projected <= tol) {
      ++it;
      converged = true;
      break;
    }
  }
  if (!converged)
    fail_solver("fixed-point iteration did not converge",
                json{{"iterations", it}, {"last_update", prev_update}});

  Solution sol;
  sol.u = std::move(u);
  sol.problem = ProblemKind::dirichlet_inhomog;
  sol.delta = ws.kernel->delta();
  sol.iterations = it;
  sol.linear_residual = prev_update;
  sol.energy = bilinear_form(ws, sol.u, sol.u);
  double mismatch = 0.0;
  for (int b_i : mesh.boundary_nodes)
    mismatch = std::max(mismatch, std::abs(sol.u.values[b_i] - g(mesh.nodes[b_i])));
  sol.constraint_residual = mismatch;
  return sol;
}

}  // namespace nlbvp
