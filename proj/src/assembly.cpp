#include "nlbvp/assembly.hpp"

#include <cmath>

namespace nlbvp {

OperatorAssembly assemble(const Workspace& ws) {
  if (ws.kernel->alpha() != 2.0)
    fail_validation("assemble requires the alpha = 2 kernel");
  const Mesh& mesh = *ws.mesh;
  const int n = mesh.n_nodes();

  OperatorAssembly out;
  out.mesh = &mesh;
  out.lumped_mass = mesh.weights;
  out.phi2 = phi_vector(ws);
  {
    TwoPointKernel k0(ws.kernel->profile(), ws.kernel->eta(), 0.0);
    Workspace ws0 = make_workspace(mesh, k0, false);
    out.phi0 = phi_vector(ws0);
  }

  // Row-wise triplet assembly; per-row accumulation order is fixed by the
  // neighbor iteration, so the matrix is deterministic.
  std::vector<std::vector<Eigen::Triplet<double>>> rows(static_cast<std::size_t>(n));
  const auto& w = mesh.weights;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (mesh.is_boundary(i)) return;
    auto& row = rows[ii];
    double diag = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      if (j == i) return;
      const double bij = 2.0 * w[i] * w[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]);
      if (bij == 0.0) return;
      row.emplace_back(i, j, -bij);
      diag += bij;
    });
    row.emplace_back(i, i, diag);
  });
  std::vector<Eigen::Triplet<double>> trips;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  trips.reserve(total);
  for (const auto& r : rows) trips.insert(trips.end(), r.begin(), r.end());

  Eigen::SparseMatrix<double> B(n, n);
  B.setFromTriplets(trips.begin(), trips.end());
  // guard against asymmetric neighbor truncation
  Eigen::SparseMatrix<double> Bt = B.transpose();
  out.stiffness = 0.5 * (B + Bt);
  out.stiffness.makeCompressed();

  out.boundary_pair_node = mesh.boundary_quad.node;
  out.boundary_pair_weight = mesh.boundary_quad.weight;
  return out;
}

std::string OperatorAssembly::stiffness_to_coordinate_text() const {
  std::string out;
  for (int k = 0; k < stiffness.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness, k); it; ++it)
      out += std::to_string(it.row()) + " " + std::to_string(it.col()) + " " +
             fmt17(it.value()) + "\n";
  return out;
}

double seminorm(const Workspace& ws, const GridFunction& u, double R) {
  if (!(R > 0.0 && R < 1.0)) fail_validation("seminorm radius R must lie in (0,1)", json{{"R", R}});
  u.check();
  const Mesh& mesh = *ws.mesh;
  const int n = mesh.n_nodes();
  const int d = mesh.dim();
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (mesh.is_boundary(i)) return;
    const double cutoff = R * ws.eta[i];
    const double denom = std::pow(ws.eta[i], d + 2);
    double s = 0.0;
    mesh.for_each_in_ball(mesh.nodes[i], cutoff, [&](int j) {
      if (j == i || mesh.is_boundary(j)) return;
      const double du = u.values[i] - u.values[j];
      s += mesh.weights[j] * du * du;
    });
    partial[ii] = mesh.weights[i] * s / denom;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return std::sqrt(total);
}

double bilinear_form(const Workspace& ws, const GridFunction& u, const GridFunction& v) {
  const Mesh& mesh = *ws.mesh;
  const int n = mesh.n_nodes();
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (mesh.is_boundary(i)) return;
    double s = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      if (j == i) return;
      s += mesh.weights[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]) *
           (u.values[i] - u.values[j]) * (v.values[i] - v.values[j]);
    });
    partial[ii] = mesh.weights[i] * s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

Eigen::VectorXd load_l2(const GridFunction& f) {
  f.check();
  return f.mesh->weights.cwiseProduct(f.values);
}

Eigen::VectorXd neumann_boundary_load(const Mesh& mesh,
                                      const std::function<double(const Vec2&)>& g) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.n_nodes());
  for (std::size_t k = 0; k < mesh.boundary_quad.node.size(); ++k) {
    const int b = mesh.boundary_quad.node[k];
    load[b] += mesh.boundary_quad.weight[static_cast<int>(k)] * g(mesh.nodes[b]);
  }
  return load;
}

Eigen::VectorXd neumann_boundary_load(const Mesh& mesh, const Eigen::VectorXd& g_at_bnodes) {
  if (g_at_bnodes.size() != static_cast<int>(mesh.boundary_quad.node.size()))
    fail_validation("boundary data size mismatch");
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.n_nodes());
  for (std::size_t k = 0; k < mesh.boundary_quad.node.size(); ++k)
    load[mesh.boundary_quad.node[k]] +=
        mesh.boundary_quad.weight[static_cast<int>(k)] * g_at_bnodes[static_cast<int>(k)];
  return load;
}

double phi_weighted_mean(const GridFunction& u, const Eigen::VectorXd& phi0) {
  u.check();
  const Mesh& mesh = *u.mesh;
  double s = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) s += mesh.weights[i] * phi0[i] * u.values[i];
  return s / mesh.domain.volume();
}

Eigen::VectorXd load_hminus1_mollified(const Workspace& ws0, const RoughData& f,
                                       const Eigen::VectorXd& phi_alpha,
                                       const std::vector<Vec2>& grad_phi_alpha) {
  const Mesh& mesh = *ws0.mesh;
  const int n = mesh.n_nodes();
  f.f0.check();

  // <f0, K v_i>_w = w_i (K* f0)_i for nodal hats under lumped pairing.
  GridFunction kf0 = apply_K_star(ws0, f.f0, phi_alpha);
  Eigen::VectorXd load = mesh.weights.cwiseProduct(kf0.values);

  // <f1, grad(K v_i)>_w: transpose action of grad_K on w .* f1.
  // (grad K u)_j = sum_i c_ji (u_i - u_j), c_ji = grad_x rho(x_j,x_i)/Phi_j
  //               - (grad Phi_j / Phi_j^2) rho_ji.
  bool has_f1 = false;
  for (const auto& v : f.f1.values)
    if (v.squaredNorm() > 0) { has_f1 = true; break; }
  if (has_f1) {
    std::vector<std::vector<std::pair<int, double>>> contrib(static_cast<std::size_t>(n));
    const auto& w = mesh.weights;
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t jj) {
      const int j = static_cast<int>(jj);
      if (mesh.is_boundary(j)) return;
      const Vec2 wf1 = w[j] * f.f1.values[jj];
      if (wf1.squaredNorm() == 0.0) return;
      const Vec2& xj = mesh.nodes[j];
      auto& row = contrib[jj];
      double self_coeff = 0.0;
      ws0.for_each_neighbor(j, [&](int i, double r) {
        if (i == j) return;
        const Vec2 c =
            w[i] * (ws0.kernel->grad_x_cached(xj, mesh.nodes[i], ws0.eta[j],
                                              ws0.grad_eta[j], ws0.eta[i]) /
                        phi_alpha[j] -
                    grad_phi_alpha[jj] * (ws0.kernel->pair(r, ws0.eta[j], ws0.eta[i]) /
                                          (phi_alpha[j] * phi_alpha[j])));
        const double coeff = c.dot(wf1);
        row.emplace_back(i, coeff);
        self_coeff -= coeff;
      });
      row.emplace_back(j, self_coeff);
    });
    for (const auto& row : contrib)
      for (const auto& [i, v] : row) load[i] += v;
  }
  return load;
}

}  // namespace nlbvp
