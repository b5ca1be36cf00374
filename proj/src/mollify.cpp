#include "nlbvp/mollify.hpp"

#include <cmath>

#include "nlbvp/solvers.hpp"

namespace nlbvp {

namespace {

// F1^delta(x_i) = sum_j w_j [ grad_y rho(x_i,x_j) . f1_j / Phi_j
//                             - rho_ij (grad Phi_j / Phi_j^2) . f1_j ].
// grad_y rho(x,y) is the x-gradient evaluated with the arguments swapped.
GridFunction f1_delta(const RoughData& f, const Workspace& ws, const Eigen::VectorXd& phi,
                      const std::vector<Vec2>& grad_phi) {
  const Mesh& mesh = *ws.mesh;
  const int n = mesh.n_nodes();
  GridFunction out(mesh);
  const auto& w = mesh.weights;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (mesh.is_boundary(i)) return;
    double s = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      const Vec2& f1j = f.f1.values[static_cast<std::size_t>(j)];
      if (f1j.squaredNorm() == 0.0) return;
      const Vec2 gphij = grad_phi[static_cast<std::size_t>(j)];
      if (j == i) {
        // diagonal terms use the cell-exact self coefficient and its gradient,
        // matching the Phi quadrature so <f_delta, 1> = <f, 1> holds exactly
        const Vec2 gy = ws.kernel->self_coefficient_grad(w[i], ws.eta[i], ws.grad_eta[i]);
        const double S = ws.kernel->self_coefficient(w[i], ws.eta[i]);
        s += gy.dot(f1j) / phi[i] - S * gphij.dot(f1j) / (phi[i] * phi[i]);
        return;
      }
      const Vec2 gy = ws.kernel->grad_x_cached(mesh.nodes[j], mesh.nodes[i], ws.eta[j],
                                               ws.grad_eta[j], ws.eta[i]);
      const double rho_ij = ws.kernel->pair(r, ws.eta[i], ws.eta[j]);
      s += w[j] * (gy.dot(f1j) / phi[j] - rho_ij * gphij.dot(f1j) / (phi[j] * phi[j]));
    });
    out.values[i] = s;
  });
  return out;
}

MollifyDiagnostics diagnostics_for(const GridFunction& pointwise, const Workspace& ws) {
  MollifyDiagnostics d;
  d.pointwise = pointwise;
  const Mesh& mesh = *ws.mesh;
  double s1 = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const double ef = ws.eta[i] * pointwise.values[i];
    s1 += mesh.weights[i] * ef * ef;
  }
  d.eta_weighted_l2 = std::sqrt(s1);
  if (mesh.dim() == 1) {
    const Eigen::VectorXd g = difference_gradient_1d(pointwise);
    double s2 = 0.0;
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      const double e2g = ws.eta[i] * ws.eta[i] * g[i];
      s2 += mesh.weights[i] * e2g * e2g;
    }
    d.eta2_grad_l2 = std::sqrt(s2);
  }
  return d;
}

}  // namespace

Eigen::VectorXd difference_gradient_1d(const GridFunction& f) {
  const Mesh& mesh = *f.mesh;
  if (mesh.dim() != 1) fail_validation("difference gradient is 1D-only");
  const auto& order = mesh.sorted_by_x_;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.n_nodes());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int i = order[k];
    const int il = order[k > 0 ? k - 1 : k];
    const int ir = order[k + 1 < order.size() ? k + 1 : k];
    const double dx = mesh.nodes[ir][0] - mesh.nodes[il][0];
    if (dx > 0) g[i] = (f.values[ir] - f.values[il]) / dx;
  }
  return g;
}

MollifyResult mollify_dirichlet(const RoughData& f, const Workspace& ws,
                                const Eigen::VectorXd& phi,
                                const std::vector<Vec2>& grad_phi) {
  MollifyResult res;
  res.load = load_hminus1_mollified(ws, f, phi, grad_phi);
  GridFunction pw = apply_K_star(ws, f.f0, phi);
  bool has_f1 = false;
  for (const auto& v : f.f1.values)
    if (v.squaredNorm() > 0) { has_f1 = true; break; }
  if (has_f1) {
    const GridFunction corr = f1_delta(f, ws, phi, grad_phi);
    pw.values += corr.values;
  }
  res.pointwise = pw;
  res.diagnostics = diagnostics_for(pw, ws);
  return res;
}

MollifyResult mollify_neumann(const RoughData& f, const Workspace& ws,
                              const Eigen::VectorXd& phi,
                              const std::vector<Vec2>& grad_phi) {
  const Mesh& mesh = *ws.mesh;
  if (!(f.support_radius > 0.0))
    fail_validation("Neumann mollification requires a declared f1 support radius");
  json offenders = json::array();
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    if (mesh.is_boundary(i)) continue;
    if (f.f1.values[static_cast<std::size_t>(i)].squaredNorm() > 0.0 &&
        mesh.node_dist[i] < f.support_radius)
      offenders.push_back(i);
  }
  if (!offenders.empty())
    fail_validation("f1 does not vanish on the declared support collar",
                    json{{"nodes", offenders}, {"support_radius", f.support_radius}});

  MollifyResult res;
  GridFunction pw = apply_K_star(ws, f.f0, phi);
  const GridFunction corr = f1_delta(f, ws, phi, grad_phi);
  pw.values += corr.values;
  res.pointwise = pw;
  res.load = mesh.weights.cwiseProduct(pw.values);
  res.diagnostics = diagnostics_for(pw, ws);
  return res;
}

double discrete_hminus1_norm(const Mesh& mesh, const Eigen::VectorXd& load) {
  if (mesh.dim() != 1) fail_validation("discrete H^-1 norm implemented for 1D meshes");
  // P1 stiffness of -u'' on the sorted nodes, homogeneous Dirichlet ends.
  const auto& order = mesh.sorted_by_x_;
  const int n = static_cast<int>(order.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k + 1 < n; ++k) {
    const int i = order[static_cast<std::size_t>(k)], j = order[static_cast<std::size_t>(k + 1)];
    const double h = mesh.nodes[j][0] - mesh.nodes[i][0];
    if (h <= 0) continue;
    const double s = 1.0 / h;
    trips.emplace_back(i, i, s);
    trips.emplace_back(j, j, s);
    trips.emplace_back(i, j, -s);
    trips.emplace_back(j, i, -s);
  }
  Eigen::SparseMatrix<double> A(mesh.n_nodes(), mesh.n_nodes());
  A.setFromTriplets(trips.begin(), trips.end());
  std::vector<char> constrained(static_cast<std::size_t>(mesh.n_nodes()), 0);
  for (int b : mesh.boundary_nodes) constrained[static_cast<std::size_t>(b)] = 1;

  // ||f||_{H^-1}^2 = <f, u> with A u = f on the interior
  std::vector<int> freeids;
  std::vector<int> lid(static_cast<std::size_t>(mesh.n_nodes()), -1);
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (!constrained[static_cast<std::size_t>(i)]) {
      lid[static_cast<std::size_t>(i)] = static_cast<int>(freeids.size());
      freeids.push_back(i);
    }
  std::vector<Eigen::Triplet<double>> rt;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      const int li = lid[static_cast<std::size_t>(it.row())];
      const int lj = lid[static_cast<std::size_t>(it.col())];
      if (li >= 0 && lj >= 0) rt.emplace_back(li, lj, it.value());
    }
  Eigen::SparseMatrix<double> Af(static_cast<int>(freeids.size()),
                                 static_cast<int>(freeids.size()));
  Af.setFromTriplets(rt.begin(), rt.end());
  Eigen::VectorXd b(freeids.size());
  for (std::size_t k = 0; k < freeids.size(); ++k) b[static_cast<int>(k)] = load[freeids[k]];
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) { out = Af * v; };
  PcgResult cg = pcg(apply, Af.diagonal(), b, x, 1e-12, 20000);
  if (!cg.converged && b.norm() > 0)
    fail_solver("H^-1 diagnostic solve did not converge");
  return std::sqrt(std::max(0.0, b.dot(x)));
}

}  // namespace nlbvp
