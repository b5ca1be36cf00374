#include "nlbvp/operators.hpp"

#include <cmath>

namespace nlbvp {

void Workspace::for_each_neighbor(int i, const std::function<void(int, double)>& fn) const {
  const Vec2& xi = mesh->nodes[i];
  mesh->for_each_in_ball(xi, reach[i], [&](int j) {
    if (mesh->is_boundary(j)) return;
    fn(j, (mesh->nodes[j] - xi).norm());
  });
}

double Workspace::trusted_l2_norm(const Eigen::VectorXd& nodal) const {
  double s = 0.0;
  for (int i = 0; i < mesh->n_nodes(); ++i)
    if (trusted[i]) s += mesh->weights[i] * nodal[i] * nodal[i];
  return std::sqrt(s);
}

double Workspace::trusted_measure() const {
  double s = 0.0;
  for (int i = 0; i < mesh->n_nodes(); ++i)
    if (trusted[i]) s += mesh->weights[i];
  return s;
}

Workspace make_workspace(const Mesh& mesh, const TwoPointKernel& kernel, bool require_resolved,
                         int min_neighbors) {
  Workspace ws;
  ws.mesh = &mesh;
  ws.kernel = &kernel;
  const int n = mesh.n_nodes();
  ws.eta = Eigen::VectorXd::Zero(n);
  ws.grad_eta.assign(n, Vec2::Zero());
  ws.reach = Eigen::VectorXd::Zero(n);
  ws.trusted.assign(n, 0);
  const auto& eta = kernel.eta();
  for (int i = 0; i < n; ++i) {
    if (mesh.is_boundary(i)) continue;
    const EtaEval e = eta.eval(mesh.nodes[i]);
    ws.eta[i] = e.value;
    ws.grad_eta[i] = e.grad;
    ws.reach[i] = kernel.reach(e.value);
  }
  // Trust floor: kernels with support below the floor spacing are
  // resolution-limited by construction and flagged, never guessed at.
  const double R0 = kernel.profile().R0();
  const double floor_spacing = std::min(mesh.h_max, mesh.c_grade * mesh.h_min);
  ws.trust_eta_floor = std::max(mesh.h_min, min_neighbors * floor_spacing / R0);

  int worst_node = -1;
  for (int i = 0; i < n; ++i) {
    if (mesh.is_boundary(i)) continue;
    int count = -1;  // skip self
    ws.for_each_neighbor(i, [&](int, double) { ++count; });
    const bool resolved = count >= min_neighbors;
    const bool above_floor = ws.eta[i] >= ws.trust_eta_floor;
    ws.trusted[i] = (resolved && above_floor) ? 1 : 0;
    if (!ws.trusted[i]) ++ws.n_untrusted_volume;
    if (!resolved && above_floor && worst_node < 0) worst_node = i;
  }
  if (require_resolved && worst_node >= 0)
    fail_resolution("mesh too coarse for the horizon at a node above the grading floor",
                    json{{"node", worst_node},
                         {"x", {mesh.nodes[worst_node][0], mesh.nodes[worst_node][1]}},
                         {"eta", ws.eta[worst_node]},
                         {"reach", ws.reach[worst_node]},
                         {"h_max", mesh.h_max}});
  if (require_resolved && ws.n_untrusted_volume == mesh.n_volume_nodes())
    fail_resolution("mesh too coarse: no node resolves its kernel neighborhood",
                    json{{"h_max", mesh.h_max}, {"delta", kernel.delta()}});
  return ws;
}

Eigen::VectorXd phi_vector(const Workspace& ws) {
  const int n = ws.n_nodes();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  const auto& w = ws.mesh->weights;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (ws.mesh->is_boundary(i)) return;
    double s = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      if (j == i)
        s += ws.kernel->self_coefficient(w[i], ws.eta[i]);
      else
        s += w[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]);
    });
    if (!(s > 0.0))
      fail_resolution("empty kernel neighborhood; mesh cannot resolve eta here",
                      json{{"node", i}, {"eta", ws.eta[i]}});
    phi[i] = s;
  });
  return phi;
}

std::vector<Vec2> grad_phi_vector(const Workspace& ws) {
  const int n = ws.n_nodes();
  std::vector<Vec2> g(static_cast<std::size_t>(n), Vec2::Zero());
  const auto& w = ws.mesh->weights;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (ws.mesh->is_boundary(i)) return;
    Vec2 s = Vec2::Zero();
    const Vec2& xi = ws.mesh->nodes[i];
    ws.for_each_neighbor(i, [&](int j, double) {
      if (j == i)
        s += ws.kernel->self_coefficient_grad(w[i], ws.eta[i], ws.grad_eta[i]);
      else
        s += w[j] * ws.kernel->grad_x_cached(xi, ws.mesh->nodes[j], ws.eta[i], ws.grad_eta[i],
                                             ws.eta[j]);
    });
    g[static_cast<std::size_t>(i)] = s;
  });
  return g;
}

GridFunction apply_L(const Workspace& ws, const GridFunction& u) {
  if (ws.kernel->alpha() != 2.0)
    fail_validation("apply_L requires the alpha = 2 kernel", json{{"alpha", ws.kernel->alpha()}});
  u.check();
  GridFunction out(*ws.mesh);
  const auto& w = ws.mesh->weights;
  parallel_for(static_cast<std::size_t>(ws.n_nodes()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (ws.mesh->is_boundary(i)) return;
    double s = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      if (j == i) return;  // zero difference
      s += w[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]) * (u.values[i] - u.values[j]);
    });
    out.values[i] = 2.0 * s;
  });
  return out;
}

GridFunction apply_K(const Workspace& ws, const GridFunction& u, const Eigen::VectorXd& phi) {
  u.check();
  GridFunction out(*ws.mesh);
  const auto& w = ws.mesh->weights;
  parallel_for(static_cast<std::size_t>(ws.n_nodes()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (ws.mesh->is_boundary(i)) return;
    double s = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      if (j == i)
        s += ws.kernel->self_coefficient(w[i], ws.eta[i]) * u.values[i];
      else
        s += w[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]) * u.values[j];
    });
    out.values[i] = s / phi[i];
  });
  return out;
}

GridFunction apply_K_star(const Workspace& ws, const GridFunction& u,
                          const Eigen::VectorXd& phi) {
  u.check();
  GridFunction out(*ws.mesh);
  const auto& w = ws.mesh->weights;
  parallel_for(static_cast<std::size_t>(ws.n_nodes()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (ws.mesh->is_boundary(i)) return;
    double s = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      if (j == i)
        s += ws.kernel->self_coefficient(w[i], ws.eta[i]) * u.values[i] / phi[i];
      else
        s += w[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]) * u.values[j] / phi[j];
    });
    out.values[i] = s;
  });
  return out;
}

VectorGridFunction grad_K(const Workspace& ws, const GridFunction& u,
                          const Eigen::VectorXd& phi, const std::vector<Vec2>& grad_phi) {
  u.check();
  VectorGridFunction out(*ws.mesh);
  const auto& w = ws.mesh->weights;
  parallel_for(static_cast<std::size_t>(ws.n_nodes()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (ws.mesh->is_boundary(i)) return;
    const Vec2& xi = ws.mesh->nodes[i];
    Vec2 t1 = Vec2::Zero();
    double t2 = 0.0;
    ws.for_each_neighbor(i, [&](int j, double r) {
      const double du = u.values[j] - u.values[i];
      if (j != i) {
        t1 += w[j] * du *
              ws.kernel->grad_x_cached(xi, ws.mesh->nodes[j], ws.eta[i], ws.grad_eta[i],
                                       ws.eta[j]);
        t2 += w[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]) * du;
      }
    });
    out.values[static_cast<std::size_t>(i)] =
        t1 / phi[i] - grad_phi[static_cast<std::size_t>(i)] * (t2 / (phi[i] * phi[i]));
  });
  return out;
}

VectorGridFunction f1_field(const Workspace& ws) {
  if (ws.kernel->alpha() != 2.0)
    fail_validation("f1_field requires the alpha = 2 kernel");
  VectorGridFunction out(*ws.mesh);
  const auto& w = ws.mesh->weights;
  parallel_for(static_cast<std::size_t>(ws.n_nodes()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    if (ws.mesh->is_boundary(i)) return;
    const Vec2& xi = ws.mesh->nodes[i];
    Vec2 s = Vec2::Zero();
    ws.for_each_neighbor(i, [&](int j, double r) {
      if (j == i) return;
      s += w[j] * ws.kernel->pair(r, ws.eta[i], ws.eta[j]) * (ws.mesh->nodes[j] - xi);
    });
    out.values[static_cast<std::size_t>(i)] = s;
  });
  return out;
}

}  // namespace nlbvp
