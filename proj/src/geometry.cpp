#include "nlbvp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlbvp/localization.hpp"

namespace nlbvp {

namespace {
constexpr double kPi = std::numbers::pi;
}

Domain Domain::interval(double a, double b) {
  if (!(b > a)) fail_validation("interval requires a < b", json{{"a", a}, {"b", b}});
  Domain d;
  d.kind_ = Kind::interval;
  d.a_ = a;
  d.b_ = b;
  return d;
}

Domain Domain::disk(const Vec2& center, double radius) {
  if (!(radius > 0)) fail_validation("disk requires radius > 0", json{{"radius", radius}});
  Domain d;
  d.kind_ = Kind::disk;
  d.center_ = center;
  d.radius_ = radius;
  return d;
}

double Domain::diameter() const {
  return kind_ == Kind::interval ? (b_ - a_) : 2.0 * radius_;
}

double Domain::volume() const {
  return kind_ == Kind::interval ? (b_ - a_) : kPi * radius_ * radius_;
}

double Domain::boundary_measure() const {
  return kind_ == Kind::interval ? 2.0 : 2.0 * kPi * radius_;
}

double Domain::max_interior_dist() const {
  return kind_ == Kind::interval ? 0.5 * (b_ - a_) : radius_;
}

bool Domain::contains(const Vec2& x, double tol) const {
  const double slack = tol * diameter();
  if (kind_ == Kind::interval) return x[0] >= a_ - slack && x[0] <= b_ + slack;
  return (x - center_).norm() <= radius_ + slack;
}

bool Domain::on_boundary(const Vec2& x, double tol) const {
  const double slack = tol * diameter();
  if (kind_ == Kind::interval)
    return std::abs(x[0] - a_) <= slack || std::abs(x[0] - b_) <= slack;
  return std::abs((x - center_).norm() - radius_) <= slack;
}

double Domain::dist_to_boundary(const Vec2& x) const {
  if (!contains(x))
    fail_validation("point outside the domain closure",
                    json{{"x", {x[0], x[1]}}, {"domain", to_json()}});
  if (kind_ == Kind::interval) return std::max(0.0, std::min(x[0] - a_, b_ - x[0]));
  return std::max(0.0, radius_ - (x - center_).norm());
}

Vec2 Domain::dist_gradient(const Vec2& x) const {
  if (kind_ == Kind::interval)
    return Vec2(x[0] - a_ <= b_ - x[0] ? 1.0 : -1.0, 0.0);
  const Vec2 r = x - center_;
  const double n = r.norm();
  if (n < 1e-14 * radius_) return Vec2::Zero();  // center: field is flat there anyway
  return -r / n;
}

Mat2 Domain::dist_hessian(const Vec2& x) const {
  if (kind_ == Kind::interval) return Mat2::Zero();
  const Vec2 r = x - center_;
  const double n = r.norm();
  if (n < 1e-14 * radius_) return Mat2::Zero();
  const Vec2 rh = r / n;
  return -(Mat2::Identity() - rh * rh.transpose()) / n;
}

Vec2 Domain::outward_normal(const Vec2& xb) const {
  if (!on_boundary(xb, 1e-10))
    fail_validation("outward_normal requires a boundary point",
                    json{{"x", {xb[0], xb[1]}}});
  if (kind_ == Kind::interval) return Vec2(std::abs(xb[0] - a_) < std::abs(xb[0] - b_) ? -1.0 : 1.0, 0.0);
  return (xb - center_).normalized();
}

double Domain::exit_distance(const Vec2& x, const Vec2& dir) const {
  if (kind_ == Kind::interval) {
    if (dir[0] > 0) return b_ - x[0];
    if (dir[0] < 0) return x[0] - a_;
    return 0.0;
  }
  // |x + t dir - c|^2 = R^2, take the positive root
  const Vec2 r = x - center_;
  const double bq = r.dot(dir);
  const double cq = r.squaredNorm() - radius_ * radius_;
  const double disc = bq * bq - cq;
  if (disc <= 0) return 0.0;
  return -bq + std::sqrt(disc);
}

json Domain::to_json() const {
  if (kind_ == Kind::interval) return json{{"kind", "interval"}, {"a", a_}, {"b", b_}};
  return json{{"kind", "disk"}, {"center", {center_[0], center_[1]}}, {"radius", radius_}};
}

Domain Domain::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "interval") return interval(j.at("a").get<double>(), j.at("b").get<double>());
  if (kind == "disk") {
    auto c = j.at("center");
    return disk(Vec2(c.at(0).get<double>(), c.at(1).get<double>()), j.at("radius").get<double>());
  }
  fail_validation("unknown domain kind", json{{"kind", kind}});
}

// ---------------------------------------------------------------------------
// Mesh construction

namespace {

// Marches cell edges from depth 0 (the boundary) inward, spacing given by the
// grading rule evaluated at the cell midpoint (one fixed-point refinement).
// Once the rule saturates at h_max the remaining depth is split into equal
// cells: the deep region stays exactly uniform, which preserves the symmetric
// cancellations of the operator quadrature there.
std::vector<double> march_depth_cells(double depth_max, double h_max, double h_min,
                                      double c_grade, bool uniform,
                                      const std::function<double(double)>& eta_at_depth,
                                      std::size_t max_cells) {
  auto spacing = [&](double depth) {
    if (uniform) return h_max;
    const double target = c_grade * std::max(eta_at_depth(depth), h_min);
    return std::min(h_max, std::max(target, 1e-15));
  };
  std::vector<double> edges{0.0};
  double e = 0.0;
  while (e < depth_max) {
    double h = spacing(e);
    h = spacing(e + 0.5 * h);
    h = std::max(h, 1e-15);
    if (h >= h_max * (1.0 - 1e-12)) {
      const int n_uniform = std::max(1, static_cast<int>(std::round((depth_max - e) / h_max)));
      const double hu = (depth_max - e) / n_uniform;
      for (int k = 1; k <= n_uniform; ++k) edges.push_back(e + k * hu);
      edges.back() = depth_max;
      return edges;
    }
    double next = std::min(e + h, depth_max);
    if (edges.size() > max_cells)
      fail_validation("mesh exceeds the node budget; raise h_min or max_nodes",
                      json{{"cells", edges.size()}});
    edges.push_back(next);
    e = next;
  }
  return edges;
}

Mesh build_interval_mesh(const Domain& dom, double h_max, double h_min, double c_grade,
                         const LocalizationField& eta, std::size_t max_nodes) {
  const double a = dom.a(), b = dom.b(), mid = 0.5 * (a + b);
  const bool uniform = h_min >= h_max;
  auto eta_at_depth = [&](double depth) {
    return eta.value(Vec2(a + std::min(depth, mid - a), 0.0));
  };
  auto edges_l = march_depth_cells(mid - a, h_max, h_min, c_grade, uniform, eta_at_depth,
                                   max_nodes);
  // Mirror the left-half edges onto the right half: symmetric mesh.
  std::vector<double> xs;
  for (double d : edges_l) xs.push_back(a + d);
  for (auto it = edges_l.rbegin(); it != edges_l.rend(); ++it) {
    double x = b - *it;
    if (x > xs.back() + 1e-15) xs.push_back(x);
  }

  Mesh mesh;
  mesh.domain = dom;
  mesh.h_max = h_max;
  mesh.h_min = h_min;
  mesh.c_grade = c_grade;
  mesh.nodes.emplace_back(a, 0.0);  // boundary node first keeps x-sorted order
  for (std::size_t k = 0; k + 1 < xs.size(); ++k)
    mesh.nodes.emplace_back(0.5 * (xs[k] + xs[k + 1]), 0.0);
  mesh.nodes.emplace_back(b, 0.0);

  const int n = mesh.n_nodes();
  mesh.weights = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k + 1 < xs.size(); ++k)
    mesh.weights[static_cast<int>(k) + 1] = xs[k + 1] - xs[k];
  mesh.boundary_nodes = {0, n - 1};
  mesh.boundary_quad.node = {0, n - 1};
  mesh.boundary_quad.weight = Eigen::VectorXd::Ones(2);  // counting measure
  mesh.boundary_quad.normal = {Vec2(-1.0, 0.0), Vec2(1.0, 0.0)};
  for (int i = 0; i + 1 < n; ++i) mesh.segments.push_back({i, i + 1});
  mesh.finalize();
  return mesh;
}

Mesh build_disk_mesh(const Domain& dom, double h_max, double h_min, double c_grade,
                     const LocalizationField& eta, std::size_t max_nodes) {
  const double R = dom.radius();
  const Vec2 c = dom.center();
  const bool uniform = h_min >= h_max;
  auto eta_at_depth = [&](double depth) {
    return eta.value(c + Vec2(std::max(R - depth, 0.0), 0.0));
  };
  auto edges = march_depth_cells(R, h_max, h_min, c_grade, uniform, eta_at_depth, max_nodes);

  Mesh mesh;
  mesh.domain = dom;
  mesh.h_max = h_max;
  mesh.h_min = h_min;
  mesh.c_grade = c_grade;

  // Ring of volume nodes per depth cell; ring areas partition the disk exactly.
  std::vector<std::vector<int>> rings;  // outermost first
  std::vector<double> wbuf;
  std::size_t total = 0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double r_out = R - edges[k], r_in = R - edges[k + 1];
    const double depth_mid = 0.5 * (edges[k] + edges[k + 1]);
    const double r_node = R - depth_mid;
    const bool last = (k + 2 == edges.size());
    if (last && r_in <= 1e-14) {
      // innermost cell collapses to the center
      if (r_out < 0.75 * h_max) {
        rings.push_back({static_cast<int>(mesh.nodes.size())});
        mesh.nodes.emplace_back(c);
        wbuf.push_back(kPi * r_out * r_out);
        break;
      }
    }
    const double spacing =
        uniform ? h_max
                : std::min(h_max, std::max(c_grade * std::max(eta_at_depth(depth_mid), h_min),
                                           1e-15));
    int n_ring = std::max(6, static_cast<int>(std::ceil(2.0 * kPi * r_node / spacing)));
    if (r_node < 0.5 * spacing) n_ring = std::max(1, n_ring / 2);
    const double area = kPi * (r_out * r_out - r_in * r_in);
    const double w = area / n_ring;
    const double offset = (k % 2 == 0) ? 0.0 : kPi / n_ring;  // stagger rings
    std::vector<int> ring;
    ring.reserve(n_ring);
    for (int j = 0; j < n_ring; ++j) {
      const double th = 2.0 * kPi * j / n_ring + offset;
      ring.push_back(static_cast<int>(mesh.nodes.size()));
      mesh.nodes.emplace_back(c + r_node * Vec2(std::cos(th), std::sin(th)));
      wbuf.push_back(w);
    }
    rings.push_back(std::move(ring));
    total += static_cast<std::size_t>(n_ring);
    if (total > max_nodes)
      fail_validation("disk mesh exceeds the node budget; raise h_min or max_nodes",
                      json{{"nodes", total}});
  }

  // Boundary ring on |x-c| = R.
  const int n_b = std::max(8, static_cast<int>(std::ceil(2.0 * kPi * R / h_max)));
  std::vector<int> bring;
  for (int j = 0; j < n_b; ++j) {
    const double th = 2.0 * kPi * j / n_b;
    bring.push_back(static_cast<int>(mesh.nodes.size()));
    mesh.nodes.emplace_back(c + R * Vec2(std::cos(th), std::sin(th)));
    wbuf.push_back(0.0);
    mesh.boundary_nodes.push_back(bring.back());
  }
  mesh.boundary_quad.node = bring;
  mesh.boundary_quad.weight = Eigen::VectorXd::Constant(n_b, 2.0 * kPi * R / n_b);
  for (int j = 0; j < n_b; ++j)
    mesh.boundary_quad.normal.push_back((mesh.nodes[bring[j]] - c).normalized());

  mesh.weights = Eigen::Map<Eigen::VectorXd>(wbuf.data(), static_cast<int>(wbuf.size()));

  // Triangulate: zipper adjacent rings (boundary ring outermost), fan at center.
  auto angle_of = [&](int i) { return std::atan2(mesh.nodes[i][1] - c[1], mesh.nodes[i][0] - c[0]); };
  auto zipper = [&](const std::vector<int>& outer, const std::vector<int>& inner) {
    if (outer.empty() || inner.empty()) return;
    if (inner.size() == 1) {
      const int ctr = inner[0];
      for (std::size_t j = 0; j < outer.size(); ++j)
        mesh.triangles.push_back({outer[j], outer[(j + 1) % outer.size()], ctr});
      return;
    }
    // Rings have uniform angular spacing, so the walk is by accumulated angle.
    const double phi_o = angle_of(outer[0]), phi_i = angle_of(inner[0]);
    const double step_o = 2.0 * kPi / outer.size(), step_i = 2.0 * kPi / inner.size();
    std::size_t i = 0, j = 0;
    while (i < outer.size() || j < inner.size()) {
      const bool can_o = i < outer.size();
      const bool can_i = j < inner.size();
      const bool advance_outer =
          can_o && (!can_i || phi_o + (i + 1) * step_o <= phi_i + (j + 1) * step_i);
      const int o0 = outer[i % outer.size()], o1 = outer[(i + 1) % outer.size()];
      const int i0 = inner[j % inner.size()], i1 = inner[(j + 1) % inner.size()];
      if (advance_outer) {
        mesh.triangles.push_back({o0, o1, i0});
        ++i;
      } else {
        mesh.triangles.push_back({o0, i1, i0});
        ++j;
      }
    }
  };
  if (!rings.empty()) zipper(bring, rings.front());
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) zipper(rings[k], rings[k + 1]);

  mesh.finalize();
  return mesh;
}

}  // namespace

void Mesh::finalize() {
  const int n = n_nodes();
  node_dist.resize(n);
  boundary_flag_.assign(n, 0);
  for (int b : boundary_nodes) boundary_flag_[b] = 1;
  for (int i = 0; i < n; ++i)
    node_dist[i] = boundary_flag_[i] ? 0.0 : domain.dist_to_boundary(nodes[i]);

  if (dim() == 1) {
    sorted_by_x_.resize(n);
    for (int i = 0; i < n; ++i) sorted_by_x_[i] = i;
    std::sort(sorted_by_x_.begin(), sorted_by_x_.end(),
              [&](int i, int j) { return nodes[i][0] < nodes[j][0]; });
  } else {
    grid_cell_ = std::max(h_max, 1e-12);
    grid_origin_ = domain.center() - Vec2(domain.radius(), domain.radius());
    grid_nx_ = grid_ny_ =
        std::max(1, static_cast<int>(std::ceil(2.0 * domain.radius() / grid_cell_)) + 1);
    grid_cells_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
    for (int i = 0; i < n; ++i) {
      int cx = std::clamp(static_cast<int>((nodes[i][0] - grid_origin_[0]) / grid_cell_), 0,
                          grid_nx_ - 1);
      int cy = std::clamp(static_cast<int>((nodes[i][1] - grid_origin_[1]) / grid_cell_), 0,
                          grid_ny_ - 1);
      grid_cells_[static_cast<std::size_t>(cy) * grid_nx_ + cx].push_back(i);
    }
  }
}

void Mesh::for_each_in_ball(const Vec2& x, double r, const std::function<void(int)>& fn) const {
  if (dim() == 1) {
    const double lo = x[0] - r, hi = x[0] + r;
    auto begin = std::lower_bound(sorted_by_x_.begin(), sorted_by_x_.end(), lo,
                                  [&](int i, double v) { return nodes[i][0] < v; });
    for (auto it = begin; it != sorted_by_x_.end() && nodes[*it][0] <= hi; ++it) fn(*it);
    return;
  }
  const int cx0 = std::clamp(static_cast<int>((x[0] - r - grid_origin_[0]) / grid_cell_), 0,
                             grid_nx_ - 1);
  const int cx1 = std::clamp(static_cast<int>((x[0] + r - grid_origin_[0]) / grid_cell_), 0,
                             grid_nx_ - 1);
  const int cy0 = std::clamp(static_cast<int>((x[1] - r - grid_origin_[1]) / grid_cell_), 0,
                             grid_ny_ - 1);
  const int cy1 = std::clamp(static_cast<int>((x[1] + r - grid_origin_[1]) / grid_cell_), 0,
                             grid_ny_ - 1);
  const double r2 = r * r;
  for (int cy = cy0; cy <= cy1; ++cy)
    for (int cx = cx0; cx <= cx1; ++cx)
      for (int j : grid_cells_[static_cast<std::size_t>(cy) * grid_nx_ + cx])
        if ((nodes[j] - x).squaredNorm() <= r2) fn(j);
}

double Mesh::interpolate(const Eigen::VectorXd& values, double x) const {
  if (dim() != 1) fail_validation("interpolate is 1D-only");
  const auto& order = sorted_by_x_;
  auto it = std::lower_bound(order.begin(), order.end(), x,
                             [&](int i, double v) { return nodes[i][0] < v; });
  if (it == order.begin()) return values[*it];
  if (it == order.end()) return values[order.back()];
  const int j = *it, i = *(it - 1);
  const double t = (x - nodes[i][0]) / (nodes[j][0] - nodes[i][0]);
  return (1.0 - t) * values[i] + t * values[j];
}

json Mesh::to_json() const {
  json jnodes = json::array(), jw = json::array(), jb = json::array(), jel = json::array();
  for (const auto& p : nodes) jnodes.push_back({p[0], p[1]});
  for (int i = 0; i < weights.size(); ++i) jw.push_back(weights[i]);
  for (int b : boundary_nodes) jb.push_back(b);
  if (dim() == 1)
    for (const auto& s : segments) jel.push_back({s[0], s[1]});
  else
    for (const auto& t : triangles) jel.push_back({t[0], t[1], t[2]});
  return json{{"domain", domain.to_json()}, {"nodes", jnodes},     {"weights", jw},
              {"boundary_nodes", jb},       {"elements", jel},     {"h_max", h_max},
              {"h_min", h_min},             {"c_grade", c_grade}};
}

Mesh Mesh::from_json(const json& j) {
  Mesh mesh;
  mesh.domain = Domain::from_json(j.at("domain"));
  for (const auto& p : j.at("nodes")) mesh.nodes.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  const auto& jw = j.at("weights");
  mesh.weights = Eigen::VectorXd::Zero(static_cast<int>(jw.size()));
  for (int i = 0; i < mesh.weights.size(); ++i) mesh.weights[i] = jw.at(i).get<double>();
  for (const auto& b : j.at("boundary_nodes")) mesh.boundary_nodes.push_back(b.get<int>());
  for (const auto& e : j.at("elements")) {
    if (e.size() == 2)
      mesh.segments.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    else
      mesh.triangles.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
  }
  mesh.h_max = j.value("h_max", 0.0);
  mesh.h_min = j.value("h_min", 0.0);
  mesh.c_grade = j.value("c_grade", 0.0);
  // boundary quadrature is reconstructible from the boundary nodes
  for (int b : mesh.boundary_nodes) mesh.boundary_quad.node.push_back(b);
  const int nb = static_cast<int>(mesh.boundary_nodes.size());
  mesh.boundary_quad.weight =
      Eigen::VectorXd::Constant(nb, mesh.domain.boundary_measure() / std::max(1, nb));
  if (mesh.domain.dim() == 1 && nb == 2) mesh.boundary_quad.weight.setOnes();
  for (int b : mesh.boundary_nodes)
    mesh.boundary_quad.normal.push_back(mesh.domain.outward_normal(mesh.nodes[b]));
  mesh.finalize();
  return mesh;
}

Mesh build_mesh(const Domain& domain, double h_max, double h_min, double c_grade,
                const LocalizationField& eta, std::size_t max_nodes) {
  if (!(h_max > 0)) fail_validation("h_max must be positive", json{{"h_max", h_max}});
  if (!(h_min > 0))
    fail_validation(
        "h_min must be positive: the dist^2 horizon cannot be resolved by any finite mesh, "
        "grading is truncated at h_min",
        json{{"h_min", h_min}});
  if (!(c_grade > 0)) fail_validation("c_grade must be positive", json{{"c_grade", c_grade}});
  if (domain.dim() == 1)
    return build_interval_mesh(domain, h_max, h_min, c_grade, eta, max_nodes);
  return build_disk_mesh(domain, h_max, h_min, c_grade, eta, max_nodes);
}

}  // namespace nlbvp
