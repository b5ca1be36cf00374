#ifndef NLBVP_GRID_FUNCTION_HPP
#define NLBVP_GRID_FUNCTION_HPP

#include <string>

#include "nlbvp/geometry.hpp"

namespace nlbvp {

/// Nodal function on a mesh, interpreted as its piecewise-linear interpolant.
struct GridFunction {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd values;

  GridFunction() = default;
  explicit GridFunction(const Mesh& m) : mesh(&m), values(Eigen::VectorXd::Zero(m.n_nodes())) {}
  GridFunction(const Mesh& m, Eigen::VectorXd v) : mesh(&m), values(std::move(v)) {
    check();
  }
  static GridFunction sample(const Mesh& m, const std::function<double(const Vec2&)>& f);

  void check() const;
  double l2_norm() const;                       // weighted nodal L2
  double weighted_sum() const;                  // <f, 1>_w
  double dot(const GridFunction& other) const;  // <f, g>_w

  std::string to_csv() const;  // node_index,value
  json to_json() const;
  static GridFunction from_csv(const Mesh& m, const std::string& csv);
};

/// Vector-valued nodal field (gradients, F1, rough-data f1).
struct VectorGridFunction {
  const Mesh* mesh = nullptr;
  std::vector<Vec2> values;

  VectorGridFunction() = default;
  explicit VectorGridFunction(const Mesh& m)
      : mesh(&m), values(m.n_nodes(), Vec2::Zero()) {}
  static VectorGridFunction sample(const Mesh& m,
                                   const std::function<Vec2(const Vec2&)>& f);
};

/// H^-1 element in the paper's dual representation <f,v> = <f0,v> + <f1, grad v>.
struct RoughData {
  GridFunction f0;
  VectorGridFunction f1;
  double support_radius = 0.0;  // Neumann use: |f1| must vanish for dist < support_radius
};

}  // namespace nlbvp

#endif
