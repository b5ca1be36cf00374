#ifndef NLBVP_GEOMETRY_HPP
#define NLBVP_GEOMETRY_HPP

#include <array>
#include <vector>

#include "nlbvp/common.hpp"

namespace nlbvp {

class LocalizationField;

/// Bounded C^2 domain with closed-form distance and normal. The catalog is
/// restricted to the interval and the disk; both give exact signed distance
/// in the near-boundary collar used by the localization field.
class Domain {
 public:
  enum class Kind { interval, disk };

  static Domain interval(double a, double b);
  static Domain disk(const Vec2& center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::interval ? 1 : 2; }
  double diameter() const;
  double volume() const;           // length (1D) or area (2D)
  double boundary_measure() const; // counting measure 2 (1D) or perimeter (2D)
  double max_interior_dist() const;

  double a() const { return a_; }
  double b() const { return b_; }
  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(const Vec2& x, double tol = 1e-12) const;
  bool on_boundary(const Vec2& x, double tol = 1e-12) const;

  // dist(x, boundary); error if x is outside the closure.
  double dist_to_boundary(const Vec2& x) const;
  // Unit gradient of the distance function (points away from the boundary).
  Vec2 dist_gradient(const Vec2& x) const;
  Mat2 dist_hessian(const Vec2& x) const;
  Vec2 outward_normal(const Vec2& xb) const;

  // Largest t >= 0 with x + t*dir still in the closure (dir unit).
  double exit_distance(const Vec2& x, const Vec2& dir) const;

  json to_json() const;
  static Domain from_json(const json& j);

 private:
  Kind kind_ = Kind::interval;
  double a_ = 0.0, b_ = 1.0;
  Vec2 center_ = Vec2::Zero();
  double radius_ = 1.0;
};

struct BoundaryQuad {
  std::vector<int> node;      // indices into Mesh::nodes (points on the boundary)
  Eigen::VectorXd weight;     // surface measure weights
  std::vector<Vec2> normal;
};

/// Quadrature mesh: volume nodes with positive weights that partition the
/// domain measure exactly, plus boundary nodes (zero volume weight) carrying
/// the boundary quadrature. Spacing is graded toward the boundary following
/// min(h_max, c_grade * max(eta, h_min)); with h_min >= h_max the grading is
/// inactive and the mesh is uniform at h_max.
struct Mesh {
  Domain domain;
  std::vector<Vec2> nodes;
  Eigen::VectorXd weights;            // zero on boundary nodes
  std::vector<int> boundary_nodes;
  BoundaryQuad boundary_quad;
  std::vector<std::array<int, 2>> segments;   // 1D connectivity
  std::vector<std::array<int, 3>> triangles;  // 2D connectivity
  std::vector<double> node_dist;              // cached dist(x_i, boundary)
  double h_max = 0.0, h_min = 0.0, c_grade = 0.0;

  int dim() const { return domain.dim(); }
  int n_nodes() const { return static_cast<int>(nodes.size()); }
  bool is_boundary(int i) const { return boundary_flag_[i] != 0; }
  int n_volume_nodes() const { return n_nodes() - static_cast<int>(boundary_nodes.size()); }

  // Calls fn(j) for every node (volume and boundary) with |x_j - x| <= r,
  // in a fixed, run-independent order.
  void for_each_in_ball(const Vec2& x, double r, const std::function<void(int)>& fn) const;

  // Piecewise-linear interpolation of nodal values (1D only).
  double interpolate(const Eigen::VectorXd& values, double x) const;

  json to_json() const;
  static Mesh from_json(const json& j);

  // internal lookup structures; built by finalize()
  void finalize();
  std::vector<char> boundary_flag_;
  std::vector<int> sorted_by_x_;                 // 1D
  double grid_cell_ = 0.0;                       // 2D bucket grid
  int grid_nx_ = 0, grid_ny_ = 0;
  Vec2 grid_origin_ = Vec2::Zero();
  std::vector<std::vector<int>> grid_cells_;
};

/// Builds a graded mesh for the given localization field. h_min = 0 is an
/// error: the dist^2 horizon has no finite resolving mesh, so the grading
/// must be truncated at a positive floor.
Mesh build_mesh(const Domain& domain, double h_max, double h_min, double c_grade,
                const LocalizationField& eta, std::size_t max_nodes = 4'000'000);

}  // namespace nlbvp

#endif
