#ifndef NLBVP_FUNCTIONS_HPP
#define NLBVP_FUNCTIONS_HPP

#include <string>

#include "nlbvp/common.hpp"

namespace nlbvp {

/// Named analytic function with exact gradient and Laplacian; the catalog
/// replaces an expression parser so data provenance stays auditable.
struct AnalyticFunction {
  std::string name;
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> grad;
  std::function<double(const Vec2&)> laplacian;

  AnalyticFunction scaled(double s) const;
};

// Catalog names: one, zero, sin_pi, cos_pi, quadratic (|x|^2/2), affine,
// bump, x1_squared. `dim` selects the 1D or 2D form.
AnalyticFunction analytic_function(const std::string& name, int dim, double scale = 1.0);

}  // namespace nlbvp

#endif
