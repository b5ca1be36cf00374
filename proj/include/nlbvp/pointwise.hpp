#ifndef NLBVP_POINTWISE_HPP
#define NLBVP_POINTWISE_HPP

#include "nlbvp/functions.hpp"
#include "nlbvp/kernels.hpp"

namespace nlbvp {

/// Mesh-independent quadrature of the operator integrands for analytic u, v.
/// These drive the Green's-identity checks: the nodal sums built from matched
/// quadrature satisfy the discrete integration-by-parts identity exactly, so
/// the boundary term is observable only against the continuum operator values.

// (L_delta u)(x) = 2 int rho_{delta,2}(x,y) (u(x)-u(y)) dy.
double pointwise_L(const TwoPointKernel& k, const Vec2& x, const AnalyticFunction& u,
                   double tol = 1e-10);

// B-density: int rho_{delta,2}(x,y) (u(x)-u(y)) (v(x)-v(y)) dy.
double pointwise_B_density(const TwoPointKernel& k, const Vec2& x, const AnalyticFunction& u,
                           const AnalyticFunction& v, double tol = 1e-10);

}  // namespace nlbvp

#endif
