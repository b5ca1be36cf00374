#ifndef NLBVP_QUADRATURE_HPP
#define NLBVP_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nlbvp/common.hpp"

namespace nlbvp {

// Adaptive Simpson with absolute tolerance. Throws a validation error when the
// recursion cannot meet the tolerance (non-convergent integrand).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

// Same integral split at interior breakpoints (integrand kinks / region joins).
double adaptive_simpson_panels(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> breakpoints, double tol,
                               int max_depth = 40);

// Fixed-order Gauss-Legendre on [a,b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int order);

}  // namespace nlbvp

#endif
