#include "nlbvp/pointwise.hpp"

#include <cmath>
#include <numbers>

#include "nlbvp/quadrature.hpp"

namespace nlbvp {

namespace {

constexpr double kPi = std::numbers::pi;

// Radii (measured from x along direction dir) at which dist(y, boundary)
// crosses the localization profile's breakpoints: integrand kink locations.
std::vector<double> ray_breakpoints(const Domain& dom, const LocalizationField& eta,
                                    const Vec2& x, const Vec2& dir, double rmax) {
  std::vector<double> out;
  const auto levels = eta.dist_breakpoints();
  if (dom.kind() == Domain::Kind::interval) {
    for (double L : levels) {
      // dist(y) = min(y - a, b - y) crosses L where y = a + L or y = b - L
      for (double y : {dom.a() + L, dom.b() - L}) {
        const double r = (y - x[0]) / (dir[0] != 0.0 ? dir[0] : 1.0);
        if (r > 0.0 && r < rmax) out.push_back(r);
      }
    }
    // midpoint kink of the distance function
    const double mid = 0.5 * (dom.a() + dom.b());
    const double rm = (mid - x[0]) / (dir[0] != 0.0 ? dir[0] : 1.0);
    if (rm > 0.0 && rm < rmax) out.push_back(rm);
  } else {
    // dist(y) = R - |x + r dir - c| crosses L where |x + r dir - c| = R - L
    const Vec2 rel = x - dom.center();
    for (double L : levels) {
      const double target = dom.radius() - L;
      const double bq = rel.dot(dir);
      const double cq = rel.squaredNorm() - target * target;
      const double disc = bq * bq - cq;
      if (disc <= 0) continue;
      const double sq = std::sqrt(disc);
      for (double r : {-bq - sq, -bq + sq})
        if (r > 0.0 && r < rmax) out.push_back(r);
    }
  }
  return out;
}

double radial_reach(const TwoPointKernel& k, const Vec2& x, double eta_x) {
  // generous but safe: the mirrored support is inside reach(eta_x)
  return k.reach(eta_x);
}

template <class Integrand>
double integrate_ball_1d(const TwoPointKernel& k, const Vec2& x, double eta_x,
                         const Integrand& f, double tol) {
  const Domain& dom = k.eta().domain();
  double total = 0.0;
  for (double side : {-1.0, 1.0}) {
    const Vec2 dir(side, 0.0);
    const double rmax = std::min(radial_reach(k, x, eta_x), dom.exit_distance(x, dir));
    if (rmax <= 0.0) continue;
    auto g = [&](double r) { return f(Vec2(x + r * dir)); };
    total += adaptive_simpson_panels(g, 0.0, rmax,
                                     ray_breakpoints(dom, k.eta(), x, dir, rmax), tol / 2.0);
  }
  return total;
}

template <class Integrand>
double integrate_ball_2d(const TwoPointKernel& k, const Vec2& x, double eta_x,
                         const Integrand& f, double tol) {
  const Domain& dom = k.eta().domain();
  // Smooth periodic integrand in the angle: the trapezoid rule converges fast;
  // double the count until stable.
  double prev = 0.0;
  for (int m = 16; m <= 512; m *= 2) {
    double sum = 0.0;
    for (int a = 0; a < m; ++a) {
      const double th = 2.0 * kPi * a / m;
      const Vec2 dir(std::cos(th), std::sin(th));
      const double rmax = std::min(radial_reach(k, x, eta_x), dom.exit_distance(x, dir));
      if (rmax <= 0.0) continue;
      auto g = [&](double r) { return r * f(Vec2(x + r * dir)); };
      sum += adaptive_simpson_panels(g, 0.0, rmax,
                                     ray_breakpoints(dom, k.eta(), x, dir, rmax),
                                     tol / (2.0 * m));
    }
    sum *= 2.0 * kPi / m;
    if (m > 16 && std::abs(sum - prev) <= std::max(tol, 1e-13 * std::abs(sum))) return sum;
    prev = sum;
  }
  return prev;
}

template <class Integrand>
double integrate_ball(const TwoPointKernel& k, const Vec2& x, const Integrand& f, double tol) {
  const double eta_x = k.eta().value(x);
  if (eta_x <= 0.0) fail_validation("pointwise operator quadrature at a boundary point");
  if (k.dim() == 1) return integrate_ball_1d(k, x, eta_x, f, tol);
  return integrate_ball_2d(k, x, eta_x, f, tol);
}

}  // namespace

double pointwise_L(const TwoPointKernel& k, const Vec2& x, const AnalyticFunction& u,
                   double tol) {
  const double ux = u.value(x);
  const double eta_x = k.eta().value(x);
  auto f = [&](const Vec2& y) {
    const double ey = k.eta().value(y);
    return k.pair((y - x).norm(), eta_x, ey) * (ux - u.value(y));
  };
  return 2.0 * integrate_ball(k, x, f, tol);
}

double pointwise_B_density(const TwoPointKernel& k, const Vec2& x, const AnalyticFunction& u,
                           const AnalyticFunction& v, double tol) {
  const double ux = u.value(x), vx = v.value(x);
  const double eta_x = k.eta().value(x);
  auto f = [&](const Vec2& y) {
    const double ey = k.eta().value(y);
    return k.pair((y - x).norm(), eta_x, ey) * (ux - u.value(y)) * (vx - v.value(y));
  };
  return integrate_ball(k, x, f, tol);
}

}  // namespace nlbvp
