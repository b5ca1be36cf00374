#include "nlbvp/functions.hpp"

#include <cmath>
#include <numbers>

namespace nlbvp {

namespace {
constexpr double kPi = std::numbers::pi;
}

AnalyticFunction AnalyticFunction::scaled(double s) const {
  AnalyticFunction out;
  out.name = name;
  auto v = value, l = laplacian;
  auto g = grad;
  out.value = [v, s](const Vec2& x) { return s * v(x); };
  out.grad = [g, s](const Vec2& x) { return Vec2(s * g(x)); };
  out.laplacian = [l, s](const Vec2& x) { return s * l(x); };
  return out;
}

AnalyticFunction analytic_function(const std::string& name, int dim, double scale) {
  AnalyticFunction f;
  f.name = name;
  if (name == "one") {
    f.value = [](const Vec2&) { return 1.0; };
    f.grad = [](const Vec2&) { return Vec2::Zero().eval(); };
    f.laplacian = [](const Vec2&) { return 0.0; };
  } else if (name == "zero") {
    f.value = [](const Vec2&) { return 0.0; };
    f.grad = [](const Vec2&) { return Vec2::Zero().eval(); };
    f.laplacian = [](const Vec2&) { return 0.0; };
  } else if (name == "sin_pi") {
    if (dim == 1) {
      f.value = [](const Vec2& x) { return std::sin(kPi * x[0]); };
      f.grad = [](const Vec2& x) { return Vec2(kPi * std::cos(kPi * x[0]), 0.0); };
      f.laplacian = [](const Vec2& x) { return -kPi * kPi * std::sin(kPi * x[0]); };
    } else {
      f.value = [](const Vec2& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
      f.grad = [](const Vec2& x) {
        return Vec2(kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
                    kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]));
      };
      f.laplacian = [](const Vec2& x) {
        return -2.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
      };
    }
  } else if (name == "cos_pi") {
    if (dim == 1) {
      f.value = [](const Vec2& x) { return std::cos(kPi * x[0]); };
      f.grad = [](const Vec2& x) { return Vec2(-kPi * std::sin(kPi * x[0]), 0.0); };
      f.laplacian = [](const Vec2& x) { return -kPi * kPi * std::cos(kPi * x[0]); };
    } else {
      f.value = [](const Vec2& x) { return std::cos(kPi * x[0]) * std::cos(kPi * x[1]); };
      f.grad = [](const Vec2& x) {
        return Vec2(-kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]),
                    -kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]));
      };
      f.laplacian = [](const Vec2& x) {
        return -2.0 * kPi * kPi * std::cos(kPi * x[0]) * std::cos(kPi * x[1]);
      };
    }
  } else if (name == "quadratic") {
    // |x|^2 / 2
    f.value = [dim](const Vec2& x) {
      return dim == 1 ? 0.5 * x[0] * x[0] : 0.5 * x.squaredNorm();
    };
    f.grad = [dim](const Vec2& x) { return dim == 1 ? Vec2(x[0], 0.0) : Vec2(x); };
    f.laplacian = [dim](const Vec2&) { return static_cast<double>(dim); };
  } else if (name == "affine") {
    f.value = [dim](const Vec2& x) { return dim == 1 ? 1.0 + 2.0 * x[0] : 1.0 + 2.0 * x[0] - x[1]; };
    f.grad = [dim](const Vec2&) { return dim == 1 ? Vec2(2.0, 0.0) : Vec2(2.0, -1.0); };
    f.laplacian = [](const Vec2&) { return 0.0; };
  } else if (name == "bump") {
    if (dim == 1) {
      // 16 x^2 (1-x)^2 on (0,1): vanishes with its gradient at the endpoints
      f.value = [](const Vec2& x) {
        const double t = x[0];
        return 16.0 * t * t * (1.0 - t) * (1.0 - t);
      };
      f.grad = [](const Vec2& x) {
        const double t = x[0];
        return Vec2(32.0 * t * (1.0 - t) * (1.0 - 2.0 * t), 0.0);
      };
      f.laplacian = [](const Vec2& x) {
        const double t = x[0];
        return 32.0 * (1.0 - 6.0 * t + 6.0 * t * t);
      };
    } else {
      // (1 - |x|^2)^2 on the unit disk
      f.value = [](const Vec2& x) {
        const double s = 1.0 - x.squaredNorm();
        return s * s;
      };
      f.grad = [](const Vec2& x) {
        const double s = 1.0 - x.squaredNorm();
        return Vec2(-4.0 * s * x);
      };
      f.laplacian = [](const Vec2& x) {
        const double r2 = x.squaredNorm();
        return -8.0 * (1.0 - r2) + 8.0 * r2;
      };
    }
  } else if (name == "x1_squared") {
    f.value = [](const Vec2& x) { return x[0] * x[0]; };
    f.grad = [](const Vec2& x) { return Vec2(2.0 * x[0], 0.0); };
    f.laplacian = [](const Vec2&) { return 2.0; };
  } else {
    fail_validation("unknown analytic function", json{{"name", name}});
  }
  if (scale != 1.0) return f.scaled(scale);
  return f;
}

}  // namespace nlbvp
