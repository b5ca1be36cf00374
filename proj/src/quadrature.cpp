#include "nlbvp/quadrature.hpp"

namespace nlbvp {

namespace {

double simpson(const std::function<double(double)>& f, double a, double m, double b,
               double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double m, double b,
             double fa, double fm, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, lm, m, fa, flm, fm);
  const double right = simpson(f, m, rm, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || (b - a) < 1e-14 * (1.0 + std::abs(a) + std::abs(b)))
    return left + right + delta / 15.0;
  if (depth <= 0)
    fail_solver("adaptive quadrature did not converge",
                json{{"a", a}, {"b", b}, {"estimate", left + right}});
  return adapt(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// 16-point Gauss-Legendre nodes/weights on [-1,1].
const double kGL16x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                          0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                          0.9445750230732326, 0.9894009349916499};
const double kGL16w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                          0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                          0.0622535239386479, 0.0271524594117541};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = simpson(f, a, m, b, fa, fm, fb);
  return adapt(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

double adaptive_simpson_panels(const std::function<double(double)>& f, double a, double b,
                               std::vector<double> pts, double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  pts.push_back(a);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&](double x, double y) { return std::abs(x - y) < 1e-15 * (b - a); }),
            pts.end());
  double sum = 0.0;
  int panels = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    if (pts[k] >= a - 1e-300 && pts[k + 1] <= b + 1e-300 && pts[k + 1] > pts[k]) ++panels;
  const double ptol = tol / std::max(1, panels);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double lo = std::max(a, pts[k]), hi = std::min(b, pts[k + 1]);
    if (hi > lo) sum += adaptive_simpson(f, lo, hi, ptol, max_depth);
  }
  return sum;
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int order) {
  (void)order;  // fixed 16-point rule; callers split into panels for accuracy
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 8; ++i)
    sum += kGL16w[i] * (f(c - h * kGL16x[i]) + f(c + h * kGL16x[i]));
  return h * sum;
}

}  // namespace nlbvp
