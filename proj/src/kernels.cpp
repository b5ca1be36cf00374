#include "nlbvp/kernels.hpp"

#include <cmath>
#include <numbers>

#include "nlbvp/quadrature.hpp"

namespace nlbvp {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNormTol = 1e-12;
}  // namespace

double KernelProfile::raw(double r) const {
  if (r >= R0_ || r < 0.0) return 0.0;
  if (family_ == Family::poly_bump) {
    const double s = 1.0 - (r / R0_) * (r / R0_);
    double v = 1.0;
    for (int k = 0; k < p_; ++k) v *= s;
    return v;
  }
  // cubic Hermite on the uniform grid, finite-difference slopes
  const double t = r / tab_dr_;
  const int i = std::min(static_cast<int>(t), static_cast<int>(tab_.size()) - 2);
  const double u = t - i;
  auto val = [&](int k) {
    k = std::clamp(k, 0, static_cast<int>(tab_.size()) - 1);
    return tab_[static_cast<std::size_t>(k)];
  };
  const double m0 = 0.5 * (val(i + 1) - val(i - 1));
  const double m1 = 0.5 * (val(i + 2) - val(i));
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * val(i) + (u3 - 2 * u2 + u) * m0 +
         (-2 * u3 + 3 * u2) * val(i + 1) + (u3 - u2) * m1;
}

double KernelProfile::draw(double r) const {
  if (r >= R0_ || r < 0.0) return 0.0;
  if (family_ == Family::poly_bump) {
    const double s = 1.0 - (r / R0_) * (r / R0_);
    double v = 1.0;
    for (int k = 0; k < p_ - 1; ++k) v *= s;
    return -2.0 * p_ * r / (R0_ * R0_) * v;
  }
  // analytic derivative of the cubic Hermite piece
  const double t = r / tab_dr_;
  const int i = std::min(static_cast<int>(t), static_cast<int>(tab_.size()) - 2);
  const double u = t - i;
  auto val = [&](int k) {
    k = std::clamp(k, 0, static_cast<int>(tab_.size()) - 1);
    return tab_[static_cast<std::size_t>(k)];
  };
  const double m0 = 0.5 * (val(i + 1) - val(i - 1));
  const double m1 = 0.5 * (val(i + 2) - val(i));
  const double u2 = u * u;
  const double d = (6.0 * u2 - 6.0 * u) * val(i) + (3.0 * u2 - 4.0 * u + 1.0) * m0 +
                   (-6.0 * u2 + 6.0 * u) * val(i + 1) + (3.0 * u2 - 2.0 * u) * m1;
  return d / tab_dr_;
}

std::vector<double> KernelProfile::quad_breakpoints() const {
  // the tabulated interpolant has curvature jumps at every grid radius
  std::vector<double> pts;
  if (family_ == Family::tabulated)
    for (std::size_t i = 1; i + 1 < tab_.size(); ++i) pts.push_back(tab_dr_ * i);
  return pts;
}

void KernelProfile::finish_normalization() {
  // c solves int_{B(0,1)} |z|^2 c*raw(|z|) dz = d
  auto integrand = [&](double r) {
    const double shell = (dim_ == 1) ? 2.0 : 2.0 * kPi * r;
    return r * r * raw(r) * shell;
  };
  const double I = adaptive_simpson_panels(integrand, 0.0, R0_, quad_breakpoints(), kNormTol);
  if (!(I > 0.0) || !std::isfinite(I))
    fail_solver("kernel normalization quadrature failed", json{{"integral", I}});
  c_ = dim_ / I;
  r0_ = 0.5 * R0_;
  rho0_ = c_ * raw(r0_);
  if (!(rho0_ > 0.0))
    fail_validation("profile violates the positive-floor assumption on [0, r0]",
                    json{{"rho0", rho0_}});

  auto rho_int = [&](double r) {
    const double shell = (dim_ == 1) ? 2.0 : 2.0 * kPi * r;
    return c_ * raw(r) * shell;
  };
  rho_bar_ = adaptive_simpson_panels(rho_int, 0.0, R0_, quad_breakpoints(), kNormTol);

  if (dim_ == 1) {
    // -2 int_0^1 rho'(r)/r dr = 2 int_0^{R0} rho_underbar
    rho_underbar_d_ = 2.0 * adaptive_simpson_panels(
                                [&](double r) { return rho_underbar(r); }, 0.0, R0_,
                                quad_breakpoints(), kNormTol);
  } else {
    rho_underbar_d_ = 2.0 * kPi * rho(0.0);
  }
}

KernelProfile KernelProfile::poly_bump(int dim, double R0, int p) {
  if (dim != 1 && dim != 2) fail_validation("kernel dim must be 1 or 2", json{{"dim", dim}});
  if (!(R0 > 0.0 && R0 <= 0.95))
    fail_validation("R0 must lie in (0, 0.95]", json{{"R0", R0}});
  if (p < 2) fail_validation("poly_bump power must be >= 2 for C^1 at the support edge",
                             json{{"p", p}});
  KernelProfile k;
  k.family_ = Family::poly_bump;
  k.dim_ = dim;
  k.R0_ = R0;
  k.p_ = p;
  k.finish_normalization();
  return k;
}

KernelProfile KernelProfile::tabulated(int dim, double R0, std::vector<double> values) {
  if (dim != 1 && dim != 2) fail_validation("kernel dim must be 1 or 2", json{{"dim", dim}});
  if (!(R0 > 0.0 && R0 <= 0.95))
    fail_validation("R0 must lie in (0, 0.95]", json{{"R0", R0}});
  if (values.size() < 8) fail_validation("tabulated profile needs at least 8 samples");
  if (std::abs(values.back()) > 1e-12 * std::abs(values.front()))
    fail_validation("tabulated profile must vanish at R0");
  KernelProfile k;
  k.family_ = Family::tabulated;
  k.dim_ = dim;
  k.R0_ = R0;
  k.tab_ = std::move(values);
  k.tab_dr_ = R0 / (static_cast<double>(k.tab_.size()) - 1.0);
  k.finish_normalization();
  return k;
}

double KernelProfile::rho(double r) const { return c_ * raw(r); }
double KernelProfile::drho(double r) const { return c_ * draw(r); }

double KernelProfile::rho_underbar(double r) const {
  if (r >= R0_) return 0.0;
  if (r < 1e-9 * R0_) {
    // limit -rho''(0) via the difference quotient of rho'
    const double h = 1e-6 * R0_;
    return -drho(h) / h;
  }
  return -drho(r) / r;
}

double KernelProfile::mass_cdf(double s) const {
  if (family_ != Family::poly_bump)
    fail_validation("mass_cdf has a closed form only for poly_bump");
  const double sb = std::min(std::max(s, 0.0), R0_) / R0_;
  if (dim_ == 2) {
    double pw = 1.0;  // (1 - sb^2)^(p+1)
    for (int k = 0; k < p_ + 1; ++k) pw *= (1.0 - sb * sb);
    return c_ * kPi * R0_ * R0_ / (p_ + 1.0) * (1.0 - pw);
  }
  // d = 1: 2 c R0 * int_0^sb (1-u^2)^p du by binomial expansion
  double sum = 0.0, binom = 1.0;
  double upow = sb;
  for (int k = 0; k <= p_; ++k) {
    sum += binom * (k % 2 ? -1.0 : 1.0) * upow / (2.0 * k + 1.0);
    binom = binom * (p_ - k) / (k + 1.0);
    upow *= sb * sb;
  }
  return 2.0 * c_ * R0_ * sum;
}

double KernelProfile::moment2() const {
  auto integrand = [&](double r) {
    const double shell = (dim_ == 1) ? 2.0 : 2.0 * kPi * r;
    return r * r * rho(r) * shell;
  };
  return adaptive_simpson_panels(integrand, 0.0, R0_, quad_breakpoints(), kNormTol);
}

double KernelProfile::linear_mode_constant() const {
  double C;
  auto logker = [](double z) { return z * std::log((1.0 + z) / (1.0 - z)); };
  if (dim_ == 1) {
    C = adaptive_simpson_panels([&](double z) { return logker(z) * rho(z); }, 0.0, R0_,
                                quad_breakpoints(), 1e-11);
  } else {
    C = adaptive_simpson_panels(
        [&](double r) {
          const double inner = adaptive_simpson(
              [&](double th) { return logker(r * std::sin(th)); }, 0.0, kPi, 1e-11);
          return r * rho(r) * inner;
        },
        0.0, R0_, quad_breakpoints(), 1e-10);
  }
  if (!(C > 1.0))
    fail_solver("linear-localization constant computed <= 1; quadrature suspect",
                json{{"C_rho", C}});
  return C;
}

json KernelProfile::to_json() const {
  json j{{"family", family_ == Family::poly_bump ? "poly_bump" : "tabulated"},
         {"R0", R0_},
         {"d", dim_},
         {"c", c_}};
  if (family_ == Family::poly_bump)
    j["p"] = p_;
  else
    j["values"] = tab_;
  return j;
}

KernelProfile KernelProfile::from_json(const json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "poly_bump")
    return poly_bump(j.at("d").get<int>(), j.at("R0").get<double>(), j.value("p", 2));
  if (fam == "tabulated")
    return tabulated(j.at("d").get<int>(), j.at("R0").get<double>(),
                     j.at("values").get<std::vector<double>>());
  fail_validation("unknown kernel family", json{{"family", fam}});
}

// ---------------------------------------------------------------------------

TwoPointKernel::TwoPointKernel(const KernelProfile& profile, const LocalizationField& eta,
                               double alpha)
    : profile_(&profile), eta_(&eta), alpha_(alpha) {
  if (profile.dim() != eta.domain().dim())
    fail_validation("kernel/localization dimension mismatch");
  if (alpha < 0.0) fail_validation("alpha must be >= 0", json{{"alpha", alpha}});
  // |x-y| <= R0*eta(y) and |eta(y)-eta(x)| <= kappa1*grad_scale*|x-y| give
  // |x-y| <= R0*eta(x)/(1 - kappa1*R0*grad_scale); constant mode needs no slack.
  const double s = eta.kappa1() * profile.R0() * eta.grad_scale();
  if (s >= 0.99)
    fail_validation("kernel reach estimate degenerate (kappa1*R0*scale too large)",
                    json{{"s", s}});
  reach_factor_ = profile.R0() / (1.0 - s);
}

double TwoPointKernel::scaled(double r, double h) const {
  if (h <= 0.0 || r >= profile_->R0() * h) return 0.0;
  const double hd = (dim() == 1) ? h : h * h;
  return profile_->rho(r / h) / (hd * std::pow(h, alpha_));
}

double TwoPointKernel::scaled_underbar(double r, double h) const {
  if (h <= 0.0 || r > profile_->R0() * h) return 0.0;
  const double hd = (dim() == 1) ? h : h * h;
  return profile_->rho_underbar(r / h) / (hd * std::pow(h, alpha_));
}

double TwoPointKernel::pair(double r, double eta_x, double eta_y) const {
  return 0.5 * (scaled(r, eta_x) + scaled(r, eta_y));
}

double TwoPointKernel::pair_eval(const Vec2& x, const Vec2& y) const {
  const double ex = eta_->value(x), ey = eta_->value(y);
  if (ex <= 0.0 || ey <= 0.0)
    fail_validation("two-point kernel is singular at the boundary (eta = 0)",
                    json{{"eta_x", ex}, {"eta_y", ey}});
  return pair((y - x).norm(), ex, ey);
}

Vec2 TwoPointKernel::grad_x_cached(const Vec2& x, const Vec2& y, double eta_x,
                                   const Vec2& grad_eta_x, double eta_y) const {
  const Vec2 d = y - x;
  const double r = d.norm();
  const double ub_x = scaled_underbar(r, eta_x);
  const double ub_y = scaled_underbar(r, eta_y);
  Vec2 g = 0.5 * (ub_x / (eta_x * eta_x) + ub_y / (eta_y * eta_y)) * d;
  // d/d(eta) of eta^{-d-alpha} rho(r/eta): the r^2 term enters with positive
  // sign (shrinking the argument raises rho), the scaling prefactor with
  // negative sign.
  g += (r * r / (2.0 * eta_x * eta_x * eta_x)) * ub_x * grad_eta_x;
  g -= ((dim() + alpha_) / (2.0 * eta_x)) * scaled(r, eta_x) * grad_eta_x;
  return g;
}

Vec2 TwoPointKernel::grad_x(const Vec2& x, const Vec2& y) const {
  const EtaEval ex = eta_->eval(x);
  const double ey = eta_->value(y);
  if (ex.value <= 0.0 || ey <= 0.0)
    fail_validation("two-point kernel is singular at the boundary (eta = 0)");
  return grad_x_cached(x, y, ex.value, ex.grad, ey);
}

double TwoPointKernel::reach(double eta_x) const { return reach_factor_ * eta_x; }

namespace {
// cell radius of the equal-volume ball model, in kernel-profile units
double cell_extent(int dim, double cell_volume, double eta) {
  const double r = dim == 1 ? 0.5 * cell_volume : std::sqrt(cell_volume / kPi);
  return r / eta;
}
}  // namespace

double TwoPointKernel::self_coefficient(double cell_volume, double eta_x) const {
  if (eta_x <= 0.0 || cell_volume <= 0.0) return 0.0;
  if (!profile_->has_mass_cdf())
    return cell_volume * pair(0.0, eta_x, eta_x);  // midpoint fallback
  const double s = std::min(profile_->R0(), cell_extent(dim(), cell_volume, eta_x));
  return profile_->mass_cdf(s) / std::pow(eta_x, alpha_);
}

Vec2 TwoPointKernel::self_coefficient_grad(double cell_volume, double eta_x,
                                           const Vec2& grad_eta_x) const {
  if (eta_x <= 0.0 || cell_volume <= 0.0) return Vec2::Zero();
  double dde;  // d(self_coefficient)/d(eta)
  if (!profile_->has_mass_cdf()) {
    dde = -(dim() + alpha_) * cell_volume * pair(0.0, eta_x, eta_x) / eta_x;
  } else {
    const double ext = cell_extent(dim(), cell_volume, eta_x);
    const double s = std::min(profile_->R0(), ext);
    const double mass = profile_->mass_cdf(s);
    dde = -alpha_ * mass / std::pow(eta_x, alpha_ + 1.0);
    if (ext < profile_->R0()) {
      const double shell = dim() == 1 ? 2.0 : 2.0 * kPi * s;
      dde += shell * profile_->rho(s) * (-ext / eta_x) / std::pow(eta_x, alpha_);
    }
  }
  return 0.5 * dde * grad_eta_x;  // symmetric-pair split: half per argument
}

}  // namespace nlbvp
