#ifndef NLBVP_KERNELS_HPP
#define NLBVP_KERNELS_HPP

#include <vector>

#include "nlbvp/localization.hpp"

namespace nlbvp {

/// Radial C^1 profile rho with supp rho in [0, R0), rho >= rho0 on [0, r0],
/// normalized so that int_{B(0,1)} |z|^2 rho(|z|) dz = d.
class KernelProfile {
 public:
  enum class Family { poly_bump, tabulated };

  // rho(r) = c (1 - (r/R0)^2)^p for r < R0; c solved from the normalization.
  static KernelProfile poly_bump(int dim, double R0, int p);
  // Cubic-Hermite interpolated samples on [0, R0]; renormalized, so the
  // result is invariant under scaling of the input values.
  static KernelProfile tabulated(int dim, double R0, std::vector<double> values);

  double rho(double r) const;
  double drho(double r) const;
  double rho_underbar(double r) const;  // -rho'(r)/r, continuous at 0

  Family family() const { return family_; }
  int dim() const { return dim_; }
  double R0() const { return R0_; }
  double r0() const { return r0_; }
  double rho0() const { return rho0_; }
  double scale_c() const { return c_; }

  double rho_bar() const { return rho_bar_; }             // int_{B(0,1)} rho
  double rho_underbar_d() const { return rho_underbar_d_; }
  double moment2() const;                                  // int |z|^2 rho (recomputed)
  double linear_mode_constant() const;                     // C_rho > 1

  // int over B(0,s) of rho(|z|) dz in profile units (closed form; poly_bump only).
  double mass_cdf(double s) const;
  bool has_mass_cdf() const { return family_ == Family::poly_bump; }

  json to_json() const;
  static KernelProfile from_json(const json& j);

 private:
  KernelProfile() = default;
  void finish_normalization();
  std::vector<double> quad_breakpoints() const;

  Family family_ = Family::poly_bump;
  int dim_ = 1, p_ = 2;
  double R0_ = 0.9, r0_ = 0.45, rho0_ = 0.0, c_ = 1.0;
  double rho_bar_ = 0.0, rho_underbar_d_ = 0.0;
  std::vector<double> tab_;  // tabulated raw values on a uniform r-grid
  double tab_dr_ = 0.0;
  double raw(double r) const;   // unnormalized profile
  double draw(double r) const;  // its derivative
};

/// Two-point heterogeneous kernel rho_{delta,alpha}(x,y): the symmetrized
/// rescaling of rho by the horizons at both points.
class TwoPointKernel {
 public:
  TwoPointKernel(const KernelProfile& profile, const LocalizationField& eta, double alpha);

  const KernelProfile& profile() const { return *profile_; }
  const LocalizationField& eta() const { return *eta_; }
  double alpha() const { return alpha_; }
  double delta() const { return eta_->delta(); }
  int dim() const { return profile_->dim(); }

  // h^{-d-alpha} rho(r/h); zero for r >= R0*h and for h <= 0 (continuous
  // extension toward the boundary).
  double scaled(double r, double h) const;
  double scaled_underbar(double r, double h) const;
  double pair(double r, double eta_x, double eta_y) const;

  // Evaluates eta internally; interior points only (eta = 0 is an error:
  // the kernel scaling is genuinely singular on the boundary itself).
  double pair_eval(const Vec2& x, const Vec2& y) const;
  Vec2 grad_x(const Vec2& x, const Vec2& y) const;

  // Closed-form gradient with cached eta data.
  Vec2 grad_x_cached(const Vec2& x, const Vec2& y, double eta_x, const Vec2& grad_eta_x,
                     double eta_y) const;

  // Safe neighbor radius: |x-y| <= R0*eta(y) implies |x-y| <= reach(eta(x)).
  double reach(double eta_x) const;

  // Exact integral of the kernel over a node's own quadrature cell (equal-area
  // ball model). Midpoint weighting w * rho(0) * eta^{-d-alpha} overshoots
  // without bound once the support falls below the cell; this keeps the
  // discrete Phi bounded like the continuum one. Falls back to the midpoint
  // value for profiles without a closed-form mass integral.
  double self_coefficient(double cell_volume, double eta_x) const;
  // d(self_coefficient)/dx through eta; the symmetric-pair split assigns half
  // to each argument, so quadratures of grad_x rho stay consistent with Phi.
  Vec2 self_coefficient_grad(double cell_volume, double eta_x,
                             const Vec2& grad_eta_x) const;

 private:
  const KernelProfile* profile_;
  const LocalizationField* eta_;
  double alpha_;
  double reach_factor_;
};

}  // namespace nlbvp

#endif
