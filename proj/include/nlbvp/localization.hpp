#ifndef NLBVP_LOCALIZATION_HPP
#define NLBVP_LOCALIZATION_HPP

#include <functional>
#include <optional>
#include <vector>

#include "nlbvp/geometry.hpp"

namespace nlbvp {

enum class EtaMode { quadratic, linear, constant };

const char* to_string(EtaMode m);
EtaMode eta_mode_from_string(const std::string& s);

struct EtaEval {
  double value;
  Vec2 grad;
  Mat2 hess;
};

/// Heterogeneous localization field eta_delta.
///
/// quadratic mode: eta = dist^2 where dist^2 < kappa0*delta, eta = delta deep
/// inside, joined by a C^2 transition profile in the scaled depth
/// tau = dist/sqrt(delta). The profile's slope starts exactly on the dist^2
/// branch (value 2*sqrt(kappa0), curvature 2) with a sub-percent overshoot and
/// decays to zero, which keeps the measured kappa1 = sup|grad eta|/sqrt(delta)
/// near its theoretical floor 2*sqrt(kappa0) and so keeps delta0 as large as
/// the construction allows. When the domain is too thin for the transition to
/// finish, the profile plateaus early at a level below delta (condition (ii)
/// is then vacuous).
///
/// linear mode: the same construction with dist in place of dist^2 and
/// tau = dist/delta.  constant mode: eta == delta everywhere.
class LocalizationField {
 public:
  static LocalizationField build(const Domain& domain, double delta, double kappa0,
                                 EtaMode mode);

  // Testing hook: a caller-supplied field with derivatives by differencing.
  static LocalizationField custom(const Domain& domain, double delta, double kappa0,
                                  std::function<double(const Vec2&)> value_fn);

  EtaEval eval(const Vec2& x) const;
  double value(const Vec2& x) const;

  const Domain& domain() const { return domain_; }
  EtaMode mode() const { return mode_; }
  double delta() const { return delta_; }
  double kappa0() const { return kappa0_; }
  double kappa1() const { return kappa1_; }
  double kappa2() const { return kappa2_; }
  double kappa_bar0() const { return kappa_bar0_; }
  double delta0() const { return delta0_; }
  // sqrt(delta) in quadratic mode, delta in linear mode: |grad eta| <= kappa1 * grad_scale.
  double grad_scale() const;
  // Depth of the deep region where eta is exactly constant (== plateau_value).
  double plateau_dist() const;
  double plateau_value() const;
  // Distances at which the profile changes branch; quadrature panel splits.
  std::vector<double> dist_breakpoints() const;

 private:
  LocalizationField() = default;
  void measure_constants();

  Domain domain_;
  EtaMode mode_ = EtaMode::quadratic;
  double delta_ = 0.0, kappa0_ = 0.25;
  double kappa1_ = 0.0, kappa2_ = 0.0, kappa_bar0_ = 1.0, delta0_ = 1.0;

  // transition profile H(tau): eta = delta * H(dist/scale)
  double scale_ = 1.0;          // sqrt(delta) or delta
  double prof_a_ = 0.0;         // junction: H = pure branch for tau <= a
  double prof_w_ = 0.0;         // transition width in tau
  double prof_z0_ = 0.0, prof_z1_ = 0.0, prof_P_ = 0.0, prof_gmax_ = 1.0;
  double plateau_ = 1.0;        // H value past the transition ( <= 1 )

  double H(double tau) const;
  double Hp(double tau) const;   // dH/dtau
  double Hpp(double tau) const;

  std::function<double(const Vec2&)> custom_fn_;
};

struct AssumptionCheck {
  std::string name;
  bool pass = true;
  bool applicable = true;
  double margin = 0.0;
  std::optional<Vec2> witness;
  std::string note;
};

struct LocalizationReport {
  std::vector<AssumptionCheck> checks;
  bool all_pass() const;
  json to_json() const;
};

/// Samples (A_eta) i)-iv), the two-point comparability bounds and the
/// layer-inclusion relations over the mesh nodes. Report-only: never throws
/// on a failed assumption.
LocalizationReport check_localization_assumptions(const LocalizationField& eta,
                                                  const Mesh& mesh, double R0 = 0.9);

}  // namespace nlbvp

#endif
