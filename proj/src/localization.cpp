#include "nlbvp/localization.hpp"

#include <cmath>

namespace nlbvp {

namespace {

// Quintic smoothstep: C^2 with vanishing slope and curvature at both ends.
double smoothstep5(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep5_d(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
// integral of smoothstep5 from 0 to t
double smoothstep5_I(double t) {
  const double t4 = t * t * t * t;
  return t4 * (2.5 + t * (-3.0 + t));
}

constexpr double kRecordMargin = 1.005;  // recorded constants sit 0.5% above the sampled sup

}  // namespace

const char* to_string(EtaMode m) {
  switch (m) {
    case EtaMode::quadratic: return "quadratic";
    case EtaMode::linear: return "linear";
    case EtaMode::constant: return "constant";
  }
  return "?";
}

EtaMode eta_mode_from_string(const std::string& s) {
  if (s == "quadratic") return EtaMode::quadratic;
  if (s == "linear") return EtaMode::linear;
  if (s == "constant") return EtaMode::constant;
  fail_validation("unknown localization mode", json{{"mode", s}});
}

// Slope profile g(z) on [0,1] governing H'(tau) = slope_at_junction * g(z),
// z = (tau - a)/w:
//   quadratic mode: g(0) = 1 with g'(0) = P matching the dist^2 curvature,
//   a short quadratic rise to gmax = 1 + eps0, then gmax*(1 - S(u)) down to 0.
//   linear mode: P = 0, pure decay.
// Normalization int_0^1 g = 1/2 makes eta reach exactly delta at z1 when the
// full transition fits inside the domain.
double LocalizationField::H(double tau) const {
  if (mode_ == EtaMode::constant) return 1.0;
  const double pure = (mode_ == EtaMode::quadratic) ? tau * tau : tau;
  if (tau <= prof_a_) return pure;
  const double z = (tau - prof_a_) / prof_w_;
  if (z >= prof_z1_) return plateau_;
  const double slope = (mode_ == EtaMode::quadratic) ? 2.0 * prof_a_ : 1.0;
  double Ig;
  if (z <= prof_z0_)
    Ig = z + prof_P_ * z * z * (0.5 - z / (6.0 * prof_z0_));
  else {
    const double I0 = prof_z0_ * (1.0 + prof_P_ * prof_z0_ / 3.0);
    const double u = (z - prof_z0_) / (prof_z1_ - prof_z0_);
    Ig = I0 + prof_gmax_ * (prof_z1_ - prof_z0_) * (u - smoothstep5_I(u));
  }
  const double base = (mode_ == EtaMode::quadratic) ? prof_a_ * prof_a_ : prof_a_;
  return base + slope * prof_w_ * Ig;
}

double LocalizationField::Hp(double tau) const {
  if (mode_ == EtaMode::constant) return 0.0;
  if (tau <= prof_a_) return (mode_ == EtaMode::quadratic) ? 2.0 * tau : 1.0;
  const double z = (tau - prof_a_) / prof_w_;
  if (z >= prof_z1_) return 0.0;
  const double slope = (mode_ == EtaMode::quadratic) ? 2.0 * prof_a_ : 1.0;
  double g;
  if (z <= prof_z0_)
    g = 1.0 + prof_P_ * z * (1.0 - z / (2.0 * prof_z0_));
  else
    g = prof_gmax_ * (1.0 - smoothstep5((z - prof_z0_) / (prof_z1_ - prof_z0_)));
  return slope * g;
}

double LocalizationField::Hpp(double tau) const {
  if (mode_ == EtaMode::constant) return 0.0;
  if (tau <= prof_a_) return (mode_ == EtaMode::quadratic) ? 2.0 : 0.0;
  const double z = (tau - prof_a_) / prof_w_;
  if (z >= prof_z1_) return 0.0;
  const double slope = (mode_ == EtaMode::quadratic) ? 2.0 * prof_a_ : 1.0;
  double gp;
  if (z <= prof_z0_)
    gp = prof_P_ * (1.0 - z / prof_z0_);
  else {
    const double u = (z - prof_z0_) / (prof_z1_ - prof_z0_);
    gp = -prof_gmax_ * smoothstep5_d(u) / (prof_z1_ - prof_z0_);
  }
  return slope * gp / prof_w_;
}

LocalizationField LocalizationField::build(const Domain& domain, double delta, double kappa0,
                                           EtaMode mode) {
  if (!(kappa0 > 0.0 && kappa0 < 1.0))
    fail_validation("kappa0 must lie in (0,1)", json{{"kappa0", kappa0}});
  if (!(delta > 0.0)) fail_validation("delta must be positive", json{{"delta", delta}});

  LocalizationField f;
  f.domain_ = domain;
  f.mode_ = mode;
  f.delta_ = delta;
  f.kappa0_ = kappa0;

  if (mode == EtaMode::constant) {
    f.scale_ = 1.0;
    f.kappa1_ = 0.0;
    f.kappa2_ = 0.0;
    f.kappa_bar0_ = 1.0;
    f.delta0_ = 1.0;
    f.plateau_ = 1.0;
    if (!(delta < f.delta0_))
      fail_validation("delta >= delta0", json{{"delta", delta}, {"delta0", f.delta0_}});
    return f;
  }

  f.scale_ = (mode == EtaMode::quadratic) ? std::sqrt(delta) : delta;
  const double a = (mode == EtaMode::quadratic) ? std::sqrt(kappa0) : kappa0;
  const double b_full = 1.0 / a;
  // Squeeze the transition when the domain is too thin for it; (A_eta) ii is
  // vacuous in that regime (no point has kappa0*dist^2 > delta).
  const double tau_max = domain.max_interior_dist() / f.scale_;
  const double b = std::min(b_full, tau_max);
  if (!(b > a * (1.0 + 1e-9)))
    fail_validation("delta too large for the domain: no room for the localization transition",
                    json{{"delta", delta}, {"tau_max", tau_max}, {"junction", a}});
  f.prof_a_ = a;
  f.prof_w_ = b - a;

  if (mode == EtaMode::quadratic) {
    const double eps0 = 0.005;  // slope overshoot above the junction value
    f.prof_P_ = f.prof_w_ / a;  // matches H''(a) = 2
    f.prof_z0_ = 2.0 * eps0 / f.prof_P_;
    f.prof_gmax_ = 1.0 + eps0;
    const double I0 = f.prof_z0_ * (1.0 + f.prof_P_ * f.prof_z0_ / 3.0);
    f.prof_z1_ = f.prof_z0_ + (1.0 - 2.0 * I0) / f.prof_gmax_;
    f.plateau_ = a * a + 2.0 * a * f.prof_w_ * 0.5;  // = a*b (== 1 when unsqueezed)
  } else {
    f.prof_P_ = 0.0;
    f.prof_z0_ = 0.0;
    f.prof_gmax_ = 1.0;
    // int_0^{z1} g = z1/2, so plateau = a + w*z1/2 (== 1 when unsqueezed).
    f.prof_z1_ = std::min(1.0, 2.0 * (1.0 - a) / f.prof_w_);
    f.plateau_ = a + f.prof_w_ * 0.5 * f.prof_z1_;
  }
  if (f.prof_z1_ > 1.0 + 1e-12 || f.prof_z1_ <= f.prof_z0_)
    fail_validation("localization transition profile infeasible",
                    json{{"z0", f.prof_z0_}, {"z1", f.prof_z1_}});

  f.measure_constants();
  if (!(delta < f.delta0_))
    fail_validation("delta >= delta0: localization assumptions would fail",
                    json{{"delta", delta},
                         {"delta0", f.delta0_},
                         {"bound_one", 1.0},
                         {"bound_kappa1", f.kappa1_ > 0 ? 1.0 / (9.0 * f.kappa1_ * f.kappa1_) : 1.0},
                         {"bound_kappa_bar0", 1.0 / (2.0 * f.kappa_bar0_ * f.kappa_bar0_)}});
  return f;
}

LocalizationField LocalizationField::custom(const Domain& domain, double delta, double kappa0,
                                            std::function<double(const Vec2&)> value_fn) {
  LocalizationField f;
  f.domain_ = domain;
  f.mode_ = EtaMode::quadratic;
  f.delta_ = delta;
  f.kappa0_ = kappa0;
  f.scale_ = std::sqrt(delta);
  f.custom_fn_ = std::move(value_fn);
  f.kappa1_ = 1.0;
  f.kappa2_ = 2.5;
  f.kappa_bar0_ = 1.0;
  f.delta0_ = std::min({1.0, 1.0 / 9.0, 0.5});
  return f;
}

void LocalizationField::measure_constants() {
  // Dense radial sampling: every quantity depends on position through the
  // depth (and, on the disk, the radius), so a 1D sweep covers the domain.
  const int N = 20000;
  const double dmax = domain_.max_interior_dist();
  double sup_grad = 0.0, sup_hess = 0.0, sup_ratio = 0.0;
  for (int k = 1; k <= N; ++k) {
    const double depth = dmax * k / (N + 1.0);
    Vec2 x;
    if (domain_.kind() == Domain::Kind::interval)
      x = Vec2(domain_.a() + depth, 0.0);
    else
      x = domain_.center() + Vec2(domain_.radius() - depth, 0.0);
    const double tau = depth / scale_;
    const double v = delta_ * H(tau);
    const double gn = std::abs(Hp(tau)) * delta_ / scale_;
    // Hessian 2-norm: rank-one + curvature part (disk)
    double hn;
    if (domain_.kind() == Domain::Kind::interval) {
      hn = std::abs(Hpp(tau)) * delta_ / (scale_ * scale_);
    } else {
      const double r = domain_.radius() - depth;
      const double curv = r > 1e-12 ? std::abs(Hp(tau)) * delta_ / scale_ / r : 0.0;
      hn = std::max(std::abs(Hpp(tau)) * delta_ / (scale_ * scale_), curv);
    }
    sup_grad = std::max(sup_grad, gn);
    sup_hess = std::max(sup_hess, hn);
    const double cap = (mode_ == EtaMode::quadratic) ? std::min(delta_, depth * depth)
                                                     : std::min(delta_, depth);
    sup_ratio = std::max(sup_ratio, v / cap);
  }
  if (mode_ == EtaMode::quadratic) {
    kappa1_ = kRecordMargin * sup_grad / std::sqrt(delta_);
    kappa2_ = kRecordMargin * sup_hess;
  } else {
    kappa1_ = kRecordMargin * sup_grad;
    kappa2_ = kRecordMargin * sup_hess * delta_;  // paper form |grad^2 eta| <= kappa2/delta
  }
  kappa_bar0_ = kRecordMargin * sup_ratio;
  const double b1 = kappa1_ > 0 ? 1.0 / (9.0 * kappa1_ * kappa1_) : 1.0;
  const double b2 = 1.0 / (2.0 * kappa_bar0_ * kappa_bar0_);
  delta0_ = std::min({1.0, b1, b2});
}

double LocalizationField::grad_scale() const {
  return (mode_ == EtaMode::quadratic) ? std::sqrt(delta_) : 1.0;
}

double LocalizationField::plateau_dist() const {
  if (mode_ == EtaMode::constant) return 0.0;
  return (prof_a_ + prof_w_ * prof_z1_) * scale_;
}

double LocalizationField::plateau_value() const { return delta_ * plateau_; }

std::vector<double> LocalizationField::dist_breakpoints() const {
  if (mode_ == EtaMode::constant) return {};
  std::vector<double> out{prof_a_ * scale_, (prof_a_ + prof_w_ * prof_z0_) * scale_,
                          (prof_a_ + prof_w_ * prof_z1_) * scale_};
  const double dmax = domain_.max_interior_dist();
  std::erase_if(out, [&](double d) { return d <= 0.0 || d >= dmax; });
  return out;
}

EtaEval LocalizationField::eval(const Vec2& x) const {
  if (!domain_.contains(x))
    fail_validation("eta evaluated outside the domain closure", json{{"x", {x[0], x[1]}}});
  EtaEval out;
  if (custom_fn_) {
    out.value = custom_fn_(x);
    const double h = 1e-6 * std::max(1.0, domain_.diameter());
    out.grad = Vec2::Zero();
    out.hess = Mat2::Zero();
    for (int k = 0; k < domain_.dim(); ++k) {
      Vec2 e = Vec2::Zero();
      e[k] = h;
      const double fp = custom_fn_(x + e), fm = custom_fn_(x - e);
      out.grad[k] = (fp - fm) / (2.0 * h);
      out.hess(k, k) = (fp - 2.0 * out.value + fm) / (h * h);
    }
    return out;
  }
  if (mode_ == EtaMode::constant) {
    out.value = delta_;
    out.grad = Vec2::Zero();
    out.hess = Mat2::Zero();
    return out;
  }
  const double depth = domain_.dist_to_boundary(x);
  const double tau = depth / scale_;
  if (tau >= prof_a_ + prof_w_ * prof_z1_) {
    out.value = delta_ * plateau_;
    out.grad = Vec2::Zero();
    out.hess = Mat2::Zero();
    return out;
  }
  const Vec2 gd = domain_.dist_gradient(x);
  const Mat2 hd = domain_.dist_hessian(x);
  if (mode_ == EtaMode::quadratic && tau <= prof_a_) {
    // pure branch computed directly so eta == dist^2 holds exactly
    out.value = depth * depth;
    out.grad = 2.0 * depth * gd;
    out.hess = 2.0 * (gd * gd.transpose()) + 2.0 * depth * hd;
    return out;
  }
  if (mode_ == EtaMode::linear && tau <= prof_a_) {
    out.value = depth;
    out.grad = gd;
    out.hess = hd;
    return out;
  }
  const double hp = Hp(tau) * delta_ / scale_;
  out.value = delta_ * H(tau);
  out.grad = hp * gd;
  out.hess = (Hpp(tau) * delta_ / (scale_ * scale_)) * (gd * gd.transpose()) + hp * hd;
  return out;
}

double LocalizationField::value(const Vec2& x) const {
  if (custom_fn_) return custom_fn_(x);
  if (mode_ == EtaMode::constant) return delta_;
  const double depth = domain_.dist_to_boundary(x);
  const double tau = depth / scale_;
  if (mode_ == EtaMode::quadratic && tau <= prof_a_) return depth * depth;
  if (mode_ == EtaMode::linear && tau <= prof_a_) return depth;
  return delta_ * H(tau);
}

// ---------------------------------------------------------------------------

bool LocalizationReport::all_pass() const {
  for (const auto& c : checks)
    if (c.applicable && !c.pass) return false;
  return true;
}

json LocalizationReport::to_json() const {
  json j = json::object();
  for (const auto& c : checks) {
    json e{{"pass", c.pass}, {"margin", c.margin}, {"applicable", c.applicable}};
    if (c.witness) e["witness_point"] = {(*c.witness)[0], (*c.witness)[1]};
    if (!c.note.empty()) e["note"] = c.note;
    j[c.name] = e;
  }
  return j;
}

LocalizationReport check_localization_assumptions(const LocalizationField& eta,
                                                  const Mesh& mesh, double R0) {
  LocalizationReport rep;
  const double delta = eta.delta();
  const double k0 = eta.kappa0();
  const bool constant = eta.mode() == EtaMode::constant;
  const bool quad = eta.mode() == EtaMode::quadratic;
  const int n = mesh.n_nodes();

  std::vector<double> etav(n, 0.0);
  std::vector<EtaEval> ev(n);
  for (int i = 0; i < n; ++i) {
    if (mesh.is_boundary(i)) continue;
    ev[i] = eta.eval(mesh.nodes[i]);
    etav[i] = ev[i].value;
  }

  const double eq_tol = 1e-12 * delta;

  // i) eta == dist^2 (or dist) in the localized collar
  {
    AssumptionCheck c{.name = "A_eta_i"};
    if (constant) {
      c.applicable = false;
      c.note = "constant mode";
      c.margin = 1.0;
    } else {
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        if (mesh.is_boundary(i)) continue;
        const double d = mesh.node_dist[i];
        const double loc = quad ? d * d : d;
        if (loc < k0 * delta) {
          const double viol = std::abs(etav[i] - loc);
          if (viol > worst) {
            worst = viol;
            c.witness = mesh.nodes[i];
          }
        }
      }
      c.margin = eq_tol - worst;
      c.pass = c.margin > 0.0;
    }
    rep.checks.push_back(c);
  }

  // ii) eta == delta deep inside (vacuous when the transition was squeezed)
  {
    AssumptionCheck c{.name = "A_eta_ii"};
    if (constant) {
      c.applicable = false;
      c.note = "constant mode";
      c.margin = 1.0;
    } else {
      double worst = 0.0;
      bool any = false;
      for (int i = 0; i < n; ++i) {
        if (mesh.is_boundary(i)) continue;
        const double d = mesh.node_dist[i];
        const double loc = quad ? d * d : d;
        if (k0 * loc > delta) {
          any = true;
          const double viol = std::abs(etav[i] - delta);
          if (viol > worst) {
            worst = viol;
            c.witness = mesh.nodes[i];
          }
        }
      }
      if (!any) c.note = "vacuous: no node with kappa0*dist-locality above delta";
      c.margin = eq_tol - worst;
      c.pass = c.margin > 0.0;
    }
    rep.checks.push_back(c);
  }

  // iii) |grad eta| <= kappa1 * grad_scale, |hess eta| <= kappa2 (scaled form)
  {
    AssumptionCheck cg{.name = "A_eta_iii_grad"}, ch{.name = "A_eta_iii_hess"};
    double sup_g = 0.0, sup_h = 0.0;
    Vec2 wg = Vec2::Zero(), wh = Vec2::Zero();
    for (int i = 0; i < n; ++i) {
      if (mesh.is_boundary(i)) continue;
      const double gn = ev[i].grad.norm();
      const double hn = ev[i].hess.norm();  // Frobenius dominates the 2-norm
      if (gn > sup_g) {
        sup_g = gn;
        wg = mesh.nodes[i];
      }
      if (hn > sup_h) {
        sup_h = hn;
        wh = mesh.nodes[i];
      }
    }
    const double gbound = eta.kappa1() * eta.grad_scale();
    const double hbound = quad || constant ? eta.kappa2() : eta.kappa2() / delta;
    cg.margin = constant ? 1.0 : (gbound - sup_g) / std::max(gbound, 1e-300);
    ch.margin = constant ? 1.0 : (hbound - sup_h) / std::max(hbound, 1e-300);
    cg.pass = cg.margin > 0.0;
    ch.pass = ch.margin > 0.0;
    cg.witness = wg;
    ch.witness = wh;
    rep.checks.push_back(cg);
    rep.checks.push_back(ch);
  }

  // iv) eta <= kappa_bar0 * min{delta, dist-locality}
  {
    AssumptionCheck c{.name = "A_eta_iv"};
    if (constant) {
      c.applicable = false;
      c.note = "constant mode";
      c.margin = 1.0;
    } else {
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (mesh.is_boundary(i)) continue;
        const double d = mesh.node_dist[i];
        const double cap =
            eta.kappa_bar0() * std::min(delta, quad ? d * d : d);
        const double slack = (cap - etav[i]) / std::max(cap, 1e-300);
        if (slack < worst) {
          worst = slack;
          c.witness = mesh.nodes[i];
        }
      }
      c.margin = worst;
      c.pass = worst > 0.0;
    }
    rep.checks.push_back(c);
  }

  // Two-point comparability over node pairs with |x-y| <= R0*eta(x)
  {
    AssumptionCheck lo{.name = "comparability_lower"}, hi{.name = "comparability_upper"};
    const double s = eta.kappa1() * R0 * (quad ? std::sqrt(delta) : 1.0);
    double worst_lo = std::numeric_limits<double>::infinity();
    double worst_hi = std::numeric_limits<double>::infinity();
    double ratio_min = 1.0, ratio_max = 1.0;
    for (int i = 0; i < n; ++i) {
      if (mesh.is_boundary(i)) continue;
      const double r = R0 * etav[i];
      mesh.for_each_in_ball(mesh.nodes[i], r, [&](int j) {
        if (j == i || mesh.is_boundary(j)) return;
        const double ratio = etav[j] / etav[i];
        ratio_min = std::min(ratio_min, ratio);
        ratio_max = std::max(ratio_max, ratio);
        const double m_lo = ratio - (1.0 - s);
        const double m_hi = (1.0 + s) - ratio;
        if (m_lo < worst_lo) {
          worst_lo = m_lo;
          lo.witness = mesh.nodes[i];
        }
        if (m_hi < worst_hi) {
          worst_hi = m_hi;
          hi.witness = mesh.nodes[i];
        }
      });
    }
    if (!std::isfinite(worst_lo)) worst_lo = s;  // no pairs sampled
    if (!std::isfinite(worst_hi)) worst_hi = s;
    if (constant) {
      // kappa1 = 0: the bounds hold with equality, ratios are identically 1
      const double dev = std::max(std::abs(ratio_min - 1.0), std::abs(ratio_max - 1.0));
      worst_lo = worst_hi = 1e-14 - dev;
      lo.note = hi.note =
          "constant mode: ratios identically 1 (min " + fmt17(ratio_min) + ", max " +
          fmt17(ratio_max) + ")";
    }
    lo.margin = worst_lo;
    hi.margin = worst_hi;
    lo.pass = worst_lo > 0.0;
    hi.pass = worst_hi > 0.0;
    rep.checks.push_back(lo);
    rep.checks.push_back(hi);
  }

  // Layer inclusion at sampled radii r: dist(x) < r/(1+kb*R0*sg)  =>  all
  // kernel neighbors stay inside the r-layer.
  {
    AssumptionCheck c{.name = "layer_inclusion"};
    if (constant) {
      c.applicable = false;
      c.note = "constant mode";
      c.margin = 1.0;
    } else {
      const double sg = quad ? std::sqrt(delta) : 1.0;
      const double shrink = 1.0 + eta.kappa_bar0() * R0 * sg;
      double worst = std::numeric_limits<double>::infinity();
      const std::vector<double> radii =
          quad ? std::vector<double>{std::sqrt(k0 * delta), std::sqrt(delta),
                                     2.0 * std::sqrt(delta)}
               : std::vector<double>{k0 * delta, delta, 2.0 * delta};
      for (double r : radii) {
        if (r >= mesh.domain.max_interior_dist()) continue;
        for (int i = 0; i < n; ++i) {
          if (mesh.is_boundary(i)) continue;
          if (mesh.node_dist[i] >= r / shrink) continue;
          mesh.for_each_in_ball(mesh.nodes[i], R0 * etav[i], [&](int j) {
            if (mesh.is_boundary(j)) return;
            const double m = (r - mesh.node_dist[j]) / r;
            if (m < worst) {
              worst = m;
              c.witness = mesh.nodes[j];
            }
          });
        }
      }
      if (!std::isfinite(worst)) {
        worst = 1.0;
        c.note = "vacuous: no sampled radius applicable";
      }
      c.margin = worst;
      c.pass = worst > 0.0;
    }
    rep.checks.push_back(c);
  }

  return rep;
}

}  // namespace nlbvp
