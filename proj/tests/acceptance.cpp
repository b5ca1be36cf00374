// Acceptance suite: one pass/fail line per criterion, pinned tolerances.
// Exit code = number of failed criteria.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <filesystem>
#include <fstream>

#include "nlbvp/cli.hpp"
#include "nlbvp/quadrature.hpp"
#include "nlbvp/verify.hpp"

using namespace nlbvp;

namespace {

constexpr double kPi = std::numbers::pi;
int g_failures = 0;

void record(const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Bench1D {
  Domain dom = Domain::interval(0.0, 1.0);
  double delta;
  LocalizationField eta;
  KernelProfile prof = KernelProfile::poly_bump(1, 0.9, 2);
  Mesh mesh;
  TwoPointKernel k2;
  Workspace ws;
  Bench1D(double d, EtaMode mode = EtaMode::quadratic, double kappa0 = 0.25)
      : delta(d),
        eta(LocalizationField::build(dom, d, kappa0, mode)),
        mesh(build_mesh(dom, d / 8.0, kappa0 * d / 16.0, 0.3, eta)),
        k2(prof, eta, 2.0),
        ws(make_workspace(mesh, k2)) {}
};

Eigen::VectorXd mollified_sin_load(const Bench1D& fx) {
  RoughData rough;
  rough.f0 = GridFunction::sample(
      fx.mesh, [](const Vec2& x) { return kPi * kPi * std::sin(kPi * x[0]); });
  rough.f1 = VectorGridFunction(fx.mesh);
  const Eigen::VectorXd phi = phi_vector(fx.ws);
  return load_hminus1_mollified(fx.ws, rough, phi, grad_phi_vector(fx.ws));
}

// --------------------------------------------------------------------------

void criterion1_kernel_normalization() {
  const auto k1 = KernelProfile::poly_bump(1, 0.9, 2);
  const auto k2 = KernelProfile::poly_bump(2, 0.9, 2);
  const double e1 = std::abs(k1.moment2() - 1.0);
  const double e2 = std::abs(k2.moment2() - 2.0);
  // isotropy in d=2: polar quadrature, trapezoid in the angle (exact for the
  // trigonometric-polynomial integrands), adaptive radius
  double m[2][2] = {{0, 0}, {0, 0}};
  const int M = 32;
  for (int a = 0; a < M; ++a) {
    const double th = 2.0 * kPi * a / M;
    const double cx = std::cos(th), sx = std::sin(th);
    const double radial = adaptive_simpson(
        [&](double r) { return r * r * r * k2.rho(r); }, 0.0, 0.9, 1e-12);
    m[0][0] += cx * cx * radial;
    m[1][1] += sx * sx * radial;
    m[0][1] += cx * sx * radial;
  }
  for (auto& row : m)
    for (auto& v : row) v *= 2.0 * kPi / M;
  const double iso = std::max({std::abs(m[0][0] - 1.0), std::abs(m[1][1] - 1.0),
                               std::abs(m[0][1])});
  const bool pass = e1 <= 1e-8 && e2 <= 1e-8 && iso <= 1e-6;
  record("C1 kernel normalization",
         pass, "A2 err d1=" + fmt(e1) + " d2=" + fmt(e2) + ", isotropy=" + fmt(iso));
}

void criterion2_localization_assumptions() {
  bool pass = true;
  std::string detail;
  for (const Domain& dom : {Domain::interval(0.0, 1.0), Domain::disk(Vec2(0, 0), 1.0)}) {
    for (double delta : {0.1, 0.05, 0.025}) {
      const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
      Mesh mesh = dom.dim() == 1
                      ? build_mesh(dom, delta / 8, 0.25 * delta / 16, 0.3, eta)
                      : build_mesh(dom, delta / 8, delta / 8, 0.5, eta);  // uniform disk
      const auto rep = check_localization_assumptions(eta, mesh, 0.9);
      double worst = 1e300;
      for (const auto& c : rep.checks)
        if (c.applicable) worst = std::min(worst, c.margin);
      if (!(rep.all_pass() && worst > 0.0)) {
        pass = false;
        detail += " fail at delta=" + fmt(delta);
      }
    }
    // delta >= delta0 must be rejected
    bool rejected = false;
    try {
      LocalizationField::build(dom, 0.2, 0.25, EtaMode::quadratic);
    } catch (const Error&) {
      rejected = true;
    }
    if (!rejected) {
      pass = false;
      detail += " delta>=delta0 accepted";
    }
  }
  record("C2 localization assumptions", pass,
         pass ? "A_eta i-iv + comparability pass, delta0 gate active" : detail);
}

void criterion3_operator_identities() {
  // exact zero on constants
  Bench1D fx(0.05);
  GridFunction c(fx.mesh);
  c.values.setConstant(2.0);
  const GridFunction lc = apply_L(fx.ws, c);
  const bool zero_exact = lc.values.cwiseAbs().maxCoeff() == 0.0;

  // quadratic identity at deep interior, constant mode, both dimensions
  double worst_quad = 0.0;
  {
    Bench1D fq(0.1, EtaMode::constant);
    const GridFunction u =
        GridFunction::sample(fq.mesh, [](const Vec2& x) { return 0.5 * x[0] * x[0]; });
    const GridFunction lu = apply_L(fq.ws, u);
    for (int i = 0; i < fq.mesh.n_nodes(); ++i)
      if (!fq.mesh.is_boundary(i) && fq.mesh.node_dist[i] > 0.95 * fq.delta)
        worst_quad = std::max(worst_quad, std::abs(lu.values[i] + 1.0));
  }
  {
    const Domain disk = Domain::disk(Vec2(0, 0), 1.0);
    const auto eta = LocalizationField::build(disk, 0.1, 0.25, EtaMode::constant);
    const auto prof2 = KernelProfile::poly_bump(2, 0.9, 2);
    const Mesh mesh = build_mesh(disk, 0.1 / 8, 0.1 / 8, 0.5, eta);
    const TwoPointKernel k(prof2, eta, 2.0);
    const Workspace ws = make_workspace(mesh, k);
    const GridFunction u =
        GridFunction::sample(mesh, [](const Vec2& x) { return 0.5 * x.squaredNorm(); });
    const GridFunction lu = apply_L(ws, u);
    for (int i = 0; i < mesh.n_nodes(); ++i)
      if (!mesh.is_boundary(i) && mesh.node_dist[i] > 0.95 * 0.1)
        worst_quad = std::max(worst_quad, std::abs(lu.values[i] + 2.0));
  }

  // scaled boundedness band over the sweep, 20 random nodal u
  std::mt19937 rng(7u);
  std::normal_distribution<double> un(0.0, 1.0);
  double band_lo = 1e300, band_hi = 0.0;
  for (double delta : {0.1, 0.05, 0.025}) {
    Bench1D fd(delta);
    const Eigen::VectorXd phi = phi_vector(fd.ws);
    double cmax = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      GridFunction u(fd.mesh);
      for (int i = 0; i < fd.mesh.n_nodes(); ++i) u.values[i] = un(rng);
      GridFunction lu = apply_L(fd.ws, u);
      for (int i = 0; i < fd.mesh.n_nodes(); ++i)
        lu.values[i] = fd.mesh.is_boundary(i) ? 0.0 : lu.values[i] / phi[i];
      cmax = std::max(cmax, lu.l2_norm() / u.l2_norm());
    }
    band_lo = std::min(band_lo, cmax);
    band_hi = std::max(band_hi, cmax);
  }
  const bool pass = zero_exact && worst_quad <= 5e-3 && band_hi / band_lo < 2.0;
  record("C3 operator identities", pass,
         "L(const)=0 exact=" + std::string(zero_exact ? "yes" : "no") +
             ", |L(q)+d| max=" + fmt(worst_quad) + ", C band=" + fmt(band_hi / band_lo));
}

void criterion4_greens_identity() {
  bool pass = true;
  std::string detail;
  // interval: u = sin(pi x), v = cos(pi x), delta = 0.05
  {
    const Domain dom = Domain::interval(0.0, 1.0);
    const double delta = 0.05;
    const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
    const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
    const TwoPointKernel k(prof, eta, 2.0);
    const auto u = analytic_function("sin_pi", 1);
    const auto v = analytic_function("cos_pi", 1);
    std::vector<double> res;
    double scale = 1.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
      const double f = std::pow(0.5, lvl);
      const Mesh mesh = build_mesh(dom, delta / 8 * f, 0.25 * delta / 16 * f, 0.3, eta);
      const GreensResult gr = greens_residual(k, mesh, u, v);
      res.push_back(gr.residual);
      scale = gr.boundary_scale;
    }
    const bool dec = res[1] <= 0.5 * res[0] && res[2] <= 0.5 * res[1];
    const bool fine = res[2] < 1e-2 * scale;
    if (!(dec && fine)) pass = false;
    detail += "1D res " + fmt(res[0]) + "->" + fmt(res[1]) + "->" + fmt(res[2]) +
              " (scale " + fmt(scale) + ")";
  }
  // disk: u = x1^2, v = 1, delta = 0.05
  {
    const Domain dom = Domain::disk(Vec2(0, 0), 1.0);
    const double delta = 0.05;
    const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
    const auto prof = KernelProfile::poly_bump(2, 0.9, 2);
    const TwoPointKernel k(prof, eta, 2.0);
    const auto u = analytic_function("x1_squared", 2);
    const auto v = analytic_function("one", 2);
    std::vector<double> res;
    double scale = 1.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
      const double h = delta / 2 * std::pow(0.5, lvl);
      const Mesh mesh = build_mesh(dom, h, 0.5 * h, 0.5, eta);
      const GreensResult gr = greens_residual(k, mesh, u, v, 1e-8);
      res.push_back(gr.residual);
      scale = gr.boundary_scale;
    }
    const bool dec = res[1] <= 0.5 * res[0] && res[2] <= 0.5 * res[1];
    const bool fine = res[2] < 1e-2 * scale;
    if (!(dec && fine)) pass = false;
    detail += "; disk res " + fmt(res[0]) + "->" + fmt(res[1]) + "->" + fmt(res[2]) +
              " (scale " + fmt(scale) + ")";
  }
  record("C4 Greens identity", pass, detail);
}

void criterion5_linear_localization() {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const auto u = analytic_function("sin_pi", 1);
  const auto v = analytic_function("affine", 1);
  const StudyReport rep = linear_localization_demo(dom, prof, 0.25, u, v,
                                                   {0.08, 0.04, 0.02}, MeshPolicy::for_dim(1));
  const double C_rho = prof.linear_mode_constant();
  const double fq = rep.rows.back().metric("factor_quadratic");
  const double fl = rep.rows.back().metric("factor_linear");
  const bool pass =
      std::abs(fq - 1.0) <= 0.05 && std::abs(fl - C_rho) <= 0.10 * C_rho && C_rho > 1.0;
  record("C5 linear-localization contrast", pass,
         "factor_quad=" + fmt(fq) + ", factor_lin=" + fmt(fl) + ", C_rho=" + fmt(C_rho));
}

void criterion6_convolutions() {
  bool adjoint_ok = true, k1_ok = true, support_ok = true;
  std::mt19937 rng(11u);
  std::normal_distribution<double> un(0.0, 1.0);
  double prev_err = 1e300;
  bool dec_ok = true;
  double band_lo = 1e300, band_hi = 0.0;
  for (double delta : {0.1, 0.05, 0.025}) {
    Bench1D fx(delta);
    const Eigen::VectorXd phi = phi_vector(fx.ws);
    // adjointness (relative to the pairing magnitude)
    for (int rep = 0; rep < 5; ++rep) {
      GridFunction a(fx.mesh), b(fx.mesh);
      for (int i = 0; i < fx.mesh.n_nodes(); ++i) {
        a.values[i] = un(rng);
        b.values[i] = un(rng);
      }
      const double lhs = apply_K(fx.ws, a, phi).dot(b);
      const double rhs = a.dot(apply_K_star(fx.ws, b, phi));
      if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(lhs))) adjoint_ok = false;
    }
    // K(1) = 1 exactly
    GridFunction one(fx.mesh);
    one.values.setOnes();
    const GridFunction k1v = apply_K(fx.ws, one, phi);
    for (int i = 0; i < fx.mesh.n_nodes(); ++i)
      if (!fx.mesh.is_boundary(i) && k1v.values[i] != 1.0) k1_ok = false;
    // support containment on every node
    const double sqrt_r = 0.25;
    const GridFunction uc = GridFunction::sample(fx.mesh, [&](const Vec2& x) {
      return fx.dom.dist_to_boundary(x) >= sqrt_r ? 1.0 : 0.0;
    });
    const GridFunction kuc = apply_K(fx.ws, uc, phi);
    const double s = fx.eta.kappa_bar0() * 0.9 * std::sqrt(delta);
    const double keep = (1.0 - s) / (1.0 + s) * sqrt_r;
    for (int i = 0; i < fx.mesh.n_nodes(); ++i)
      if (!fx.mesh.is_boundary(i) && fx.mesh.node_dist[i] < keep && kuc.values[i] != 0.0)
        support_ok = false;
    // || K u - u || strictly decreasing for sin(pi x)
    const GridFunction su =
        GridFunction::sample(fx.mesh, [](const Vec2& x) { return std::sin(kPi * x[0]); });
    GridFunction diff = apply_K(fx.ws, su, phi);
    diff.values -= su.values;
    for (int b : fx.mesh.boundary_nodes) diff.values[b] = 0.0;
    const double err = diff.l2_norm();
    if (!(err < prev_err)) dec_ok = false;
    prev_err = err;
    // || grad K u || <= C [u]
    const std::vector<Vec2> gphi = grad_phi_vector(fx.ws);
    const VectorGridFunction gk = grad_K(fx.ws, su, phi, gphi);
    Eigen::VectorXd gmag(fx.mesh.n_nodes());
    for (int i = 0; i < fx.mesh.n_nodes(); ++i)
      gmag[i] = gk.values[static_cast<std::size_t>(i)].norm();
    const double num = fx.ws.trusted_l2_norm(gmag);
    const double den = seminorm(fx.ws, su, 0.9);
    band_lo = std::min(band_lo, num / den);
    band_hi = std::max(band_hi, num / den);
  }
  const bool band_ok = band_hi / band_lo < 2.0;
  const bool pass = adjoint_ok && k1_ok && support_ok && dec_ok && band_ok;
  record("C6 boundary-localized convolutions", pass,
         std::string("adjoint=") + (adjoint_ok ? "ok" : "FAIL") + ", K(1)=" +
             (k1_ok ? "exact" : "FAIL") + ", support=" + (support_ok ? "ok" : "FAIL") +
             ", decay=" + (dec_ok ? "ok" : "FAIL") + ", gradK band=" + fmt(band_hi / band_lo));
}

void criterion7_f1_collar() {
  bool vanish_ok = true;
  double band_lo = 1e300, band_hi = 0.0;
  for (double delta : {0.01, 0.005, 0.0025}) {
    Bench1D fx(delta);
    const VectorGridFunction f1 = f1_field(fx.ws);
    const double cbar = (1.0 + fx.eta.kappa_bar0() * 0.9) / std::sqrt(0.25);
    const double collar = cbar * std::sqrt(delta);
    double sup_all = 0.0;
    for (int i = 0; i < fx.mesh.n_nodes(); ++i) {
      if (fx.mesh.is_boundary(i) || !fx.ws.trusted[i]) continue;
      const double mag = f1.values[static_cast<std::size_t>(i)].norm();
      if (fx.mesh.node_dist[i] >= collar && mag > 1e-10) vanish_ok = false;
      sup_all = std::max(sup_all, mag);
    }
    band_lo = std::min(band_lo, sup_all);
    band_hi = std::max(band_hi, sup_all);
  }
  const bool band_ok = band_hi / band_lo < 2.0;
  record("C7 F1 collar", vanish_ok && band_ok,
         std::string("vanishing=") + (vanish_ok ? "ok" : "FAIL") +
             ", sup band=" + fmt(band_hi / band_lo));
}

void criterion8_poincare() {
  bool positive = true;
  std::vector<double> cds, cns;
  for (double delta : {0.1, 0.05, 0.025}) {
    Bench1D fx(delta);
    const OperatorAssembly a = assemble(fx.ws);
    const PoincareResult d = poincare_constant(a, fx.ws, PoincareVariant::dirichlet);
    const PoincareResult n = poincare_constant(a, fx.ws, PoincareVariant::neumann);
    if (!(d.lambda_min > 0.0 && n.lambda_min > 0.0)) positive = false;
    cds.push_back(d.constant);
    cns.push_back(n.constant);
  }
  const auto [dlo, dhi] = std::minmax_element(cds.begin(), cds.end());
  const auto [nlo, nhi] = std::minmax_element(cns.begin(), cns.end());
  const bool band = *dhi / *dlo <= 3.0 && *nhi / *nlo <= 3.0;
  const double ratio = cds.back() * kPi;  // vs local 1/pi
  const bool near_local = ratio < 2.0 && ratio > 0.5;
  record("C8 Poincare", positive && band && near_local,
         "C_D band=" + fmt(*dhi / *dlo) + ", C_N band=" + fmt(*nhi / *nlo) +
             ", C_D*pi @0.025=" + fmt(ratio));
}

void criterion9_solvers() {
  Bench1D fx(0.05);
  const OperatorAssembly a = assemble(fx.ws);
  double max_entry = 0.0, max_asym = 0.0;
  const Eigen::SparseMatrix<double> diff =
      Eigen::SparseMatrix<double>(a.stiffness.transpose()) - a.stiffness;
  for (int k = 0; k < a.stiffness.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a.stiffness, k); it; ++it)
      max_entry = std::max(max_entry, std::abs(it.value()));
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      max_asym = std::max(max_asym, std::abs(it.value()));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(fx.mesh.n_nodes());
  const bool sym_ok = max_asym <= 1e-12 * max_entry;
  const bool null_ok = (a.stiffness * ones).cwiseAbs().maxCoeff() <= 1e-10 * max_entry;
  std::mt19937 rng(3u);
  std::normal_distribution<double> un(0.0, 1.0);
  bool psd_ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd v(fx.mesh.n_nodes());
    for (int i = 0; i < v.size(); ++i) v[i] = un(rng);
    if (v.dot(a.stiffness * v) < -1e-12 * max_entry * v.squaredNorm()) psd_ok = false;
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(fx.mesh.n_nodes());
  auto zf = [](const Vec2&) { return 0.0; };
  const Solution dz = solve_dirichlet(a, fx.ws, zero, zf);
  const Solution nz = solve_neumann(a, fx.ws, zero, zero);
  const bool homog_ok = dz.u.values.cwiseAbs().maxCoeff() == 0.0 &&
                        nz.u.values.cwiseAbs().maxCoeff() <= 1e-13;

  // fixed point vs CG at delta = 0.1
  Bench1D fq(0.1);
  const OperatorAssembly aq = assemble(fq.ws);
  const Eigen::VectorXd phi = phi_vector(fq.ws);
  RoughData rough;
  rough.f0 = GridFunction::sample(
      fq.mesh, [](const Vec2& x) { return kPi * kPi * std::sin(kPi * x[0]); });
  rough.f1 = VectorGridFunction(fq.mesh);
  const GridFunction f_delta = apply_K_star(fq.ws, rough.f0, phi);
  const Solution cg = solve_dirichlet(aq, fq.ws, load_l2(f_delta), zf, 1e-12);
  const Solution fp = solve_fixed_point(fq.ws, f_delta, zf, 1e-9, 300000);
  const double fp_gap = (cg.u.values - fp.u.values).cwiseAbs().maxCoeff();

  bool compat_reject = false;
  try {
    GridFunction bad(fx.mesh);
    bad.values.setOnes();
    solve_neumann(a, fx.ws, load_l2(bad), zero);
  } catch (const Error& e) {
    compat_reject = e.kind() == ErrorKind::validation;
  }

  Eigen::VectorXd nload = mollified_sin_load(fx);
  nload.array() -= nload.sum() * fx.mesh.weights.array();
  const Eigen::VectorXd gz = Eigen::VectorXd::Zero(fx.mesh.n_nodes());
  const Solution nsol = solve_neumann(a, fx.ws, nload, gz);
  const bool mean_ok = nsol.constraint_residual <= 1e-10 * std::max(1.0, nsol.u.l2_norm());

  const bool pass =
      sym_ok && null_ok && psd_ok && homog_ok && fp_gap <= 1e-6 && compat_reject && mean_ok;
  record("C9 solvers", pass,
         std::string("sym/PSD/null=") + (sym_ok && psd_ok && null_ok ? "ok" : "FAIL") +
             ", homog=" + (homog_ok ? "ok" : "FAIL") + ", fp-cg=" + fmt(fp_gap) +
             ", compat reject=" + (compat_reject ? "ok" : "FAIL") +
             ", phi-mean=" + fmt(nsol.constraint_residual));
}

void criterion10_local_limits() {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const std::vector<double> sweep{0.1, 0.05, 0.025};
  const StudyReport loc =
      localization_study(dom, prof, 0.25, EtaMode::quadratic, analytic_function("sin_pi", 1),
                         analytic_function("bump", 1), sweep, MeshPolicy::for_dim(1));
  const bool op_dec = loc.strictly_decreasing("op_l2_error");
  const bool bil_dec = loc.strictly_decreasing("bilinear_gap");

  ConvergenceConfig dcfg;
  dcfg.u_star = analytic_function("sin_pi", 1);
  dcfg.f = analytic_function("sin_pi", 1, kPi * kPi);
  const StudyReport drep = convergence_study(dcfg, sweep);
  const bool d_dec = drep.strictly_decreasing("l2_error");
  const double d_final = drep.rows.back().metric("l2_error");

  ConvergenceConfig ncfg;
  ncfg.bc = "neumann";
  ncfg.u_star = analytic_function("cos_pi", 1);
  ncfg.f = analytic_function("cos_pi", 1, kPi * kPi);
  const StudyReport nrep = convergence_study(ncfg, sweep);
  const bool n_dec = nrep.strictly_decreasing("l2_error");

  const bool pass = op_dec && bil_dec && d_dec && n_dec && d_final < 5e-2;
  record("C10 vanishing-horizon consistency", pass,
         std::string("op=") + (op_dec ? "dec" : "FAIL") + ", bilinear=" +
             (bil_dec ? "dec" : "FAIL") + ", dirichlet=" + (d_dec ? "dec" : "FAIL") +
             " final " + fmt(d_final) + ", neumann=" + (n_dec ? "dec" : "FAIL"));
}

void criterion11_mollification() {
  // mean preservation
  Bench1D fx(0.05);
  const Eigen::VectorXd phi = phi_vector(fx.ws);
  const std::vector<Vec2> gphi = grad_phi_vector(fx.ws);
  RoughData f;
  f.f0 = GridFunction::sample(fx.mesh,
                              [](const Vec2& x) { return std::sin(2.0 * kPi * x[0]); });
  f.f1 = VectorGridFunction::sample(fx.mesh, [](const Vec2& x) {
    const double t = (x[0] - 0.5) / 0.06;
    return Vec2(std::exp(-0.5 * t * t), 0.0);
  });
  f.support_radius = 0.2;
  for (int i = 0; i < fx.mesh.n_nodes(); ++i)
    if (fx.mesh.node_dist[i] < f.support_radius)
      f.f1.values[static_cast<std::size_t>(i)] = Vec2::Zero();
  const MollifyResult nres = mollify_neumann(f, fx.ws, phi, gphi);
  const double mean_gap = std::abs(nres.pointwise.weighted_sum() - f.f0.weighted_sum());

  // weak pairing for 5 test functions and weighted-norm band over the sweep
  bool pairing_ok = true;
  std::vector<double> norms;
  const std::vector<std::string> names = {"one", "sin_pi", "cos_pi", "bump", "quadratic"};
  std::vector<std::vector<double>> gaps(names.size());
  for (double delta : {0.1, 0.05, 0.025}) {
    Bench1D fd(delta);
    const Eigen::VectorXd phid = phi_vector(fd.ws);
    const std::vector<Vec2> gphid = grad_phi_vector(fd.ws);
    RoughData fr;
    fr.f0 = GridFunction::sample(fd.mesh,
                                 [](const Vec2& x) { return std::sin(2.0 * kPi * x[0]); });
    fr.f1 = VectorGridFunction::sample(fd.mesh, [](const Vec2& x) {
      const double t = (x[0] - 0.5) / 0.06;
      return Vec2(std::exp(-0.5 * t * t), 0.0);
    });
    fr.support_radius = 0.2;
    for (int i = 0; i < fd.mesh.n_nodes(); ++i)
      if (fd.mesh.node_dist[i] < fr.support_radius)
        fr.f1.values[static_cast<std::size_t>(i)] = Vec2::Zero();
    const MollifyResult res = mollify_dirichlet(fr, fd.ws, phid, gphid);
    norms.push_back(res.diagnostics.eta_weighted_l2 + res.diagnostics.eta2_grad_l2);
    for (std::size_t kf = 0; kf < names.size(); ++kf) {
      const auto v = analytic_function(names[kf], 1);
      double lhs = 0.0, rhs = 0.0;
      for (int i = 0; i < fd.mesh.n_nodes(); ++i) {
        lhs += res.load[i] * v.value(fd.mesh.nodes[i]);
        rhs += fd.mesh.weights[i] *
               (fr.f0.values[i] * v.value(fd.mesh.nodes[i]) +
                fr.f1.values[static_cast<std::size_t>(i)].dot(v.grad(fd.mesh.nodes[i])));
      }
      gaps[kf].push_back(std::abs(lhs - rhs));
    }
  }
  for (const auto& g : gaps)
    if (!(g.back() < g.front() && g.back() < 2e-2)) pairing_ok = false;
  const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
  const bool band_ok = *hi / *lo < 2.0;
  const bool pass = mean_gap <= 1e-8 && pairing_ok && band_ok;
  record("C11 mollification", pass,
         "mean gap=" + fmt(mean_gap) + std::string(", pairing=") +
             (pairing_ok ? "ok" : "FAIL") + ", norm band=" + fmt(*hi / *lo));
}

void criterion12_normal_derivatives() {
  std::vector<double> errors;
  double ext_gap = 0.0;
  for (double delta : {0.1, 0.05, 0.025}) {
    Bench1D fx(delta);
    const OperatorAssembly a = assemble(fx.ws);
    const Eigen::VectorXd load = mollified_sin_load(fx);
    const Solution sol =
        solve_dirichlet(a, fx.ws, load, [](const Vec2&) { return 0.0; }, 1e-12);
    GridFunction v1(fx.mesh);
    v1.values.setOnes();
    const double p1 = normal_derivative_pair(a, fx.ws, sol, load, v1);
    errors.push_back(std::abs(p1 + 2.0 * kPi));
    const GridFunction v2 = GridFunction::sample(
        fx.mesh, [](const Vec2& x) { return 1.0 + std::sin(kPi * x[0]); });
    const double p2 = normal_derivative_pair(a, fx.ws, sol, load, v2);
    ext_gap = std::max(ext_gap, std::abs(p1 - p2));
  }
  const bool dec = errors[1] < errors[0] && errors[2] < errors[1];
  const bool ext_ok = ext_gap <= 1e-8;
  record("C12 normal derivatives", dec && ext_ok,
         "err " + fmt(errors[0]) + "->" + fmt(errors[1]) + "->" + fmt(errors[2]) +
             ", extension gap=" + fmt(ext_gap));
}

void criterion13_determinism() {
  json cfg{{"domain", {{"kind", "interval"}, {"a", 0.0}, {"b", 1.0}}},
           {"kernel", {{"family", "poly_bump"}, {"R0", 0.9}, {"p", 2}}},
           {"localization", {{"kappa0", 0.25}, {"mode", "quadratic"}}},
           {"deltas", {0.1, 0.05, 0.025}},
           {"problem",
            {{"bc", "dirichlet"},
             {"u_star", {{"name", "sin_pi"}}},
             {"f", {{"name", "sin_pi"}, {"scale", 9.869604401089358}}}}},
           {"threads", 4}};
  namespace fs = std::filesystem;
  const fs::path tmp = fs::temp_directory_path() / "nlbvp_acceptance_det";
  fs::remove_all(tmp);
  cli::run_command("study", cfg, (tmp / "a").string());
  cli::run_command("study", cfg, (tmp / "b").string());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = slurp(tmp / "a" / "study.csv");
  const std::string b = slurp(tmp / "b" / "study.csv");
  fs::remove_all(tmp);
  record("C13 determinism", !a.empty() && a == b,
         a == b ? "byte-identical study CSVs" : "CSV mismatch");
}

}  // namespace

int main() {
  try {
    criterion1_kernel_normalization();
    criterion2_localization_assumptions();
    criterion3_operator_identities();
    criterion4_greens_identity();
    criterion5_linear_localization();
    criterion6_convolutions();
    criterion7_f1_collar();
    criterion8_poincare();
    criterion9_solvers();
    criterion10_local_limits();
    criterion11_mollification();
    criterion12_normal_derivatives();
    criterion13_determinism();
  } catch (const Error& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 99;
  }
  std::printf("%d/13 criteria passed\n", 13 - g_failures);
  return g_failures;
}
