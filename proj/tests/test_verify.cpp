#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlbvp/verify.hpp"
#include "test_support.hpp"

using namespace nlbvp;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("greens residual: constants make every term vanish") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto eta = LocalizationField::build(dom, 0.05, 0.25, EtaMode::quadratic);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const TwoPointKernel k(prof, eta, 2.0);
  const Mesh mesh = build_mesh(dom, 0.05 / 4, 0.05 / 16, 0.3, eta);
  const auto one = analytic_function("one", 1);
  const GreensResult gr = greens_residual(k, mesh, one, one);
  CHECK(gr.residual <= 1e-12);
  CHECK(gr.bilinear == 0.0);
  CHECK(gr.boundary_term == 0.0);
}

TEST_CASE("greens residual decreases under refinement (interval)") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const double delta = 0.05;
  const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const TwoPointKernel k(prof, eta, 2.0);
  const auto u = analytic_function("sin_pi", 1);
  const auto v = analytic_function("cos_pi", 1);
  std::vector<double> residuals;
  for (int lvl = 0; lvl < 3; ++lvl) {
    const double f = std::pow(0.5, lvl);
    const Mesh mesh = build_mesh(dom, delta / 8 * f, 0.25 * delta / 16 * f, 0.3, eta);
    const GreensResult gr = greens_residual(k, mesh, u, v);
    residuals.push_back(gr.residual);
    // signed boundary term vanishes for this pair; the scale does not
    CHECK(std::abs(gr.boundary_term) <= 1e-10);
    CHECK(gr.boundary_scale == doctest::Approx(2.0 * kPi).epsilon(1e-10));
  }
  CHECK(residuals[1] < residuals[0]);
  CHECK(residuals[2] < residuals[1]);
  // observed order >= 1
  CHECK(residuals[2] <= 0.5 * residuals[1]);
}

TEST_CASE("localization study: quadratic u in constant mode sits at the quadrature floor") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const auto u = analytic_function("quadratic", 1);
  const auto v = analytic_function("bump", 1);
  const StudyReport rep = localization_study(dom, prof, 0.25, EtaMode::constant, u, v,
                                             {0.1, 0.05, 0.025}, MeshPolicy::for_dim(1));
  for (const auto& row : rep.rows) CHECK(row.metric("op_l2_error") < 5e-3);
}

TEST_CASE("localization study: sin(pi x) errors decrease along the sweep") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const auto u = analytic_function("sin_pi", 1);
  const auto v = analytic_function("bump", 1);
  const StudyReport rep = localization_study(dom, prof, 0.25, EtaMode::quadratic, u, v,
                                             {0.1, 0.05, 0.025}, MeshPolicy::for_dim(1));
  CHECK(rep.strictly_decreasing("op_l2_error"));
  CHECK(rep.strictly_decreasing("bilinear_gap"));
  // csv round trip sanity
  const std::string csv = rep.to_csv();
  CHECK(csv.find("op_l2_error") != std::string::npos);
}

TEST_CASE("poincare constants: positive, stable, near 1/pi at small delta") {
  std::vector<double> cds, cns;
  for (double delta : {0.1, 0.05, 0.025}) {
    const Domain dom = Domain::interval(0.0, 1.0);
    const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
    const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
    const Mesh mesh = build_mesh(dom, delta / 8, 0.25 * delta / 16, 0.3, eta);
    const TwoPointKernel k(prof, eta, 2.0);
    const Workspace ws = make_workspace(mesh, k);
    const OperatorAssembly a = assemble(ws);
    const PoincareResult d = poincare_constant(a, ws, PoincareVariant::dirichlet);
    const PoincareResult n = poincare_constant(a, ws, PoincareVariant::neumann);
    CHECK(d.lambda_min > 0.0);
    CHECK(n.lambda_min > 0.0);
    cds.push_back(d.constant);
    cns.push_back(n.constant);
  }
  const auto [dlo, dhi] = std::minmax_element(cds.begin(), cds.end());
  const auto [nlo, nhi] = std::minmax_element(cns.begin(), cns.end());
  CHECK(*dhi / *dlo < 3.0);
  CHECK(*nhi / *nlo < 3.0);
  CHECK(cds.back() < 2.0 / kPi);
  CHECK(cds.back() > 0.5 / kPi);
}

TEST_CASE("convergence study: Dirichlet sin benchmark decreases") {
  ConvergenceConfig cfg;
  cfg.u_star = analytic_function("sin_pi", 1);
  cfg.f = analytic_function("sin_pi", 1, kPi * kPi);
  const StudyReport rep = convergence_study(cfg, {0.1, 0.05, 0.025});
  CHECK(rep.strictly_decreasing("l2_error"));
  CHECK(rep.rows.back().metric("l2_error") < 5e-2);
}

TEST_CASE("normal derivative pairing: extension independence") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const double delta = 0.05;
  const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const Mesh mesh = build_mesh(dom, delta / 8, 0.25 * delta / 16, 0.3, eta);
  const TwoPointKernel k(prof, eta, 2.0);
  const Workspace ws = make_workspace(mesh, k);
  const OperatorAssembly a = assemble(ws);
  const TwoPointKernel k2m(prof, eta, 2.0);
  RoughData rough;
  rough.f0 = GridFunction::sample(
      mesh, [](const Vec2& x) { return kPi * kPi * std::sin(kPi * x[0]); });
  rough.f1 = VectorGridFunction(mesh);
  const Eigen::VectorXd phi = phi_vector(ws);
  const Eigen::VectorXd load = load_hminus1_mollified(ws, rough, phi, grad_phi_vector(ws));
  const Solution sol =
      solve_dirichlet(a, ws, load, [](const Vec2&) { return 0.0; }, 1e-12);

  // two extensions of the same boundary trace (v == 1 on both endpoints)
  GridFunction v1(mesh);
  v1.values.setOnes();
  const GridFunction v2 = GridFunction::sample(
      mesh, [](const Vec2& x) { return 1.0 + std::sin(kPi * x[0]); });
  const double p1 = normal_derivative_pair(a, ws, sol, load, v1);
  const double p2 = normal_derivative_pair(a, ws, sol, load, v2);
  CHECK(std::abs(p1 - p2) <= 1e-8 * std::max(1.0, std::abs(p1)));
  // and the pairing approximates -2 pi
  CHECK(p1 == doctest::Approx(-2.0 * kPi).epsilon(2e-2));
}

TEST_CASE("zero-trace extension pairs to ~0 (Galerkin orthogonality)") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const double delta = 0.05;
  const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const Mesh mesh = build_mesh(dom, delta / 8, 0.25 * delta / 16, 0.3, eta);
  const TwoPointKernel k(prof, eta, 2.0);
  const Workspace ws = make_workspace(mesh, k);
  const OperatorAssembly a = assemble(ws);
  RoughData rough;
  rough.f0 = GridFunction::sample(
      mesh, [](const Vec2& x) { return kPi * kPi * std::sin(kPi * x[0]); });
  rough.f1 = VectorGridFunction(mesh);
  const Eigen::VectorXd phi = phi_vector(ws);
  const Eigen::VectorXd load = load_hminus1_mollified(ws, rough, phi, grad_phi_vector(ws));
  const Solution sol =
      solve_dirichlet(a, ws, load, [](const Vec2&) { return 0.0; }, 1e-12);
  const GridFunction v = GridFunction::sample(mesh, analytic_function("bump", 1).value);
  const double p = normal_derivative_pair(a, ws, sol, load, v);
  CHECK(std::abs(p) <= 1e-4);  // collar-excluded load mass only
}

TEST_CASE("linear localization demo: factors near 1 and C_rho") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const auto u = analytic_function("sin_pi", 1);
  const auto v = analytic_function("affine", 1);
  MeshPolicy pol = MeshPolicy::for_dim(1);
  const StudyReport rep =
      linear_localization_demo(dom, prof, 0.25, u, v, {0.08, 0.04, 0.02}, pol);
  const double C_rho = prof.linear_mode_constant();
  const auto& last = rep.rows.back();
  CHECK(std::abs(last.metric("factor_quadratic") - 1.0) < 0.05);
  CHECK(std::abs(last.metric("factor_linear") - C_rho) < 0.1 * C_rho);
  CHECK(last.metric("factor_linear") > 1.0);
}

TEST_CASE("linear demo rejects test pairs with degenerate boundary integrals") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const auto u = analytic_function("bump", 1);  // du/dnu = 0 at both endpoints
  const auto v = analytic_function("one", 1);
  CHECK_THROWS_AS(linear_localization_demo(dom, prof, 0.25, u, v, {0.05},
                                           MeshPolicy::for_dim(1)),
                  Error);
}

TEST_CASE("study report invariants and determinism") {
  StudyReport rep;
  StudyRow r1;
  r1.delta = 0.1;
  r1.metrics = {{"m", 1.0}};
  rep.append(r1);
  StudyRow r2 = r1;
  r2.delta = 0.2;  // increasing: rejected
  CHECK_THROWS_AS(rep.append(r2), Error);
  StudyRow r3 = r1;
  r3.delta = 0.05;
  r3.metrics = {{"m", std::nan("")}};
  CHECK_THROWS_AS(rep.append(r3), Error);

  const Domain dom = Domain::interval(0.0, 1.0);
  const auto prof = KernelProfile::poly_bump(1, 0.9, 2);
  const auto u = analytic_function("sin_pi", 1);
  const auto v = analytic_function("bump", 1);
  const auto a = localization_study(dom, prof, 0.25, EtaMode::quadratic, u, v, {0.1, 0.05},
                                    MeshPolicy::for_dim(1));
  const auto b = localization_study(dom, prof, 0.25, EtaMode::quadratic, u, v, {0.1, 0.05},
                                    MeshPolicy::for_dim(1));
  CHECK(a.to_csv() == b.to_csv());  // byte-identical reruns
}
