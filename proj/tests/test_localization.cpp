#include <doctest.h>

#include <cmath>

#include "nlbvp/localization.hpp"

using namespace nlbvp;

TEST_CASE("quadratic mode reproduces the region values") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const double delta = 1e-3, k0 = 0.25;
  const auto eta = LocalizationField::build(dom, delta, k0, EtaMode::quadratic);
  // deep interior: dist^2 = 0.25 > delta/kappa0
  CHECK(eta.value(Vec2(0.5, 0.0)) == doctest::Approx(delta).epsilon(1e-14));
  // collar: dist^2 = 1e-4 < kappa0*delta = 2.5e-4
  CHECK(eta.value(Vec2(0.01, 0.0)) == doctest::Approx(1e-4).epsilon(1e-14));
}

TEST_CASE("constant mode is the constant field") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto eta = LocalizationField::build(dom, 0.1, 0.25, EtaMode::constant);
  for (double x : {0.01, 0.3, 0.99}) {
    const auto e = eta.eval(Vec2(x, 0.0));
    CHECK(e.value == 0.1);
    CHECK(e.grad.norm() == 0.0);
    CHECK(e.hess.norm() == 0.0);
  }
}

TEST_CASE("collar derivatives match the symbolic dist^2 branch") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const double delta = 1e-3;
  const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
  const double t = 0.012;  // t^2 < kappa0*delta
  const auto left = eta.eval(Vec2(t, 0.0));
  CHECK(left.value == doctest::Approx(t * t).epsilon(1e-14));
  CHECK(left.grad[0] == doctest::Approx(2.0 * t).epsilon(1e-14));
  CHECK(left.hess(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  const auto right = eta.eval(Vec2(1.0 - t, 0.0));
  CHECK(right.grad[0] == doctest::Approx(-2.0 * t).epsilon(1e-14));
  CHECK(right.hess(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("deep interior is flat at delta") {
  const Domain dom = Domain::disk(Vec2(0, 0), 1.0);
  const auto eta = LocalizationField::build(dom, 0.01, 0.25, EtaMode::quadratic);
  const auto e = eta.eval(Vec2(0.1, 0.05));
  CHECK(e.value == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(e.grad.norm() == 0.0);
  CHECK(e.hess.norm() == 0.0);
}

TEST_CASE("sampled gradient sup respects the recorded kappa1") {
  for (const Domain& dom : {Domain::interval(0.0, 1.0), Domain::disk(Vec2(0, 0), 1.0)}) {
    for (double delta : {0.1, 0.05, 0.025}) {
      const auto eta = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
      double sup = 0.0;
      const int N = 10000;
      for (int k = 1; k <= N; ++k) {
        const double depth = dom.max_interior_dist() * k / (N + 1.0);
        const Vec2 x = dom.kind() == Domain::Kind::interval
                           ? Vec2(depth, 0.0)
                           : Vec2(dom.radius() - depth, 0.0);
        sup = std::max(sup, eta.eval(x).grad.norm());
      }
      CHECK(sup / std::sqrt(delta) <= eta.kappa1());
      CHECK(eta.kappa1() <= 1.1);  // near-minimal slope construction
    }
  }
}

TEST_CASE("continuity across the profile junctions") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto eta = LocalizationField::build(dom, 0.05, 0.25, EtaMode::quadratic);
  for (double bp : eta.dist_breakpoints()) {
    const double h = 1e-9;
    const auto lo = eta.eval(Vec2(bp - h, 0.0));
    const auto hi = eta.eval(Vec2(bp + h, 0.0));
    CHECK(std::abs(lo.value - hi.value) <= 1e-7 * (1.0 + lo.value));
    CHECK((lo.grad - hi.grad).norm() <= 1e-5);
    CHECK((lo.hess - hi.hess).norm() <= 2e-2);  // C^2: curvature continuous
  }
}

TEST_CASE("delta >= delta0 is rejected with the candidate bounds") {
  const Domain dom = Domain::interval(0.0, 1.0);
  try {
    LocalizationField::build(dom, 0.5, 0.25, EtaMode::quadratic);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    CHECK(e.data().contains("bound_one"));
    CHECK(e.data().contains("bound_kappa1"));
    CHECK(e.data().contains("bound_kappa_bar0"));
  }
  CHECK_THROWS_AS(LocalizationField::build(dom, 0.1, 1.5, EtaMode::quadratic), Error);
  CHECK_THROWS_AS(LocalizationField::build(dom, -0.1, 0.25, EtaMode::quadratic), Error);
}

TEST_CASE("delta = 0.1 with kappa0 = 0.25 is admissible") {
  for (const Domain& dom : {Domain::interval(0.0, 1.0), Domain::disk(Vec2(0, 0), 1.0)}) {
    const auto eta = LocalizationField::build(dom, 0.1, 0.25, EtaMode::quadratic);
    CHECK(eta.delta0() > 0.1);
    const auto lin = LocalizationField::build(dom, 0.1, 0.25, EtaMode::linear);
    CHECK(lin.delta0() > 0.1);
  }
}

TEST_CASE("outside the closure errors") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto eta = LocalizationField::build(dom, 0.05, 0.25, EtaMode::quadratic);
  CHECK_THROWS_AS(eta.eval(Vec2(1.2, 0.0)), Error);
}

TEST_CASE("assumption checks pass for admissible fields") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto eta = LocalizationField::build(dom, 0.05, 0.25, EtaMode::quadratic);
  const Mesh mesh = build_mesh(dom, 0.05 / 8, 0.25 * 0.05 / 16, 0.3, eta);
  const auto rep = check_localization_assumptions(eta, mesh);
  CHECK(rep.all_pass());
  for (const auto& c : rep.checks)
    if (c.applicable) CHECK(c.margin > 0.0);
  const json j = rep.to_json();
  CHECK(j.contains("A_eta_i"));
  CHECK(j.at("A_eta_iv").contains("margin"));
}

TEST_CASE("constant mode: comparability ratios identically one") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const auto eta = LocalizationField::build(dom, 0.1, 0.25, EtaMode::constant);
  const Mesh mesh = build_mesh(dom, 0.1 / 8, 0.1, 0.3, eta);
  const auto rep = check_localization_assumptions(eta, mesh);
  for (const auto& c : rep.checks) {
    if (c.name.rfind("comparability", 0) == 0) {
      CHECK(c.pass);
      CHECK(c.note.find("identically 1") != std::string::npos);
    }
  }
}

TEST_CASE("hand-built field violating iv is caught") {
  const Domain dom = Domain::interval(0.0, 1.0);
  const double delta = 0.05;
  const auto good = LocalizationField::build(dom, delta, 0.25, EtaMode::quadratic);
  const Mesh mesh = build_mesh(dom, delta / 8, 0.25 * delta / 16, 0.3, good);
  const auto bad = LocalizationField::custom(dom, delta, 0.25, [&](const Vec2& x) {
    const double d = dom.dist_to_boundary(x);
    const double v = good.value(x);
    // spike above kappa_bar0 * min{delta, dist^2} in a mid-collar region
    if (d > 0.05 && d < 0.08) return 3.0 * delta;
    return v;
  });
  const auto rep = check_localization_assumptions(bad, mesh);
  bool iv_failed = false;
  for (const auto& c : rep.checks)
    if (c.name == "A_eta_iv" && !c.pass) {
      iv_failed = true;
      CHECK(c.witness.has_value());
    }
  CHECK(iv_failed);
}
