#include "doctest.h"
#include "support.hpp"

#include "nashdyn/classify.hpp"
#include "nashdyn/errors.hpp"

#include <cmath>

using namespace nashdyn;
using namespace nd_test;

namespace {

GameOracle toy(double sign = 1.0) {
  ProblemSpec s;
  s.sign = sign;
  return make_builtin(s);
}

GameOracle saddle() {
  ProblemSpec s;
  s.kind = ProblemKind::Quadratic;
  s.P = Matrix::Identity(1, 1);
  s.Q = Matrix::Identity(1, 1);
  s.B = Matrix::Zero(1, 1);
  return make_builtin(s);
}

/// Game with constant field omega = w0 (f linear in each player).
GameOracle constant_field(const Vector& w0) {
  return make_user_game(
      Dims{1, 1},
      [w0](const Vector& z) { return w0[0] * z[0] - w0[1] * z[1]; },
      [w0](const Vector&) { return w0; },
      [](const Vector&) { return Matrix(Matrix::Zero(2, 2)); }, "constant");
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("toy origin is a non-Nash critical point") {
    const GameOracle g = toy();
    const FixedPointReport r = classify_unconstrained(g, JointPoint(vec2(0, 0), g.dims));
    CHECK(r.verdict == Verdict::NonNashCritical);
    CHECK(r.lambda_x == doctest::Approx(2.0));
    CHECK(r.lambda_y == doctest::Approx(2.0));
    CHECK(r.gda_jac_spectrum.size() == 2);
  }

  TEST_CASE("quadratic saddle origin is a strict local Nash point") {
    const GameOracle g = saddle();
    const FixedPointReport r = classify_unconstrained(g, JointPoint(vec2(0, 0), g.dims));
    CHECK(r.verdict == Verdict::StrictLocalNash);
    CHECK(r.lambda_x == doctest::Approx(1.0));
    CHECK(r.lambda_y == doctest::Approx(-1.0));
    CHECK(r.dnd_map_radius < 1.0);
  }

  TEST_CASE("a point with unit field norm is not critical") {
    const GameOracle g = saddle();
    const FixedPointReport r = classify_unconstrained(g, JointPoint(vec2(1, 0), g.dims));
    CHECK(r.verdict == Verdict::NotCritical);
    CHECK(r.omega_norm == doctest::Approx(1.0));
    CHECK(std::isnan(r.dnd_map_radius));
    CHECK_THROWS_AS(classify_unconstrained(g, r.point, 0.0), ArgumentError);
  }

  TEST_CASE("dnd map radius at the toy origin exceeds one") {
    const GameOracle g = toy();
    SolverConfig c;
    c.alpha = 0.5;
    const double rho = dnd_map_radius(g, JointPoint(vec2(0, 0), g.dims), c);
    // Eigenvalues 1 - 0.5/5 and 1 + 0.5/4.
    CHECK(rho == doctest::Approx(1.125).epsilon(1e-12));
    CHECK_THROWS_AS(dnd_map_radius(g, JointPoint(vec2(1, 1), g.dims), c), ArgumentError);
  }

  TEST_CASE("boundary test on the product of simplices at the uniform point") {
    ProblemSpec s;
    s.kind = ProblemKind::Qre;
    s.A = Matrix::Identity(2, 2);
    const GameOracle g = make_builtin(s);
    const ConvexSet set = ConvexSet::product({ConvexSet::simplex(2), ConvexSet::simplex(2)});
    const JointPoint z(vec4(0.5, 0.5, 0.5, 0.5), g.dims);
    const FixedPointReport r = check_boundary_gne(g, set, z);
    CHECK(r.verdict == Verdict::BoundaryGNE);
    const Vector w = eval_omega(g, z);
    CHECK((project(set, z.values() - 1e-6 * w) - z.values()).norm() < 1e-12);
  }

  TEST_CASE("boundary test on a ball") {
    const ConvexSet ball = ConvexSet::ball(Vector::Zero(2), 1.0);
    const JointPoint z(vec2(1, 0), Dims{1, 1});
    // Field along the outward normal: the projected step moves inward.
    CHECK(check_boundary_gne(constant_field(vec2(2, 0)), ball, z).verdict ==
          Verdict::BoundaryNonGNE);
    // Tangential field: the projected step slides along the sphere.
    CHECK(check_boundary_gne(constant_field(vec2(0, 1)), ball, z).verdict ==
          Verdict::BoundaryNonGNE);
    // omega = -k n with n the outward normal: -omega lies in the normal cone.
    CHECK(check_boundary_gne(constant_field(vec2(-3, 0)), ball, z).verdict ==
          Verdict::BoundaryGNE);
    CHECK_THROWS_AS(check_boundary_gne(constant_field(vec2(1, 0)), ball,
                                       JointPoint(vec2(0, 0), Dims{1, 1})),
                    ArgumentError);
  }

  TEST_CASE("rate of a geometric sequence") {
    std::vector<double> e;
    for (int k = 0; k < 30; ++k) e.push_back(std::pow(0.5, k));
    const RateEstimate r = estimate_rate_from_errors(e);
    CHECK(r.order == RateOrder::Linear);
    CHECK(r.factor == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.tail_len == 21);
  }

  TEST_CASE("rate of a squaring sequence") {
    std::vector<double> e{0.5};
    for (int k = 0; k < 6; ++k) e.push_back(e.back() * e.back());
    const RateEstimate r = estimate_rate_from_errors(e);
    CHECK(r.order == RateOrder::Quadratic);
    CHECK(r.factor == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("rate estimation edge cases") {
    CHECK(estimate_rate_from_errors({1.0, 0.5}).order == RateOrder::Inconclusive);
    // Truncation at the first exact zero leaves two points.
    CHECK(estimate_rate_from_errors({1.0, 0.5, 0.0, 0.1}).order == RateOrder::Inconclusive);
    CHECK(estimate_rate_from_errors({1.0, 0.5, 0.25, 0.0}).order == RateOrder::Linear);
    // Erratic ratios and slope far from 2.
    CHECK(estimate_rate_from_errors({1.0, 0.9, 0.1, 0.09, 0.01, 0.009}).order ==
          RateOrder::Inconclusive);
    RateOptions o;
    o.tail_len = 1;
    CHECK_THROWS_AS(estimate_rate_from_errors({1, 0.5, 0.25}, o), ArgumentError);
  }

  TEST_CASE("second on a bilinear game contracts by 1 - alpha") {
    ProblemSpec s;
    s.kind = ProblemKind::Bilinear;
    s.A = Matrix::Identity(1, 1);
    const GameOracle g = make_builtin(s);
    SolverConfig c;
    c.alpha = 0.25;
    c.gn_only = true;
    c.gn_line_search = false;
    c.gn_damping = 0.0;
    const IterateTrace t = run("second", g, JointPoint(vec2(1, 1), g.dims), c);
    const RateEstimate r = estimate_rate(t, JointPoint(vec2(0, 0), g.dims));
    CHECK(r.order == RateOrder::Linear);
    CHECK(r.factor == doctest::Approx(0.75).epsilon(1e-10));
  }

  TEST_CASE("log-log slope") {
    CHECK(std::isnan(loglog_slope({1.0, 0.5})));
    CHECK(loglog_slope({1e-1, 1e-3, 1e-9}) == doctest::Approx(3.0));
  }

  TEST_CASE("newton refinement finds the toy critical points") {
    const GameOracle g = toy(-1.0);
    const JointPoint z = refine_critical_point(g, JointPoint(vec2(12.3, -6.3), g.dims));
    CHECK(eval_omega(g, z).norm() <= 1e-13);
    CHECK(classify_unconstrained(g, z).verdict == Verdict::StrictLocalNash);
    const JointPoint o = refine_critical_point(g, JointPoint(vec2(0.01, -0.02), g.dims));
    CHECK(o.values().norm() < 1e-12);
  }

  TEST_CASE("measured constants of a bilinear game") {
    ProblemSpec s;
    s.kind = ProblemKind::Bilinear;
    s.A = mat2(2, 0, 0, 0.5);
    const GameOracle g = make_builtin(s);
    Gen gen(4);
    std::vector<Vector> samples;
    for (int i = 0; i < 10; ++i) samples.push_back(gen.vec(4));
    const GameConstants c = measure_constants(g, samples);
    CHECK(c.mu == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.L_omega == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.L_J < 1e-6);
    CHECK(c.L <= 4.0 + 1e-6);
    CHECK_THROWS_AS(measure_constants(g, {}), ArgumentError);
  }

  TEST_CASE("verdict names round-trip") {
    for (Verdict v : {Verdict::StrictLocalNash, Verdict::NonNashCritical,
                      Verdict::NotCritical, Verdict::BoundaryGNE, Verdict::BoundaryNonGNE}) {
      CHECK(parse_verdict(to_string(v)) == v);
    }
    CHECK_THROWS_AS(parse_verdict("Nash"), ArgumentError);
  }
}
