#include "doctest.h"
#include "support.hpp"

#include "nashdyn/classify.hpp"
#include "nashdyn/dynamics.hpp"
#include "nashdyn/errors.hpp"

#include <cmath>

using namespace nashdyn;
using namespace nd_test;

namespace {

GameOracle bilinear(const Matrix& A) {
  ProblemSpec s;
  s.kind = ProblemKind::Bilinear;
  s.A = A;
  return make_builtin(s);
}

GameOracle quadratic(const Matrix& P, const Matrix& Q, const Matrix& B) {
  ProblemSpec s;
  s.kind = ProblemKind::Quadratic;
  s.P = P;
  s.Q = Q;
  s.B = B;
  return make_builtin(s);
}

GameOracle saddle() {
  return quadratic(Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                   Matrix::Zero(1, 1));
}

GameOracle toy(double sign = 1.0) {
  ProblemSpec s;
  s.sign = sign;
  return make_builtin(s);
}

JointPoint pt(const GameOracle& g, double a, double b) {
  return JointPoint(vec2(a, b), g.dims);
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("gda step") {
    const GameOracle bil = bilinear(Matrix::Identity(1, 1));
    CHECK((gda_step(bil, pt(bil, 0, 0), 0.1)).norm() == 0.0);
    CHECK((gda_step(bil, pt(bil, 1, 1), 0.1) - vec2(0.9, 1.1)).norm() < 1e-15);
    const GameOracle sad = saddle();
    CHECK((gda_step(sad, pt(sad, 1, 1), 0.1) - vec2(0.9, 0.9)).norm() < 1e-15);
    CHECK_THROWS_AS(gda_step(sad, pt(sad, 1, 1), 0.0), ArgumentError);
  }

  TEST_CASE("continuous right-hand side") {
    const RegularizerParams reg;
    const GameOracle sad = saddle();
    CHECK(continuous_rhs(sad, pt(sad, 0, 0), reg).norm() == 0.0);
    CHECK((continuous_rhs(sad, pt(sad, 1, 1), reg) - vec2(0.2, 0.2)).norm() < 1e-14);
    const GameOracle bil = bilinear(Matrix::Identity(1, 1));
    CHECK((continuous_rhs(bil, pt(bil, 1, 1), reg) - vec2(0.2, 0.2)).norm() < 1e-14);
  }

  TEST_CASE("euler integration") {
    const RegularizerParams reg;
    const GameOracle sad = saddle();
    const IterateTrace t = integrate_euler(sad, pt(sad, 1, 1), 0.1, 500, reg);
    CHECK(t.final_point().values().norm() <= 1e-3);
    for (std::size_t k = 1; k < t.steps.size(); ++k) {
      CHECK(t.steps[k].omega_norm < t.steps[k - 1].omega_norm);
    }

    const IterateTrace empty = integrate_euler(sad, pt(sad, 1, 1), 0.1, 0, reg);
    CHECK(empty.steps.size() == 1);
    CHECK((empty.final_point().values() - vec2(1, 1)).norm() == 0.0);

    const IterateTrace fixed = integrate_euler(sad, pt(sad, 0, 0), 1.0, 10, reg);
    CHECK(fixed.final_point().values().norm() == 0.0);
    CHECK_THROWS_AS(integrate_euler(sad, pt(sad, 1, 1), 0.0, 1, reg), ArgumentError);
  }

  TEST_CASE("dnd step") {
    SolverConfig c;
    c.alpha = 0.5;
    const GameOracle bil = bilinear(Matrix::Identity(1, 1));
    CHECK((dnd_step(bil, pt(bil, 1, 1), c).values() - vec2(0.9, 0.9)).norm() < 1e-14);
    CHECK(dnd_step(bil, pt(bil, 0, 0), c).values().norm() == 0.0);

    const GameOracle sad = saddle();
    const Vector next = dnd_step(sad, pt(sad, 1, 1), c).values();
    CHECK((next - vec2(0.9, 0.9)).norm() < 1e-14);
    // Direct solve of [J'J(J + J' + beta) + E] d = J' omega with J = I.
    const Matrix A = 3.0 * Matrix::Identity(2, 2);
    const Matrix E = 2.0 * Matrix::Identity(2, 2);
    const Vector d = (A + E).lu().solve(vec2(1, 1));
    CHECK((next - (vec2(1, 1) - 0.5 * d)).norm() < 1e-15);

    c.alpha = 1.5;
    CHECK_THROWS_AS(dnd_step(sad, pt(sad, 1, 1), c), ArgumentError);
  }

  TEST_CASE("armijo search with a zero direction accepts the full step") {
    const GameOracle sad = saddle();
    const ArmijoResult r =
        armijo_search(sad, pt(sad, 0, 0), Vector::Zero(2), 0.0, SolverConfig{});
    CHECK(r.alpha == 1.0);
    CHECK(!r.exhausted);
  }

  TEST_CASE("armijo search backtracks on an overshooting direction") {
    const GameOracle sad = saddle();
    const JointPoint z = pt(sad, 1, 1);
    // Ten times the Newton step overshoots; alpha = 1/8 lands near 0.
    const Vector d = 10.0 * vec2(1, 1);
    const double quad = vec2(1, 1).dot(d);
    const ArmijoResult r = armijo_search(sad, z, d, quad, SolverConfig{});
    CHECK(r.alpha < 1.0);
    const double l0 = 0.5 * eval_omega(sad, z).squaredNorm();
    CHECK(l0 - r.merit >= SolverConfig{}.armijo_c * r.alpha * quad);
  }

  TEST_CASE("second on a bilinear game follows the (1 - alpha)^k law") {
    const GameOracle bil = bilinear(Matrix::Identity(1, 1));
    SolverConfig c;
    c.alpha = 0.5;
    c.gn_only = true;
    c.gn_line_search = false;
    c.gn_damping = 0.0;
    const IterateTrace t = run("second", bil, pt(bil, 1, 1), c);
    REQUIRE(t.status == RunStatus::Converged);
    const int expected = static_cast<int>(
        std::ceil(std::log(1e-5 / std::sqrt(2.0)) / std::log(0.5)));
    CHECK(t.iterations() == expected);
    for (const TraceStep& s : t.steps) {
      CHECK(rel_err(s.z.norm(), std::pow(0.5, s.k) * std::sqrt(2.0)) < 1e-12);
    }
  }

  TEST_CASE("second solves a quadratic convex-concave game in one step") {
    Gen gen(17);
    const GameOracle g = quadratic(gen.spd(2, 0.5, 3.0), gen.spd(2, 0.5, 3.0),
                                   gen.mat(2, 2));
    SolverConfig c;
    c.gn_damping = 0.0;
    c.gn_only = true;
    c.tol = 1e-12;
    const IterateTrace t = run("second", g, JointPoint(gen.vec(4, -5, 5), g.dims), c);
    CHECK(t.status == RunStatus::Converged);
    CHECK(t.iterations() == 1);
    CHECK(t.steps[0].mode == StepMode::GaussNewton);
    CHECK(t.steps[0].alpha == 1.0);
  }

  TEST_CASE("second near the toy origin switches from Gauss-Newton to DND") {
    const GameOracle g = toy();
    const IterateTrace t = run("second", g, pt(g, 0.3, 0.2), SolverConfig{});
    REQUIRE(t.steps.size() > 3);
    CHECK(t.steps[0].mode == StepMode::GaussNewton);
    int first_dnd = -1;
    for (const TraceStep& s : t.steps) {
      if (s.mode == StepMode::Dnd) {
        first_dnd = s.k;
        break;
      }
    }
    REQUIRE(first_dnd > 0);
    // The last Gauss-Newton iterate is close to the non-Nash origin.
    CHECK(t.steps[static_cast<std::size_t>(first_dnd)].z.norm() < 1e-2);
    // The origin is never accepted as a solution.
    CHECK(t.status != RunStatus::Converged);
    for (const TraceStep& s : t.steps) CHECK(s.mode != StepMode::SecondBreak);
  }

  TEST_CASE("second breaks at a strict local Nash point") {
    const GameOracle g = saddle();
    SolverConfig c;
    c.alpha = 1.0;
    const IterateTrace t = run("second", g, pt(g, 2, -1), c);
    REQUIRE(t.status == RunStatus::Converged);
    CHECK(t.steps.back().mode == StepMode::SecondBreak);
    CHECK(t.steps.back().omega_norm <= c.tol);
  }

  TEST_CASE("lss step") {
    const GameOracle sad = saddle();
    SolverConfig c;
    c.alpha = 0.1;
    CHECK(lss_step(sad, pt(sad, 0, 0), c).values().norm() == 0.0);
    const double lambda = 1e-4 * (1.0 - std::exp(-2.0));
    CHECK(lss_lambda(2.0, c.lss) == doctest::Approx(lambda).epsilon(1e-14));
    const double vi = 1.0 / (1.0 + lambda);
    const double damp = std::exp(-1e-4 * 2.0 * vi * vi);
    const double expected = 1.0 - 0.1 * (1.0 + damp * vi);
    const Vector next = lss_step(sad, pt(sad, 1, 1), c).values();
    CHECK(std::abs(next[0] - expected) < 1e-12);
    CHECK(std::abs(next[1] - expected) < 1e-12);

    c.lss.lambda_sign_corrected = false;
    CHECK(lss_lambda(2.0, c.lss) == doctest::Approx(1e-4 * (1.0 - std::exp(2.0))));
  }

  TEST_CASE("two-timescale lss keeps fixed points") {
    const GameOracle sad = saddle();
    const auto [z, v] = lss_two_timescale_step(sad, pt(sad, 0, 0), Vector::Zero(2), SolverConfig{});
    CHECK(z.values().norm() == 0.0);
    CHECK(v.norm() == 0.0);
    CHECK_THROWS_AS(lss_two_timescale_step(sad, pt(sad, 0, 0), Vector::Zero(3), SolverConfig{}),
                    ArgumentError);
  }

  TEST_CASE("cesp reduces to gda at a definite point") {
    const GameOracle sad = saddle();
    SolverConfig c;
    c.alpha = 0.1;
    const JointPoint z = pt(sad, 0.7, -0.3);
    CHECK((cesp_step(sad, z, c).values() - gda_step(sad, z, 0.1)).norm() == 0.0);
  }

  TEST_CASE("cesp curvature correction on the toy origin") {
    const GameOracle g = toy();
    SolverConfig c;
    c.alpha = 0.01;
    const JointPoint z = pt(g, 1e-3, 2e-3);
    const Vector delta = cesp_step(g, z, c).values() - gda_step(g, z, 0.01);
    const BlockEigenpairs p = extreme_block_eigenpairs(eval_jacobian(g, z), g.dims);
    REQUIRE(p.lambda_y > 0.0);
    CHECK(delta[0] == 0.0);
    CHECK(std::abs(delta[1]) == doctest::Approx(p.lambda_y * 0.05).epsilon(1e-12));
  }

  TEST_CASE("cesp sign tie resolves to +1") {
    // f = x^2/2 + y^2/2 at y = 0: grad_y f = 0, lambda_y = 1.
    const GameOracle g = quadratic(Matrix::Identity(1, 1), -Matrix::Identity(1, 1),
                                   Matrix::Zero(1, 1));
    SolverConfig c;
    c.alpha = 0.1;
    const Vector next = cesp_step(g, pt(g, 1, 0), c).values();
    CHECK(next[1] == doctest::Approx(0.05));
  }

  TEST_CASE("time-varying perturbation") {
    PerturbParams p;
    p.z_tilde = vec2(1, 0);
    CHECK(time_varying_perturbation(vec2(3, 4), 0.0, 0.0, p).norm() == 0.0);
    CHECK((time_varying_perturbation(vec2(3, 4), 0.0, std::log(2.0), p) - vec2(0.5, 0)).norm() < 1e-15);
    for (double t : {1.0, 5.0, 20.0}) {
      CHECK(time_varying_perturbation(vec2(0, 0), t, 10.0, p).norm() <= std::exp(-t) + 1e-18);
    }
    p.z_tilde = vec2(0, 0);
    CHECK_THROWS_AS(time_varying_perturbation(vec2(0, 0), 0.0, 1.0, p), ArgumentError);
  }

  TEST_CASE("runner examples") {
    const GameOracle sad = saddle();
    SolverConfig c;
    c.alpha = 0.5;
    const IterateTrace dnd = run("dnd", sad, pt(sad, 1, 1), c);
    CHECK(dnd.status == RunStatus::Converged);
    CHECK(dnd.final_point().values().norm() < 1e-5);
    for (std::size_t k = 1; k < dnd.steps.size(); ++k) {
      CHECK(dnd.steps[k].omega_norm < dnd.steps[k - 1].omega_norm);
    }

    const GameOracle bil = bilinear(Matrix::Identity(1, 1));
    c.alpha = 0.1;
    c.max_iters = 200;
    const IterateTrace gda = run("gda", bil, pt(bil, 1, 1), c);
    CHECK((gda.status == RunStatus::MaxIters || gda.status == RunStatus::Diverged));
    for (std::size_t k = 1; k < gda.steps.size(); ++k) {
      CHECK(gda.steps[k].z.norm() >= gda.steps[k - 1].z.norm());
    }
    CHECK_THROWS_AS(run("adam", bil, pt(bil, 1, 1), c), ArgumentError);
  }

  TEST_CASE("runner reports divergence") {
    const GameOracle bil = bilinear(Matrix::Identity(1, 1));
    SolverConfig c;
    c.alpha = 1.0;
    c.diverge_norm = 100.0;
    const IterateTrace t = run("gda", bil, pt(bil, 1, 1), c);
    CHECK(t.status == RunStatus::Diverged);
  }

  TEST_CASE("runner reports evaluation errors") {
    ProblemSpec s;
    s.kind = ProblemKind::Qre;
    s.A = Matrix::Identity(2, 2);
    const GameOracle g = make_builtin(s);
    SolverConfig c;
    c.alpha = 1.0;
    const IterateTrace t = run("gda", g, JointPoint(vec4(0.5, 0.5, -1, 2), g.dims), c);
    CHECK(t.status == RunStatus::EvalError);
    CHECK(!t.message.empty());
  }

  TEST_CASE("perturbation is recorded in the iterates") {
    const GameOracle sad = saddle();
    SolverConfig c;
    c.alpha = 0.1;
    c.max_iters = 1;
    c.perturb.enabled = true;
    c.perturb.z_tilde = vec2(1, 0);
    const IterateTrace t = run("gda", sad, pt(sad, 1, 1), c);
    const double h = (1.0 - std::exp(-2.0));  // a = b = 1, t = 0
    CHECK((t.steps[1].z - (vec2(0.9, 0.9) + 0.1 * h * vec2(1, 0))).norm() < 1e-14);
  }

  TEST_CASE("identifier round trips") {
    for (Algorithm a : {Algorithm::Gda, Algorithm::Dnd, Algorithm::Second,
                        Algorithm::Lss, Algorithm::Lss2, Algorithm::Cesp}) {
      CHECK(parse_algorithm(to_string(a)) == a);
    }
    for (RunStatus s : {RunStatus::Converged, RunStatus::MaxIters,
                        RunStatus::Diverged, RunStatus::EvalError}) {
      CHECK(parse_run_status(to_string(s)) == s);
    }
    CHECK(parse_step_mode("SECOND-BREAK") == StepMode::SecondBreak);
  }

  TEST_CASE("solver configuration is validated") {
    SolverConfig c;
    c.tol = 0.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = SolverConfig{};
    c.armijo_c = 1.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = SolverConfig{};
    c.epsilon_switch = -1.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
  }
}
