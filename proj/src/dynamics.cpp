#include "nashdyn/dynamics.hpp"

#include "nashdyn/classify.hpp"
#include "nashdyn/errors.hpp"
#include "trace_builder.hpp"

#include <cmath>
#include <limits>

namespace nashdyn {

using detail::jac_at;
using detail::make_step;
using detail::omega_at;
using detail::TraceBuilder;

namespace {

double merit_at(const GameOracle& problem, const Vector& z) {
  try {
    return 0.5 * omega_at(problem, z).squaredNorm();
  } catch (const EvaluationError&) {
    return std::numeric_limits<double>::infinity();
  }
}

bool stalled(const Vector& w, const Matrix& J) {
  const Vector g = J.transpose() * w;
  const double scale = J.norm() * w.norm();
  return w.norm() > 0.0 &&
         g.norm() <= std::numeric_limits<double>::epsilon() * scale;
}

Vector dnd_update(const Vector& z, const Vector& w, const Matrix& J, Dims dims,
                  const SolverConfig& config) {
  if (w.isZero(0.0)) return z;
  return z - config.alpha * dnd_direction(w, J, dims, config.reg);
}

Vector cesp_update(const Vector& z, const Vector& w, const Matrix& J, Dims dims,
                   const SolverConfig& config) {
  const BlockEigenpairs pairs = extreme_block_eigenpairs(J, dims);
  Vector next = z - config.alpha * w;
  // sgn maps 0 to +1.
  auto sgn = [](double v) { return v < 0.0 ? -1.0 : 1.0; };
  if (pairs.lambda_x < 0.0) {
    const double s = sgn(pairs.v_x.dot(w.head(dims.n)));
    next.head(dims.n) +=
        pairs.lambda_x * config.cesp.inv_two_rho_x * s * pairs.v_x;
  }
  if (pairs.lambda_y > 0.0) {
    const Vector grad_y = -w.tail(dims.m);
    const double s = sgn(pairs.v_y.dot(grad_y));
    next.tail(dims.m) +=
        pairs.lambda_y * config.cesp.inv_two_rho_y * s * pairs.v_y;
  }
  return next;
}

Vector lss_correction(const Vector& w, const Matrix& J, const LssParams& p) {
  const Matrix Jt = J.transpose();
  const Vector g = Jt * w;
  Matrix inner = Jt * J;
  inner.diagonal().array() += lss_lambda(w.squaredNorm(), p);
  return Jt * solve_checked(inner, g, "LSS inner system");
}

Vector lss_update(const Vector& z, const Vector& w, const Matrix& J,
                  const SolverConfig& config) {
  if (w.isZero(0.0)) return z;
  const Vector v = lss_correction(w, J, config.lss);
  return z - config.alpha * (w + std::exp(-config.lss.xi2 * v.squaredNorm()) * v);
}

std::pair<Vector, Vector> lss2_update(const Vector& z, const Vector& v,
                                      const Vector& w, const Matrix& J,
                                      const LssParams& p) {
  const Matrix Jt = J.transpose();
  const Vector jv = Jt * v;
  Vector z_next = z - p.gamma1 * (w + std::exp(-p.xi2 * jv.squaredNorm()) * jv);
  const double lambda = lss_lambda(w.squaredNorm(), p);
  Vector v_next = v - p.gamma2 * (Jt * (J * v) + lambda * v - Jt * w);
  return {std::move(z_next), std::move(v_next)};
}

Vector default_direction(Index d) {
  return Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
}

}  // namespace

Vector solve_checked(const Matrix& M, const Vector& b, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(M);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    throw NumericError(std::string(what) + " is singular (rcond " +
                       std::to_string(rcond) + ")");
  }
  Vector x = lu.solve(b);
  if (!x.allFinite()) {
    throw NumericError(std::string(what) + " produced a non-finite solution");
  }
  return x;
}

void SolverConfig::validate() const {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
  if (max_iters < 0) throw ArgumentError("max_iters must be nonnegative");
  if (!(epsilon_switch > 0.0)) {
    throw ArgumentError("epsilon_switch must be positive");
  }
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
    throw ArgumentError("armijo_c must lie in (0, 1)");
  }
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
    throw ArgumentError("armijo_shrink must lie in (0, 1)");
  }
  if (armijo_max_backtracks < 0) {
    throw ArgumentError("armijo_max_backtracks must be nonnegative");
  }
  if (!(diverge_norm > 0.0)) throw ArgumentError("diverge_norm must be positive");
  if (!(gn_damping >= 0.0)) throw ArgumentError("gn_damping must be >= 0");
  if (!(nash_margin >= 0.0)) throw ArgumentError("nash_margin must be >= 0");
  if (!(lss.xi1 > 0.0 && lss.xi2 > 0.0)) {
    throw ArgumentError("LSS xi1 and xi2 must be positive");
  }
  if (!(lss.gamma1 > 0.0 && lss.gamma2 > 0.0)) {
    throw ArgumentError("LSS gamma1 and gamma2 must be positive");
  }
  reg.validate();
}

std::string to_string(StepMode mode) {
  switch (mode) {
    case StepMode::Gda: return "GDA";
    case StepMode::Dnd: return "DND";
    case StepMode::GaussNewton: return "GN";
    case StepMode::Lss: return "LSS";
    case StepMode::Cesp: return "CESP";
    case StepMode::SecondBreak: return "SECOND-BREAK";
    case StepMode::Boundary: return "BOUNDARY";
    case StepMode::Euler: return "EULER";
    case StepMode::Stop: return "STOP";
  }
  return "?";
}

StepMode parse_step_mode(const std::string& text) {
  for (StepMode m : {StepMode::Gda, StepMode::Dnd, StepMode::GaussNewton,
                     StepMode::Lss, StepMode::Cesp, StepMode::SecondBreak,
                     StepMode::Boundary, StepMode::Euler, StepMode::Stop}) {
    if (to_string(m) == text) return m;
  }
  throw ArgumentError("unknown step mode '" + text + "'");
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::MaxIters: return "MaxIters";
    case RunStatus::Diverged: return "Diverged";
    case RunStatus::EvalError: return "EvalError";
  }
  return "?";
}

RunStatus parse_run_status(const std::string& text) {
  for (RunStatus s : {RunStatus::Converged, RunStatus::MaxIters,
                      RunStatus::Diverged, RunStatus::EvalError}) {
    if (to_string(s) == text) return s;
  }
  throw ArgumentError("unknown run status '" + text + "'");
}

JointPoint IterateTrace::final_point() const {
  if (steps.empty()) throw ArgumentError("empty trace");
  return JointPoint(steps.back().z, dims);
}

Vector gda_step(const GameOracle& problem, const JointPoint& z, double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("alpha must be positive");
  return z.values() - alpha * eval_omega(problem, z);
}

JointPoint gda_step_point(const GameOracle& problem, const JointPoint& z,
                          double alpha) {
  return JointPoint(gda_step(problem, z, alpha), z.dims());
}

Vector continuous_rhs(const GameOracle& problem, const JointPoint& z,
                      const RegularizerParams& reg) {
  reg.validate();
  const Vector w = eval_omega(problem, z);
  if (w.isZero(0.0)) return Vector::Zero(w.size());
  const Matrix J = eval_jacobian(problem, z);
  const Matrix Jt = J.transpose();
  Matrix A = Jt * J * (J + Jt);
  A.diagonal() +=
      gershgorin_regularizer(A, reg.lambda0, w.norm() > reg.delta0,
                             reg.literal_gershgorin)
          .diagonal();
  return solve_checked(A, Jt * w, "continuous-time system matrix");
}

IterateTrace integrate_euler(const GameOracle& problem, const JointPoint& z0,
                             double dt, int steps,
                             const RegularizerParams& reg) {
  if (!(dt > 0.0)) throw ArgumentError("dt must be positive");
  if (steps < 0) throw ArgumentError("steps must be nonnegative");
  SolverConfig config;
  config.reg = reg;
  TraceBuilder tb(problem, config, "euler");
  Vector z = z0.values();
  for (int k = 0;; ++k) {
    Vector w;
    if (!tb.evaluate(k, z, w)) break;
    TraceStep s = make_step(k, z, &w);
    if (k >= steps) {
      tb.finish(std::move(s), RunStatus::MaxIters);
      break;
    }
    Vector g;
    try {
      g = continuous_rhs(problem, JointPoint(z, z0.dims()), reg);
    } catch (const std::runtime_error& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    }
    s.mode = StepMode::Euler;
    s.alpha = dt;
    tb.push(std::move(s));
    z -= dt * g;
  }
  return std::move(tb.trace());
}

Vector dnd_direction(const Vector& omega, const Matrix& J, Dims dims,
                     const RegularizerParams& reg) {
  const BlockEigs eigs = extreme_block_eigs(J, dims);
  const Diagonal beta = build_beta(eigs, reg, dims);
  const Matrix Jt = J.transpose();
  Matrix inner = J + Jt;
  inner.diagonal() += beta.diagonal();
  Matrix A = Jt * J * inner;
  A.diagonal() += gershgorin_regularizer(A, reg.lambda0,
                                         omega.norm() > reg.delta0,
                                         reg.literal_gershgorin)
                      .diagonal();
  return solve_checked(A, Jt * omega, "DND system matrix");
}

JointPoint dnd_step(const GameOracle& problem, const JointPoint& z,
                    const SolverConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
    throw ArgumentError("DND step size must lie in (0, 1]");
  }
  const Vector w = eval_omega(problem, z);
  if (w.isZero(0.0)) return z;
  const Matrix J = eval_jacobian(problem, z);
  return JointPoint(dnd_update(z.values(), w, J, problem.dims, config),
                    z.dims());
}

ArmijoResult armijo_search(const GameOracle& problem, const JointPoint& z,
                           const Vector& direction, double quad_term,
                           const SolverConfig& config) {
  if (direction.size() != z.size()) {
    throw ArgumentError("direction length does not match the point");
  }
  if (!(quad_term >= 0.0)) throw ArgumentError("quad_term must be >= 0");
  const double l0 = 0.5 * eval_omega(problem, z).squaredNorm();
  ArmijoResult r;
  double alpha = 1.0;
  for (int j = 0;; ++j) {
    Vector trial = z.values() - alpha * direction;
    const double l1 = merit_at(problem, trial);
    if (l0 - l1 >= config.armijo_c * alpha * quad_term) {
      r.alpha = alpha;
      r.point = std::move(trial);
      r.merit = l1;
      return r;
    }
    if (j >= config.armijo_max_backtracks) {
      r.alpha = alpha;
      r.point = std::move(trial);
      r.merit = l1;
      r.exhausted = true;
      return r;
    }
    alpha *= config.armijo_shrink;
  }
}

std::pair<Vector, double> gn_direction(const Vector& omega, const Matrix& J,
                                       double gn_damping) {
  const Matrix S = build_gn_metric(J, omega.norm(), gn_damping);
  const Vector g = J.transpose() * omega;
  Vector d = solve_checked(S, g, "Gauss-Newton metric");
  const double quad = std::max(0.0, g.dot(d));
  return {std::move(d), quad};
}

namespace {

struct GnOutcome {
  Vector next;
  double alpha = 1.0;
  bool exhausted = false;
};

GnOutcome gauss_newton_update(const GameOracle& problem, const Vector& z,
                              const Vector& w, const Matrix& J,
                              const SolverConfig& config) {
  auto [d, quad] = gn_direction(w, J, config.gn_damping);
  GnOutcome out;
  if (!config.gn_line_search) {
    out.alpha = config.alpha;
    out.next = z - config.alpha * d;
    return out;
  }
  const ArmijoResult ar =
      armijo_search(problem, JointPoint(z, problem.dims), d, quad, config);
  out.alpha = ar.alpha;
  out.next = ar.point;
  out.exhausted = ar.exhausted;
  return out;
}

}  // namespace

IterateTrace run_second(const GameOracle& problem, const JointPoint& z0,
                        const SolverConfig& config) {
  config.validate();
  if (!(z0.dims() == problem.dims)) {
    throw ArgumentError("initial point does not match the game dimensions");
  }
  TraceBuilder tb(problem, config, "second");
  Vector z = z0.values();
  Vector z_prev = z;
  for (int k = 0;; ++k) {
    Vector w;
    if (!tb.evaluate(k, z, w)) break;
    TraceStep s = make_step(k, z, &w);
    if (config.gn_only && s.omega_norm <= config.tol) {
      tb.finish(std::move(s), RunStatus::Converged);
      break;
    }
    if (k >= config.max_iters) {
      tb.finish(std::move(s), RunStatus::MaxIters);
      break;
    }
    try {
      const Matrix J = jac_at(problem, z);
      // The first iterate always takes a Gauss-Newton step.
      const bool far = k == 0 || (z - z_prev).norm() > config.epsilon_switch;
      Vector next;
      if (config.gn_only || far) {
        GnOutcome gn = gauss_newton_update(problem, z, w, J, config);
        if (gn.exhausted) ++tb.trace().armijo_exhausted;
        s.mode = StepMode::GaussNewton;
        s.alpha = gn.alpha;
        next = std::move(gn.next);
      } else if (is_strict_local_nash(w, J, problem.dims, config.tol,
                                      config.nash_margin)) {
        s.mode = StepMode::SecondBreak;
        tb.finish(std::move(s), RunStatus::Converged);
        break;
      } else {
        if (stalled(w, J)) ++tb.trace().stalled_steps;
        s.mode = StepMode::Dnd;
        s.alpha = config.alpha;
        next = dnd_update(z, w, J, problem.dims, config);
      }
      tb.perturb(next, z, w, s.alpha);
      tb.push(std::move(s));
      z_prev = std::move(z);
      z = std::move(next);
    } catch (const EvaluationError& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    } catch (const NumericError& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    }
  }
  return std::move(tb.trace());
}

double lss_lambda(double omega_norm_sq, const LssParams& params) {
  const double e = params.lambda_sign_corrected ? std::exp(-omega_norm_sq)
                                                : std::exp(omega_norm_sq);
  return params.xi1 * (1.0 - e);
}

JointPoint lss_step(const GameOracle& problem, const JointPoint& z,
                    const SolverConfig& config) {
  const Vector w = eval_omega(problem, z);
  if (w.isZero(0.0)) return z;
  const Matrix J = eval_jacobian(problem, z);
  return JointPoint(lss_update(z.values(), w, J, config), z.dims());
}

std::pair<JointPoint, Vector> lss_two_timescale_step(
    const GameOracle& problem, const JointPoint& z, const Vector& v,
    const SolverConfig& config) {
  if (v.size() != z.size()) throw ArgumentError("v has the wrong length");
  const Vector w = eval_omega(problem, z);
  const Matrix J = eval_jacobian(problem, z);
  auto [zn, vn] = lss2_update(z.values(), v, w, J, config.lss);
  return {JointPoint(std::move(zn), z.dims()), std::move(vn)};
}

JointPoint cesp_step(const GameOracle& problem, const JointPoint& z,
                     const SolverConfig& config) {
  const Vector w = eval_omega(problem, z);
  const Matrix J = eval_jacobian(problem, z);
  return JointPoint(cesp_update(z.values(), w, J, problem.dims, config),
                    z.dims());
}

Vector time_varying_perturbation(const Vector& z, double t,
                                 double omega_norm_sq,
                                 const PerturbParams& params) {
  if (!(params.a > 0.0 && params.b > 0.0)) {
    throw ArgumentError("perturbation constants a and b must be positive");
  }
  const Vector dir =
      params.z_tilde.size() == 0 ? default_direction(z.size()) : params.z_tilde;
  if (dir.size() != z.size()) {
    throw ArgumentError("perturbation direction has the wrong length");
  }
  if (dir.isZero(0.0)) {
    throw ArgumentError("perturbation direction must be nonzero");
  }
  const double scale =
      params.a * -std::expm1(-params.b * omega_norm_sq) * std::exp(-t);
  return scale * dir;
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Gda: return "gda";
    case Algorithm::Dnd: return "dnd";
    case Algorithm::Second: return "second";
    case Algorithm::Lss: return "lss";
    case Algorithm::Lss2: return "lss2";
    case Algorithm::Cesp: return "cesp";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& text) {
  for (Algorithm a : {Algorithm::Gda, Algorithm::Dnd, Algorithm::Second,
                      Algorithm::Lss, Algorithm::Lss2, Algorithm::Cesp}) {
    if (to_string(a) == text) return a;
  }
  throw ArgumentError("unknown algorithm '" + text + "'");
}

IterateTrace run(Algorithm algorithm, const GameOracle& problem,
                 const JointPoint& z0, const SolverConfig& config) {
  if (algorithm == Algorithm::Second) return run_second(problem, z0, config);
  config.validate();
  if (!(z0.dims() == problem.dims)) {
    throw ArgumentError("initial point does not match the game dimensions");
  }
  if (algorithm == Algorithm::Dnd && config.alpha > 1.0) {
    throw ArgumentError("DND step size must lie in (0, 1]");
  }
  const Dims dims = problem.dims;
  TraceBuilder tb(problem, config, to_string(algorithm));
  Vector z = z0.values();
  Vector v = Vector::Zero(z.size());
  for (int k = 0;; ++k) {
    Vector w;
    if (!tb.evaluate(k, z, w)) break;
    TraceStep s = make_step(k, z, &w);
    if (s.omega_norm <= config.tol) {
      tb.finish(std::move(s), RunStatus::Converged);
      break;
    }
    if (k >= config.max_iters) {
      tb.finish(std::move(s), RunStatus::MaxIters);
      break;
    }
    try {
      Vector next;
      s.alpha = config.alpha;
      switch (algorithm) {
        case Algorithm::Gda:
          s.mode = StepMode::Gda;
          next = z - config.alpha * w;
          break;
        case Algorithm::Dnd: {
          const Matrix J = jac_at(problem, z);
          if (stalled(w, J)) ++tb.trace().stalled_steps;
          s.mode = StepMode::Dnd;
          next = dnd_update(z, w, J, dims, config);
          break;
        }
        case Algorithm::Lss:
          s.mode = StepMode::Lss;
          next = lss_update(z, w, jac_at(problem, z), config);
          break;
        case Algorithm::Lss2: {
          s.mode = StepMode::Lss;
          s.alpha = config.lss.gamma1;
          auto [zn, vn] = lss2_update(z, v, w, jac_at(problem, z), config.lss);
          next = std::move(zn);
          v = std::move(vn);
          break;
        }
        case Algorithm::Cesp:
          s.mode = StepMode::Cesp;
          next = cesp_update(z, w, jac_at(problem, z), dims, config);
          break;
        case Algorithm::Second:
          break;
      }
      tb.perturb(next, z, w, s.alpha);
      tb.push(std::move(s));
      z = std::move(next);
    } catch (const EvaluationError& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    } catch (const NumericError& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    }
  }
  IterateTrace& trace = tb.trace();
  if (trace.stalled_steps > 0 && trace.status == RunStatus::MaxIters &&
      trace.message.empty()) {
    trace.message = "stalled: J'omega vanished with omega nonzero";
  }
  return std::move(trace);
}

IterateTrace run(const std::string& algorithm, const GameOracle& problem,
                 const JointPoint& z0, const SolverConfig& config) {
  return run(parse_algorithm(algorithm), problem, z0, config);
}

}  // namespace nashdyn
