#pragma once

#include "nashdyn/game.hpp"
#include "nashdyn/spectral.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nashdyn {

struct LssParams {
  double xi1 = 1e-4;
  double xi2 = 1e-4;
  double gamma1 = 1e-3;  // z rate of the two-timescale variant
  double gamma2 = 1e-2;  // v rate of the two-timescale variant
  /// lambda(z) = xi1 (1 - exp(-|omega|^2)); false uses exp(+|omega|^2).
  bool lambda_sign_corrected = true;
};

struct CespParams {
  double inv_two_rho_x = 0.05;
  double inv_two_rho_y = 0.05;
};

/// Time-varying term h(z, t) = a (1 - exp(-b |omega|^2)) exp(-t) z_tilde.
struct PerturbParams {
  bool enabled = false;
  double a = 1.0;
  double b = 1.0;
  /// Empty means the normalized all-ones direction.
  Vector z_tilde;
};

struct SolverConfig {
  double alpha = 1e-3;
  double tol = 1e-5;
  int max_iters = 15000;
  double epsilon_switch = 1e-2;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int armijo_max_backtracks = 40;
  RegularizerParams reg;
  double diverge_norm = 1e8;
  LssParams lss;
  CespParams cesp;
  PerturbParams perturb;

  /// Cap on the damping of the Gauss-Newton metric S = J'J + lambda_k I,
  /// lambda_k = min(gn_damping, |omega|). Zero gives the undamped J'J.
  double gn_damping = 5.0;
  /// Backtracking on the merit for Gauss-Newton steps; false uses alpha.
  bool gn_line_search = true;
  /// Gauss-Newton iterates only (convex-concave regime): never switch to
  /// DND and stop as soon as |omega| <= tol.
  bool gn_only = false;
  /// Margin on the block eigenvalues in the strict local Nash test.
  double nash_margin = 1e-8;

  void validate() const;
};

enum class StepMode {
  Gda,
  Dnd,
  GaussNewton,
  Lss,
  Cesp,
  SecondBreak,
  Boundary,
  Euler,
  Stop,
};

std::string to_string(StepMode mode);
StepMode parse_step_mode(const std::string& text);

enum class RunStatus { Converged, MaxIters, Diverged, EvalError };

std::string to_string(RunStatus status);
RunStatus parse_run_status(const std::string& text);

/// One row of a trace. `mode` and `alpha` describe the action taken at z_k;
/// the last row carries Stop (or SecondBreak) with alpha 0.
struct TraceStep {
  int k = 0;
  Vector z;
  double omega_norm = 0.0;
  double merit = 0.0;  // 1/2 |omega|^2
  double alpha = 0.0;
  StepMode mode = StepMode::Stop;
};

struct IterateTrace {
  std::vector<TraceStep> steps;
  RunStatus status = RunStatus::MaxIters;
  Dims dims;
  std::string algorithm;
  /// Free-form diagnostic (error text, stall notice).
  std::string message;
  /// Gauss-Newton steps whose line search ran out of backtracks.
  int armijo_exhausted = 0;
  /// Steps where J'omega vanished although omega did not.
  int stalled_steps = 0;

  JointPoint final_point() const;
  int iterations() const { return steps.empty() ? 0 : steps.back().k; }
};

Vector gda_step(const GameOracle& problem, const JointPoint& z, double alpha);
JointPoint gda_step_point(const GameOracle& problem, const JointPoint& z,
                          double alpha);

/// g_c(z) = [J'J(J + J') + E_c]^{-1} J' omega; zero where omega vanishes.
Vector continuous_rhs(const GameOracle& problem, const JointPoint& z,
                      const RegularizerParams& reg);

/// Forward Euler on z' = -g_c(z).
IterateTrace integrate_euler(const GameOracle& problem, const JointPoint& z0,
                             double dt, int steps, const RegularizerParams& reg);

/// The DND direction d = [J'J(J + J' + beta) + E]^{-1} J' omega, so that a DND
/// step is z - alpha d.
Vector dnd_direction(const Vector& omega, const Matrix& J, Dims dims,
                     const RegularizerParams& reg);

JointPoint dnd_step(const GameOracle& problem, const JointPoint& z,
                    const SolverConfig& config);

struct ArmijoResult {
  double alpha = 1.0;
  Vector point;
  double merit = 0.0;
  bool exhausted = false;
};

/// Backtracking from alpha = 1 until
///   l(z) - l(z - alpha d) >= c alpha quad_term,   l = 1/2 |omega|^2.
/// When the budget runs out the smallest trial step is returned with
/// `exhausted` set.
ArmijoResult armijo_search(const GameOracle& problem, const JointPoint& z,
                           const Vector& direction, double quad_term,
                           const SolverConfig& config);

/// Gauss-Newton direction S^{-1} J' omega and the Armijo quadratic term
/// omega' J S^{-1} J' omega.
std::pair<Vector, double> gn_direction(const Vector& omega, const Matrix& J,
                                       double gn_damping);

/// Hybrid Gauss-Newton / DND solve.
IterateTrace run_second(const GameOracle& problem, const JointPoint& z0,
                        const SolverConfig& config);

JointPoint lss_step(const GameOracle& problem, const JointPoint& z,
                    const SolverConfig& config);

std::pair<JointPoint, Vector> lss_two_timescale_step(const GameOracle& problem,
                                                     const JointPoint& z,
                                                     const Vector& v,
                                                     const SolverConfig& config);

/// Regularization weight of the LSS inner system.
double lss_lambda(double omega_norm_sq, const LssParams& params);

JointPoint cesp_step(const GameOracle& problem, const JointPoint& z,
                     const SolverConfig& config);

Vector time_varying_perturbation(const Vector& z, double t,
                                 double omega_norm_sq,
                                 const PerturbParams& params);

enum class Algorithm { Gda, Dnd, Second, Lss, Lss2, Cesp };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& text);

/// Iterate the chosen method from z0 until |omega| <= tol, max_iters,
/// divergence or an evaluation failure.
IterateTrace run(Algorithm algorithm, const GameOracle& problem,
                 const JointPoint& z0, const SolverConfig& config);

IterateTrace run(const std::string& algorithm, const GameOracle& problem,
                 const JointPoint& z0, const SolverConfig& config);

/// Solve M x = b by partially pivoted LU; NumericError if M is singular.
Vector solve_checked(const Matrix& M, const Vector& b, const char* what);

}  // namespace nashdyn
