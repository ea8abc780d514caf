#pragma once

#include "nashdyn/convex_set.hpp"
#include "nashdyn/dynamics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nashdyn {

enum class Verdict {
  StrictLocalNash,
  NonNashCritical,
  NotCritical,
  BoundaryGNE,
  BoundaryNonGNE,
};

std::string to_string(Verdict verdict);
Verdict parse_verdict(const std::string& text);

struct FixedPointReport {
  JointPoint point;
  double omega_norm = 0.0;
  Verdict verdict = Verdict::NotCritical;
  double lambda_x = 0.0;
  double lambda_y = 0.0;
  /// Eigenvalues of J, i.e. of the linearized GDA flow.
  Eigen::VectorXcd gda_jac_spectrum;
  /// Spectral radius of the DND map's differential; NaN away from critical
  /// points or when it cannot be formed.
  double dnd_map_radius = 0.0;
};

/// |omega| <= tol, lambda_x > margin and lambda_y < -margin.
bool is_strict_local_nash(const Vector& omega, const Matrix& J, Dims dims,
                          double tol, double margin);

/// Verdict is one of StrictLocalNash, NonNashCritical, NotCritical.
/// `config` supplies alpha and beta for the DND map radius.
FixedPointReport classify_unconstrained(const GameOracle& problem,
                                        const JointPoint& z, double tol = 1e-5,
                                        double margin = 1e-8,
                                        const SolverConfig& config = {});

/// First-order generalized Nash test at a boundary point:
/// |P(z - eta omega) - z| <= eta tol with eta = 1e-6. Every point of a set
/// with empty interior counts as a boundary point.
FixedPointReport check_boundary_gne(const GameOracle& problem,
                                    const ConvexSet& set, const JointPoint& z,
                                    double tol = 1e-5);

/// rho(I - alpha (J + J' + beta)^{-1}) at a critical point.
double dnd_map_radius(const GameOracle& problem, const JointPoint& z,
                      const SolverConfig& config);

/// Newton iteration on omega; throws NumericError when it fails to reach
/// |omega| <= tol.
JointPoint refine_critical_point(const GameOracle& problem, const JointPoint& z,
                                 double tol = 1e-13, int max_iters = 50);

enum class RateOrder { Linear, Quadratic, Inconclusive };

std::string to_string(RateOrder order);

struct RateOptions {
  int tail_len = 20;
  double ratio_cv = 0.05;  // stddev / mean of e_{k+1}/e_k
  double slope_lo = 1.8;
  double slope_hi = 2.2;
};

/// Empirical smoothness constants of a game over a sample of points:
/// mu = min sigma_min(J), L_omega = max sigma_max(J), L the Lipschitz
/// constant of grad l = J'omega and L_J that of J.
struct GameConstants {
  double L = 0.0;
  double mu = 0.0;
  double L_omega = 0.0;
  double L_J = 0.0;
};

struct RateEstimate {
  RateOrder order = RateOrder::Inconclusive;
  /// Mean contraction ratio (linear) or C in e_{k+1} = C e_k^2 (quadratic).
  double factor = 0.0;
  /// Log-log regression slope of e_{k+1} against e_k; NaN when undefined.
  double slope = 0.0;
  int tail_len = 0;
  std::optional<double> measured_L;
  std::optional<double> measured_mu;
  std::optional<double> measured_LJ;
};

/// Classifies an error sequence, truncated at the first exact zero.
RateEstimate estimate_rate_from_errors(std::vector<double> errors,
                                       const RateOptions& options = {});

/// Errors e_k = |z_k - z*| over the trace, then estimate_rate_from_errors.
RateEstimate estimate_rate(const IterateTrace& trace, const JointPoint& z_star,
                           const RateOptions& options = {});

/// Least-squares slope of log e_{k+1} against log e_k.
double loglog_slope(const std::vector<double>& errors);

/// Constants measured at `samples` and at random neighbours within `probe`.
GameConstants measure_constants(const GameOracle& problem,
                                const std::vector<Vector>& samples,
                                double probe = 1e-4, std::uint64_t seed = 1);

}  // namespace nashdyn
