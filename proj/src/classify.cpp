#include "nashdyn/classify.hpp"

#include "nashdyn/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace nashdyn {

namespace {

constexpr double kGneEta = 1e-6;

double spectral_norm(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()[0];
}

double smallest_singular_value(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()[svd.singularValues().size() - 1];
}

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::StrictLocalNash: return "StrictLocalNash";
    case Verdict::NonNashCritical: return "NonNashCritical";
    case Verdict::NotCritical: return "NotCritical";
    case Verdict::BoundaryGNE: return "BoundaryGNE";
    case Verdict::BoundaryNonGNE: return "BoundaryNonGNE";
  }
  return "?";
}

Verdict parse_verdict(const std::string& text) {
  for (Verdict v : {Verdict::StrictLocalNash, Verdict::NonNashCritical,
                    Verdict::NotCritical, Verdict::BoundaryGNE,
                    Verdict::BoundaryNonGNE}) {
    if (to_string(v) == text) return v;
  }
  throw ArgumentError("unknown verdict '" + text + "'");
}

std::string to_string(RateOrder order) {
  switch (order) {
    case RateOrder::Linear: return "linear";
    case RateOrder::Quadratic: return "quadratic";
    case RateOrder::Inconclusive: return "inconclusive";
  }
  return "?";
}

bool is_strict_local_nash(const Vector& omega, const Matrix& J, Dims dims,
                          double tol, double margin) {
  if (omega.norm() > tol) return false;
  const BlockEigs eigs = extreme_block_eigs(J, dims);
  return eigs.lambda_x > margin && eigs.lambda_y < -margin;
}

double dnd_map_radius(const GameOracle& problem, const JointPoint& z,
                      const SolverConfig& config) {
  const Vector w = eval_omega(problem, z);
  if (w.norm() > config.tol) {
    throw ArgumentError("dnd_map_radius needs a critical point");
  }
  const Matrix J = eval_jacobian(problem, z);
  const Diagonal beta =
      build_beta(extreme_block_eigs(J, problem.dims), config.reg, problem.dims);
  Matrix K = J + J.transpose();
  K.diagonal() += beta.diagonal();
  Eigen::PartialPivLU<Matrix> lu(K);
  if (!(lu.rcond() > 1e-15)) throw NumericError("J + J' + beta is singular");
  const Index d = K.rows();
  const Matrix D = Matrix::Identity(d, d) - config.alpha * lu.inverse();
  return spectral_radius(D);
}

FixedPointReport classify_unconstrained(const GameOracle& problem,
                                        const JointPoint& z, double tol,
                                        double margin,
                                        const SolverConfig& config) {
  if (!(tol > 0.0) || !(margin > 0.0)) {
    throw ArgumentError("tol and margin must be positive");
  }
  const Vector w = eval_omega(problem, z);
  const Matrix J = eval_jacobian(problem, z);
  const BlockEigs eigs = extreme_block_eigs(J, problem.dims);
  FixedPointReport r{.point = z,
                     .omega_norm = w.norm(),
                     .verdict = Verdict::NotCritical,
                     .lambda_x = eigs.lambda_x,
                     .lambda_y = eigs.lambda_y,
                     .gda_jac_spectrum = spectrum(J),
                     .dnd_map_radius = std::numeric_limits<double>::quiet_NaN()};
  if (r.omega_norm > tol) return r;
  r.verdict = (eigs.lambda_x > margin && eigs.lambda_y < -margin)
                  ? Verdict::StrictLocalNash
                  : Verdict::NonNashCritical;
  SolverConfig at_point = config;
  at_point.tol = std::max(config.tol, tol);
  try {
    r.dnd_map_radius = dnd_map_radius(problem, z, at_point);
  } catch (const NumericError&) {
    // Leave NaN: the map is not differentiable in closed form here.
  }
  return r;
}

FixedPointReport check_boundary_gne(const GameOracle& problem,
                                    const ConvexSet& set, const JointPoint& z,
                                    double tol) {
  if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
  if (!set.has_empty_interior() && locate(set, z.values()) != Location::Boundary) {
    throw ArgumentError("check_boundary_gne needs a boundary point");
  }
  const Vector w = eval_omega(problem, z);
  const Matrix J = eval_jacobian(problem, z);
  const BlockEigs eigs = extreme_block_eigs(J, problem.dims);
  const Vector moved = project(set, z.values() - kGneEta * w);
  const bool gne = (moved - z.values()).norm() <= kGneEta * tol;
  return FixedPointReport{
      .point = z,
      .omega_norm = w.norm(),
      .verdict = gne ? Verdict::BoundaryGNE : Verdict::BoundaryNonGNE,
      .lambda_x = eigs.lambda_x,
      .lambda_y = eigs.lambda_y,
      .gda_jac_spectrum = spectrum(J),
      .dnd_map_radius = std::numeric_limits<double>::quiet_NaN()};
}

JointPoint refine_critical_point(const GameOracle& problem, const JointPoint& z,
                                 double tol, int max_iters) {
  Vector x = z.values();
  for (int it = 0; it <= max_iters; ++it) {
    const JointPoint p(x, z.dims());
    const Vector w = eval_omega(problem, p);
    if (w.norm() <= tol) return p;
    if (it == max_iters) break;
    x -= solve_checked(eval_jacobian(problem, p), w, "Newton system");
  }
  throw NumericError("Newton refinement did not reach the tolerance");
}

double loglog_slope(const std::vector<double>& errors) {
  const std::size_t n = errors.size();
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = std::log(errors[k]);
    const double b = std::log(errors[k + 1]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double den = count * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (count * sxy - sx * sy) / den;
}

RateEstimate estimate_rate_from_errors(std::vector<double> errors,
                                       const RateOptions& options) {
  if (options.tail_len < 2) throw ArgumentError("tail_len must be >= 2");
  const auto zero = std::find(errors.begin(), errors.end(), 0.0);
  errors.erase(zero, errors.end());
  const std::size_t keep = static_cast<std::size_t>(options.tail_len) + 1;
  if (errors.size() > keep) {
    errors.erase(errors.begin(), errors.end() - static_cast<long>(keep));
  }

  RateEstimate r;
  r.tail_len = static_cast<int>(errors.size());
  r.slope = std::numeric_limits<double>::quiet_NaN();
  if (errors.size() < 3) return r;

  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    ratios.push_back(errors[k + 1] / errors[k]);
  }
  const double mean =
      std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
  double var = 0.0;
  for (double q : ratios) var += (q - mean) * (q - mean);
  const double stddev = std::sqrt(var / ratios.size());

  r.slope = loglog_slope(errors);
  if (stddev < options.ratio_cv * mean && mean < 1.0) {
    r.order = RateOrder::Linear;
    r.factor = mean;
  } else if (r.slope >= options.slope_lo && r.slope <= options.slope_hi) {
    r.order = RateOrder::Quadratic;
    // Geometric mean of e_{k+1} / e_k^2.
    double log_c = 0.0;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
      log_c += std::log(errors[k + 1]) - 2.0 * std::log(errors[k]);
    }
    r.factor = std::exp(log_c / ratios.size());
  }
  return r;
}

RateEstimate estimate_rate(const IterateTrace& trace, const JointPoint& z_star,
                           const RateOptions& options) {
  if (!(z_star.dims() == trace.dims)) {
    throw ArgumentError("z_star does not match the trace dimensions");
  }
  std::vector<double> errors;
  errors.reserve(trace.steps.size());
  for (const TraceStep& s : trace.steps) {
    errors.push_back((s.z - z_star.values()).norm());
  }
  return estimate_rate_from_errors(std::move(errors), options);
}

GameConstants measure_constants(const GameOracle& problem,
                                const std::vector<Vector>& samples,
                                double probe, std::uint64_t seed) {
  if (samples.empty()) throw ArgumentError("no sample points");
  if (!(probe > 0.0)) throw ArgumentError("probe must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  GameConstants c;
  c.mu = std::numeric_limits<double>::infinity();
  const Index d = problem.dims.total();
  for (const Vector& z : samples) {
    const JointPoint p(z, problem.dims);
    const Vector w = eval_omega(problem, p);
    const Matrix J = eval_jacobian(problem, p);
    c.mu = std::min(c.mu, smallest_singular_value(J));
    c.L_omega = std::max(c.L_omega, spectral_norm(J));

    Vector u(d);
    for (Index i = 0; i < d; ++i) u[i] = normal(rng);
    u *= probe / u.norm();
    const JointPoint q(z + u, problem.dims);
    const Vector wq = eval_omega(problem, q);
    const Matrix Jq = eval_jacobian(problem, q);
    const Vector grad = J.transpose() * w;
    const Vector grad_q = Jq.transpose() * wq;
    c.L = std::max(c.L, (grad_q - grad).norm() / probe);
    c.L_J = std::max(c.L_J, spectral_norm(Jq - J) / probe);
  }
  return c;
}

}  // namespace nashdyn
