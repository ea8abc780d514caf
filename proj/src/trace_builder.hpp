#pragma once

// Internal helpers shared by the unconstrained and constrained runners.

#include "nashdyn/dynamics.hpp"
#include "nashdyn/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace nashdyn::detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline Vector omega_at(const GameOracle& problem, const Vector& z) {
  Vector w = problem.omega(z);
  if (w.size() != problem.dims.total()) {
    throw ArgumentError("omega oracle returned the wrong length");
  }
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) {
      throw EvaluationError("omega is non-finite at entry " + std::to_string(i),
                            static_cast<long>(i));
    }
  }
  return w;
}

inline Matrix jac_at(const GameOracle& problem, const Vector& z) {
  Matrix J = problem.jac(z);
  const Index d = problem.dims.total();
  if (J.rows() != d || J.cols() != d) {
    throw ArgumentError("jacobian oracle returned the wrong shape");
  }
  if (!J.allFinite()) throw EvaluationError("jacobian is non-finite");
  return J;
}

inline TraceStep make_step(int k, const Vector& z, const Vector* w) {
  TraceStep s;
  s.k = k;
  s.z = z;
  if (w != nullptr) {
    s.omega_norm = w->norm();
    s.merit = 0.5 * w->squaredNorm();
  } else {
    s.omega_norm = kNaN;
    s.merit = kNaN;
  }
  return s;
}

inline bool diverged(const Vector& z, double limit) {
  return !z.allFinite() || z.norm() > limit;
}

/// Bookkeeping shared by the runners: records, termination and the optional
/// time-varying perturbation.
class TraceBuilder {
 public:
  TraceBuilder(const GameOracle& problem, const SolverConfig& config,
               std::string algorithm)
      : problem_(problem), config_(config) {
    trace_.dims = problem.dims;
    trace_.algorithm = std::move(algorithm);
  }

  /// Evaluates omega at z, or finishes the trace and returns false.
  bool evaluate(int k, const Vector& z, Vector& w) {
    if (diverged(z, config_.diverge_norm)) {
      finish(make_step(k, z, nullptr), RunStatus::Diverged,
             "iterate norm exceeded the divergence bound");
      return false;
    }
    try {
      w = omega_at(problem_, z);
    } catch (const EvaluationError& e) {
      finish(make_step(k, z, nullptr), RunStatus::EvalError, e.what());
      return false;
    }
    return true;
  }

  void push(TraceStep step) { trace_.steps.push_back(std::move(step)); }

  void finish(TraceStep step, RunStatus status, std::string message = {}) {
    step.mode = step.mode == StepMode::SecondBreak ? step.mode : StepMode::Stop;
    step.alpha = 0.0;
    trace_.steps.push_back(std::move(step));
    trace_.status = status;
    if (!message.empty()) trace_.message = std::move(message);
  }

  /// Adds alpha * h(z, t) when the perturbation is enabled and advances t.
  void perturb(Vector& next, const Vector& z, const Vector& w, double alpha) {
    if (config_.perturb.enabled) {
      next += alpha * time_varying_perturbation(z, time_, w.squaredNorm(),
                                                config_.perturb);
    }
    time_ += alpha;
  }

  IterateTrace& trace() { return trace_; }

 private:
  const GameOracle& problem_;
  const SolverConfig& config_;
  IterateTrace trace_;
  double time_ = 0.0;
};

}  // namespace nashdyn::detail
