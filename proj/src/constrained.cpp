#include "nashdyn/constrained.hpp"

#include "nashdyn/errors.hpp"
#include "trace_builder.hpp"

namespace nashdyn {

using detail::jac_at;
using detail::make_step;
using detail::TraceBuilder;

ConstrainedResult run_second_constrained(const GameOracle& problem,
                                         const ConvexSet& set,
                                         const JointPoint& z0,
                                         const SolverConfig& config,
                                         double report_tol) {
  config.validate();
  if (config.alpha > 1.0) throw ArgumentError("DND step size must lie in (0, 1]");
  if (!(z0.dims() == problem.dims) || set.dim() != problem.dims.total()) {
    throw ArgumentError("initial point, game and set dimensions must agree");
  }
  const bool flat = set.has_empty_interior();
  TraceBuilder tb(problem, config, "second-constrained");
  Vector z = project(set, z0.values());
  bool settled = false;
  Location loc = Location::Interior;

  for (int k = 0;; ++k) {
    Vector w;
    if (!tb.evaluate(k, z, w)) break;
    TraceStep s = make_step(k, z, &w);
    loc = locate(set, z);
    if (settled) {
      tb.finish(std::move(s), RunStatus::Converged);
      break;
    }
    const bool boundary = loc != Location::Interior;
    if (!boundary && !flat && s.omega_norm <= config.tol) {
      tb.finish(std::move(s), RunStatus::Converged);
      break;
    }
    if (boundary && w.isZero(0.0)) {
      tb.finish(std::move(s), RunStatus::Converged,
                "omega vanished on the boundary");
      break;
    }
    if (k >= config.max_iters) {
      tb.finish(std::move(s), RunStatus::MaxIters);
      break;
    }
    try {
      Vector next;
      s.alpha = config.alpha;
      if (w.isZero(0.0)) {
        s.mode = StepMode::Dnd;
        next = z;
      } else {
        const Matrix J = jac_at(problem, z);
        Vector d = dnd_direction(w, J, problem.dims, config.reg);
        if (boundary) {
          s.mode = StepMode::Boundary;
          next = project(set, z - config.alpha * project_onto_vector(w, d));
        } else {
          s.mode = StepMode::Dnd;
          if (flat) d = project_tangent(set, d);
          next = project(set, z - config.alpha * d);
        }
      }
      tb.perturb(next, z, w, s.alpha);
      settled = (boundary || flat) &&
                (next - z).norm() <= config.tol * config.alpha;
      tb.push(std::move(s));
      z = std::move(next);
    } catch (const EvaluationError& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    } catch (const NumericError& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    } catch (const SetError& e) {
      tb.finish(std::move(s), RunStatus::EvalError, e.what());
      break;
    }
  }

  ConstrainedResult result{std::move(tb.trace()), loc, std::nullopt};
  const TraceStep& last = result.trace.steps.back();
  if (result.trace.status == RunStatus::Converged) {
    const JointPoint final_point(last.z, problem.dims);
    if (flat || result.final_location == Location::Boundary) {
      result.report = check_boundary_gne(problem, set, final_point, report_tol);
    } else {
      result.report = classify_unconstrained(problem, final_point, report_tol,
                                             config.nash_margin, config);
    }
  }
  return result;
}

}  // namespace nashdyn
