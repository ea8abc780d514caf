#pragma once

#include "nashdyn/classify.hpp"
#include "nashdyn/convex_set.hpp"
#include "nashdyn/dynamics.hpp"

#include <optional>

namespace nashdyn {

struct ConstrainedResult {
  IterateTrace trace;
  Location final_location = Location::Interior;
  /// Classification of the terminal point: check_boundary_gne on the boundary
  /// (or for sets without interior), classify_unconstrained otherwise.
  std::optional<FixedPointReport> report;
};

/// Projected second-order Nash dynamics on a convex set.
///
/// Interior points take P[z - alpha d] with d the DND direction (restricted
/// to the affine hull for sets without interior). Boundary points move along
/// m = proj_omega(d): P[z - alpha m], mode Boundary.
///
/// Stops when |omega| <= tol at an interior point of a full-dimensional set,
/// or when |z_{k+1} - z_k| <= tol alpha on the boundary or on a set without
/// interior. The terminal point is classified with `report_tol`.
ConstrainedResult run_second_constrained(const GameOracle& problem,
                                         const ConvexSet& set,
                                         const JointPoint& z0,
                                         const SolverConfig& config,
                                         double report_tol = 1e-5);

}  // namespace nashdyn
