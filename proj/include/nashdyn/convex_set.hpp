#pragma once

#include "nashdyn/game.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace nashdyn {

class ConvexSet;

/// {p : lo <= p <= hi}; lo_i == hi_i pins a coordinate.
struct Box {
  Vector lo;
  Vector hi;
};

/// {p : |p - center| <= radius}.
struct Ball {
  Vector center;
  double radius = 1.0;
};

/// {p : a'p <= b}.
struct Halfspace {
  Vector a;
  double b = 0.0;
};

/// Probability simplex {p >= 0 : sum p = 1} in R^dim.
struct Simplex {
  Index dim = 2;
};

/// Cartesian product; factor i acts on the next factors[i].dim() coordinates.
struct Product {
  std::vector<ConvexSet> factors;
};

/// Intersection of sets of equal dimension, projected by Dykstra's method.
struct Intersection {
  std::vector<ConvexSet> parts;
};

enum class Location { Interior, Boundary, Exterior };

std::string to_string(Location location);

/// A closed convex set with Euclidean projection. Values are immutable and
/// cheap to copy.
class ConvexSet {
 public:
  using Kind =
      std::variant<Box, Ball, Halfspace, Simplex, Product, Intersection>;

  static ConvexSet box(Vector lo, Vector hi);
  static ConvexSet ball(Vector center, double radius);
  static ConvexSet halfspace(Vector a, double b);
  static ConvexSet simplex(Index dim);
  static ConvexSet product(std::vector<ConvexSet> factors);
  static ConvexSet intersection(std::vector<ConvexSet> parts);

  Index dim() const { return dim_; }
  const Kind& kind() const { return *kind_; }

  /// Relative tolerance of `locate`, scaled by 1 + |p|.
  double boundary_tol() const { return boundary_tol_; }
  ConvexSet with_boundary_tol(double tol) const;

  /// True when the set lies in a proper affine subspace (simplex, pinned box
  /// coordinates). Location is then relative to the affine hull.
  bool has_empty_interior() const;

 private:
  explicit ConvexSet(Kind kind);

  std::shared_ptr<const Kind> kind_;
  Index dim_ = 0;
  double boundary_tol_ = 1e-9;
};

/// Euclidean projection. Throws SetError if an intersection projection does
/// not converge to a common point.
Vector project(const ConvexSet& set, const Vector& p);

Location locate(const ConvexSet& set, const Vector& p);

/// Projection of a direction onto the linear space parallel to the affine
/// hull of the set; the identity for full-dimensional sets.
Vector project_tangent(const ConvexSet& set, const Vector& d);

/// proj_a(b) = (a'b / |a|^2) a. Throws ArgumentError if a = 0.
Vector project_onto_vector(const Vector& a, const Vector& b);

}  // namespace nashdyn
