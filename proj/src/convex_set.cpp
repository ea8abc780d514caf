#include "nashdyn/convex_set.hpp"

#include "nashdyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace nashdyn {

namespace {

constexpr int kDykstraSweeps = 1000;
constexpr double kDykstraStep = 1e-14;
constexpr double kDykstraFeasibility = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const ConvexSet& set, const Vector& p) {
  if (p.size() != set.dim()) {
    throw ArgumentError("vector of length " + std::to_string(p.size()) +
                        " does not match a set of dimension " +
                        std::to_string(set.dim()));
  }
}

Vector project_simplex(const Vector& v) {
  Vector u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

/// Applies `fn(factor, segment)` to every factor of a product.
template <class Fn>
void for_each_factor(const Product& product, Fn&& fn) {
  Index offset = 0;
  for (const ConvexSet& f : product.factors) {
    fn(f, offset, f.dim());
    offset += f.dim();
  }
}

Location merge(Location a, Location b) {
  if (a == Location::Exterior || b == Location::Exterior) {
    return Location::Exterior;
  }
  if (a == Location::Boundary || b == Location::Boundary) {
    return Location::Boundary;
  }
  return Location::Interior;
}

Location classify_margin(double margin, double t) {
  if (margin < -t) return Location::Exterior;
  return margin <= t ? Location::Boundary : Location::Interior;
}

Vector project_intersection(const Intersection& s, const Vector& p) {
  const std::size_t parts = s.parts.size();
  std::vector<Vector> increments(parts, Vector::Zero(p.size()));
  Vector x = p;
  for (int sweep = 0; sweep < kDykstraSweeps; ++sweep) {
    const Vector before = x;
    for (std::size_t i = 0; i < parts; ++i) {
      const Vector shifted = x + increments[i];
      x = project(s.parts[i], shifted);
      increments[i] = shifted - x;
    }
    if ((x - before).norm() <= kDykstraStep * (1.0 + x.norm())) break;
  }
  for (const ConvexSet& part : s.parts) {
    if ((project(part, x) - x).norm() > kDykstraFeasibility * (1.0 + x.norm())) {
      throw SetError("intersection projection did not reach a common point "
                     "(empty intersection?)");
    }
  }
  return x;
}

}  // namespace

std::string to_string(Location location) {
  switch (location) {
    case Location::Interior: return "Interior";
    case Location::Boundary: return "Boundary";
    case Location::Exterior: return "Exterior";
  }
  return "?";
}

ConvexSet::ConvexSet(Kind kind)
    : kind_(std::make_shared<const Kind>(std::move(kind))) {
  dim_ = std::visit(
      Overloaded{
          [](const Box& b) { return b.lo.size(); },
          [](const Ball& b) { return b.center.size(); },
          [](const Halfspace& h) { return h.a.size(); },
          [](const Simplex& s) { return s.dim; },
          [](const Product& p) {
            Index d = 0;
            for (const ConvexSet& f : p.factors) d += f.dim();
            return d;
          },
          [](const Intersection& s) { return s.parts.front().dim(); },
      },
      *kind_);
}

ConvexSet ConvexSet::box(Vector lo, Vector hi) {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw ArgumentError("box bounds must be nonempty and of equal length");
  }
  if (!lo.allFinite() || !hi.allFinite()) {
    throw ArgumentError("box bounds must be finite");
  }
  if ((lo.array() > hi.array()).any()) {
    throw ArgumentError("box requires lo <= hi componentwise");
  }
  return ConvexSet(Box{std::move(lo), std::move(hi)});
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  if (center.size() == 0 || !center.allFinite()) {
    throw ArgumentError("ball center must be a nonempty finite vector");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ArgumentError("ball radius must be positive");
  }
  return ConvexSet(Ball{std::move(center), radius});
}

ConvexSet ConvexSet::halfspace(Vector a, double b) {
  if (a.size() == 0 || !a.allFinite() || a.isZero(0.0) || !std::isfinite(b)) {
    throw ArgumentError("halfspace normal must be a nonzero finite vector");
  }
  return ConvexSet(Halfspace{std::move(a), b});
}

ConvexSet ConvexSet::simplex(Index dim) {
  if (dim < 1) throw ArgumentError("simplex dimension must be >= 1");
  return ConvexSet(Simplex{dim});
}

ConvexSet ConvexSet::product(std::vector<ConvexSet> factors) {
  if (factors.empty()) throw ArgumentError("product needs at least one factor");
  return ConvexSet(Product{std::move(factors)});
}

ConvexSet ConvexSet::intersection(std::vector<ConvexSet> parts) {
  if (parts.empty()) throw ArgumentError("intersection needs at least one part");
  for (const ConvexSet& p : parts) {
    if (p.dim() != parts.front().dim()) {
      throw ArgumentError("intersection parts must share a dimension");
    }
  }
  return ConvexSet(Intersection{std::move(parts)});
}

ConvexSet ConvexSet::with_boundary_tol(double tol) const {
  if (!(tol > 0.0)) throw ArgumentError("boundary_tol must be positive");
  ConvexSet copy = *this;
  copy.boundary_tol_ = tol;
  return copy;
}

bool ConvexSet::has_empty_interior() const {
  return std::visit(
      Overloaded{
          [](const Box& b) { return (b.lo.array() == b.hi.array()).any(); },
          [](const Ball&) { return false; },
          [](const Halfspace&) { return false; },
          [](const Simplex&) { return true; },
          [](const Product& p) {
            return std::any_of(p.factors.begin(), p.factors.end(),
                               [](const ConvexSet& f) {
                                 return f.has_empty_interior();
                               });
          },
          [](const Intersection& s) {
            return std::any_of(s.parts.begin(), s.parts.end(),
                               [](const ConvexSet& f) {
                                 return f.has_empty_interior();
                               });
          },
      },
      kind());
}

Vector project(const ConvexSet& set, const Vector& p) {
  require_dim(set, p);
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector { return p.cwiseMax(b.lo).cwiseMin(b.hi); },
          [&](const Ball& b) -> Vector {
            const Vector d = p - b.center;
            const double r = d.norm();
            if (r <= b.radius) return p;
            return b.center + (b.radius / r) * d;
          },
          [&](const Halfspace& h) -> Vector {
            const double excess = h.a.dot(p) - h.b;
            if (excess <= 0.0) return p;
            return p - (excess / h.a.squaredNorm()) * h.a;
          },
          [&](const Simplex&) -> Vector { return project_simplex(p); },
          [&](const Product& prod) -> Vector {
            Vector out(p.size());
            for_each_factor(prod, [&](const ConvexSet& f, Index at, Index len) {
              out.segment(at, len) = project(f, p.segment(at, len));
            });
            return out;
          },
          [&](const Intersection& s) -> Vector {
            return project_intersection(s, p);
          },
      },
      set.kind());
}

Location locate(const ConvexSet& set, const Vector& p) {
  require_dim(set, p);
  const double t = set.boundary_tol() * (1.0 + p.norm());
  return std::visit(
      Overloaded{
          [&](const Box& b) {
            Location loc = Location::Interior;
            bool free_coordinate = false;
            for (Index i = 0; i < p.size(); ++i) {
              if (b.lo[i] == b.hi[i]) {
                if (std::abs(p[i] - b.lo[i]) > t) return Location::Exterior;
                continue;
              }
              free_coordinate = true;
              loc = merge(loc, classify_margin(
                                   std::min(p[i] - b.lo[i], b.hi[i] - p[i]), t));
            }
            return free_coordinate ? loc : Location::Interior;
          },
          [&](const Ball& b) {
            return classify_margin(b.radius - (p - b.center).norm(), t);
          },
          [&](const Halfspace& h) {
            return classify_margin((h.b - h.a.dot(p)) / h.a.norm(), t);
          },
          [&](const Simplex& s) {
            if (std::abs(p.sum() - 1.0) > t) return Location::Exterior;
            if (s.dim == 1) return Location::Interior;
            // Distance from p to the facet {p_i = 0} inside the affine hull.
            const double d = static_cast<double>(s.dim);
            return classify_margin(p.minCoeff() * std::sqrt(d / (d - 1.0)), t);
          },
          [&](const Product& prod) {
            Location loc = Location::Interior;
            for_each_factor(prod, [&](const ConvexSet& f, Index at, Index len) {
              loc = merge(loc, locate(f, p.segment(at, len)));
            });
            return loc;
          },
          [&](const Intersection& s) {
            Location loc = Location::Interior;
            for (const ConvexSet& part : s.parts) loc = merge(loc, locate(part, p));
            return loc;
          },
      },
      set.kind());
}

Vector project_tangent(const ConvexSet& set, const Vector& d) {
  require_dim(set, d);
  return std::visit(
      Overloaded{
          [&](const Box& b) -> Vector {
            return (b.lo.array() == b.hi.array()).select(0.0, d);
          },
          [&](const Ball&) -> Vector { return d; },
          [&](const Halfspace&) -> Vector { return d; },
          [&](const Simplex&) -> Vector {
            return (d.array() - d.mean()).matrix();
          },
          [&](const Product& prod) -> Vector {
            Vector out(d.size());
            for_each_factor(prod, [&](const ConvexSet& f, Index at, Index len) {
              out.segment(at, len) = project_tangent(f, d.segment(at, len));
            });
            return out;
          },
          [&](const Intersection& s) -> Vector {
            Vector out = d;
            for (const ConvexSet& part : s.parts) out = project_tangent(part, out);
            return out;
          },
      },
      set.kind());
}

Vector project_onto_vector(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ArgumentError("vector lengths differ");
  const double aa = a.squaredNorm();
  if (aa == 0.0) throw ArgumentError("cannot project onto the zero vector");
  return (a.dot(b) / aa) * a;
}

}  // namespace nashdyn
