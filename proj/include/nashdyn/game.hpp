#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <optional>
#include <string>

namespace nashdyn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Player dimensions: x in R^n (minimizer), y in R^m (maximizer).
struct Dims {
  Index n = 1;
  Index m = 1;

  Index total() const { return n + m; }
  bool operator==(const Dims&) const = default;
};

/// A strategy pair z = (x, y). Entries are always finite.
class JointPoint {
 public:
  JointPoint(Vector values, Dims dims);

  const Vector& values() const { return values_; }
  const Dims& dims() const { return dims_; }
  Index size() const { return values_.size(); }

  auto x() const { return values_.head(dims_.n); }
  auto y() const { return values_.tail(dims_.m); }

  double operator[](Index i) const { return values_[i]; }

 private:
  Vector values_;
  Dims dims_;
};

using ObjectiveFn = std::function<double(const Vector&)>;
using FieldFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Callable bundle describing a smooth two-player zero-sum game.
///
/// omega(z) = (grad_x f, -grad_y f) and jac(z) = d omega / dz, so the
/// Jacobian has the block pattern
///
///     [  f_xx   f_xy ]
///     [ -f_yx  -f_yy ]
///
/// Oracles are pure; a GameOracle can be shared between threads.
struct GameOracle {
  Dims dims;
  ObjectiveFn f;
  FieldFn omega;
  JacobianFn jac;
  std::string name;
};

GameOracle make_user_game(Dims dims, ObjectiveFn f, FieldFn omega,
                          JacobianFn jac, std::string name = "user");

double eval_objective(const GameOracle& problem, const JointPoint& z);

/// Throws ArgumentError on a dimension mismatch and EvaluationError when the
/// oracle returns a non-finite entry.
Vector eval_omega(const GameOracle& problem, const JointPoint& z);

Matrix eval_jacobian(const GameOracle& problem, const JointPoint& z);

enum class ProblemKind { Toy2d, Bilinear, Quadratic, Qre };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& text);

/// Parameters of a built-in problem. Only the fields used by `kind` matter.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::Toy2d;
  /// Bilinear / QRE payoff matrix (n x m; square for bilinear).
  Matrix A;
  /// Quadratic game f = 1/2 x'Px + x'By - 1/2 y'Qy.
  Matrix P;
  Matrix Q;
  Matrix B;
  /// Orientation of the toy objective: f = sign * g(x, y). With sign = -1 the
  /// first coordinate maximizes g, which is the orientation in which g has
  /// three strict local Nash equilibria.
  double sign = 1.0;
};

/// Built-in games with closed-form derivatives:
///   toy2d      g(x,y) = exp(-0.01(x^2+y^2)) ((0.3x^2+y)^2 + (0.5y^2+x)^2)
///   bilinear   f = x'Ay, A square and invertible
///   quadratic  f = 1/2 x'Px + x'By - 1/2 y'Qy, P and Q symmetric
///   qre        f = x'Ay - H(x) + H(y), H(v) = -sum v_i log v_i
GameOracle make_builtin(const ProblemSpec& spec);

/// Coordinates of a QRE game below this floor are raised to it before the
/// logarithm; negative coordinates are an evaluation error.
inline constexpr double kQreFloor = 1e-12;

/// Worst relative errors of the analytic derivatives against central
/// differences; the comparison scale is max(1, |analytic|).
struct FdReport {
  double omega_rel_error = 0.0;
  double jac_rel_error = 0.0;
  Index omega_worst = -1;
  Index jac_worst_row = -1;
  Index jac_worst_col = -1;

  double max_error() const { return std::max(omega_rel_error, jac_rel_error); }
};

/// Central-difference check of omega against f and of jac against omega.
/// Coordinate i is perturbed by h * max(1, |z_i|).
FdReport fd_check(const GameOracle& problem, const JointPoint& z, double h);

/// fd_check with h = cbrt(machine epsilon).
FdReport fd_check(const GameOracle& problem, const JointPoint& z);

}  // namespace nashdyn
