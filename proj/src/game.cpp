#include "nashdyn/game.hpp"

#include "nashdyn/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nashdyn {

namespace {

std::string dims_text(Dims d) {
  std::ostringstream os;
  os << "(" << d.n << ", " << d.m << ")";
  return os.str();
}

void require_dims(const GameOracle& problem, const JointPoint& z) {
  if (!(z.dims() == problem.dims)) {
    throw ArgumentError("point dims " + dims_text(z.dims()) +
                        " do not match game '" + problem.name + "' dims " +
                        dims_text(problem.dims));
  }
}

void require_finite(const Vector& v, const std::string& what) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw EvaluationError(what + " is non-finite at entry " +
                                std::to_string(i),
                            static_cast<long>(i));
    }
  }
}

bool is_symmetric(const Matrix& M) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// ---------------------------------------------------------------------------
// toy2d: g = w * h, w = exp(-0.01 r^2), h = u^2 + v^2,
// u = 0.3 x^2 + y, v = 0.5 y^2 + x.

struct ToyTerms {
  double w, wx, wy, wxx, wxy, wyy;
  double h, hx, hy, hxx, hxy, hyy;
};

ToyTerms toy_terms(double x, double y) {
  ToyTerms t{};
  t.w = std::exp(-0.01 * (x * x + y * y));
  t.wx = -0.02 * x * t.w;
  t.wy = -0.02 * y * t.w;
  t.wxx = (-0.02 + 0.0004 * x * x) * t.w;
  t.wyy = (-0.02 + 0.0004 * y * y) * t.w;
  t.wxy = 0.0004 * x * y * t.w;

  const double u = 0.3 * x * x + y;
  const double v = 0.5 * y * y + x;
  t.h = u * u + v * v;
  t.hx = 1.2 * x * u + 2.0 * v;
  t.hy = 2.0 * u + 2.0 * y * v;
  t.hxx = 1.2 * u + 0.72 * x * x + 2.0;
  t.hxy = 1.2 * x + 2.0 * y;
  t.hyy = 2.0 + 2.0 * v + 2.0 * y * y;
  return t;
}

GameOracle make_toy2d(double sign) {
  if (sign != 1.0 && sign != -1.0) {
    throw ConstructionError("toy2d sign must be +1 or -1");
  }
  GameOracle g;
  g.dims = {1, 1};
  g.name = sign > 0 ? "toy2d" : "toy2d(sign=-1)";
  g.f = [sign](const Vector& z) {
    const ToyTerms t = toy_terms(z[0], z[1]);
    return sign * t.w * t.h;
  };
  g.omega = [sign](const Vector& z) {
    const ToyTerms t = toy_terms(z[0], z[1]);
    Vector w(2);
    w[0] = sign * (t.wx * t.h + t.w * t.hx);
    w[1] = -sign * (t.wy * t.h + t.w * t.hy);
    return w;
  };
  g.jac = [sign](const Vector& z) {
    const ToyTerms t = toy_terms(z[0], z[1]);
    const double fxx = t.wxx * t.h + 2.0 * t.wx * t.hx + t.w * t.hxx;
    const double fxy = t.wxy * t.h + t.wx * t.hy + t.wy * t.hx + t.w * t.hxy;
    const double fyy = t.wyy * t.h + 2.0 * t.wy * t.hy + t.w * t.hyy;
    Matrix J(2, 2);
    J << sign * fxx, sign * fxy, -sign * fxy, -sign * fyy;
    return J;
  };
  return g;
}

GameOracle make_bilinear(const Matrix& A) {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw ConstructionError("bilinear game needs a non-empty square A");
  }
  Eigen::FullPivLU<Matrix> lu(A);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw ConstructionError("bilinear game needs an invertible A");
  }
  const Index n = A.rows();
  GameOracle g;
  g.dims = {n, n};
  g.name = "bilinear";
  g.f = [A, n](const Vector& z) {
    return z.head(n).dot(A * z.tail(n));
  };
  g.omega = [A, n](const Vector& z) {
    Vector w(2 * n);
    w.head(n) = A * z.tail(n);
    w.tail(n) = -A.transpose() * z.head(n);
    return w;
  };
  g.jac = [A, n](const Vector&) {
    Matrix J = Matrix::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = A;
    J.bottomLeftCorner(n, n) = -A.transpose();
    return J;
  };
  return g;
}

GameOracle make_quadratic(const Matrix& P, const Matrix& Q, const Matrix& B) {
  if (!is_symmetric(P) || P.rows() == 0) {
    throw ConstructionError("quadratic game needs a symmetric n x n P");
  }
  if (!is_symmetric(Q) || Q.rows() == 0) {
    throw ConstructionError("quadratic game needs a symmetric m x m Q");
  }
  const Index n = P.rows();
  const Index m = Q.rows();
  const Matrix Bm = B.size() == 0 ? Matrix::Zero(n, m) : B;
  if (Bm.rows() != n || Bm.cols() != m) {
    throw ConstructionError("quadratic game needs an n x m coupling B");
  }
  Matrix J(n + m, n + m);
  J.topLeftCorner(n, n) = P;
  J.topRightCorner(n, m) = Bm;
  J.bottomLeftCorner(m, n) = -Bm.transpose();
  J.bottomRightCorner(m, m) = Q;

  GameOracle g;
  g.dims = {n, m};
  g.name = "quadratic";
  g.f = [P, Q, Bm, n, m](const Vector& z) {
    const auto x = z.head(n);
    const auto y = z.tail(m);
    return 0.5 * x.dot(P * x) + x.dot(Bm * y) - 0.5 * y.dot(Q * y);
  };
  g.omega = [J](const Vector& z) -> Vector { return J * z; };
  g.jac = [J](const Vector&) { return J; };
  return g;
}

double checked_log(double v, Index i) {
  if (!(v >= 0.0)) {
    throw EvaluationError("qre: coordinate " + std::to_string(i) +
                              " is outside the nonnegative orthant",
                          static_cast<long>(i));
  }
  return std::log(std::max(v, kQreFloor));
}

GameOracle make_qre(const Matrix& A) {
  if (A.rows() == 0 || A.cols() == 0) {
    throw ConstructionError("qre game needs a non-empty payoff matrix");
  }
  const Index n = A.rows();
  const Index m = A.cols();
  GameOracle g;
  g.dims = {n, m};
  g.name = "qre";
  // f = x'Ay + sum x log x - sum y log y
  g.f = [A, n, m](const Vector& z) {
    double val = z.head(n).dot(A * z.tail(m));
    for (Index i = 0; i < n; ++i) {
      val += std::max(z[i], kQreFloor) * checked_log(z[i], i);
    }
    for (Index j = 0; j < m; ++j) {
      val -= std::max(z[n + j], kQreFloor) * checked_log(z[n + j], n + j);
    }
    return val;
  };
  g.omega = [A, n, m](const Vector& z) {
    Vector w(n + m);
    w.head(n) = A * z.tail(m);
    w.tail(m) = -A.transpose() * z.head(n);
    for (Index i = 0; i < n + m; ++i) w[i] += checked_log(z[i], i) + 1.0;
    return w;
  };
  g.jac = [A, n, m](const Vector& z) {
    Matrix J = Matrix::Zero(n + m, n + m);
    J.topRightCorner(n, m) = A;
    J.bottomLeftCorner(m, n) = -A.transpose();
    for (Index i = 0; i < n + m; ++i) {
      checked_log(z[i], i);
      J(i, i) = 1.0 / std::max(z[i], kQreFloor);
    }
    return J;
  };
  return g;
}

}  // namespace

JointPoint::JointPoint(Vector values, Dims dims)
    : values_(std::move(values)), dims_(dims) {
  if (dims_.n < 1 || dims_.m < 1) {
    throw ArgumentError("player dimensions must be at least 1");
  }
  if (values_.size() != dims_.total()) {
    throw ArgumentError("point has " + std::to_string(values_.size()) +
                        " entries, expected n + m = " +
                        std::to_string(dims_.total()));
  }
  require_finite(values_, "point");
}

GameOracle make_user_game(Dims dims, ObjectiveFn f, FieldFn omega,
                          JacobianFn jac, std::string name) {
  if (dims.n < 1 || dims.m < 1) {
    throw ArgumentError("player dimensions must be at least 1");
  }
  if (!f || !omega || !jac) {
    throw ArgumentError("user game needs f, omega and jac callables");
  }
  return GameOracle{dims, std::move(f), std::move(omega), std::move(jac),
                    std::move(name)};
}

double eval_objective(const GameOracle& problem, const JointPoint& z) {
  require_dims(problem, z);
  const double v = problem.f(z.values());
  if (!std::isfinite(v)) throw EvaluationError("objective is non-finite");
  return v;
}

Vector eval_omega(const GameOracle& problem, const JointPoint& z) {
  require_dims(problem, z);
  Vector w = problem.omega(z.values());
  if (w.size() != problem.dims.total()) {
    throw ArgumentError("omega oracle returned the wrong length");
  }
  require_finite(w, "omega");
  return w;
}

Matrix eval_jacobian(const GameOracle& problem, const JointPoint& z) {
  require_dims(problem, z);
  Matrix J = problem.jac(z.values());
  const Index d = problem.dims.total();
  if (J.rows() != d || J.cols() != d) {
    throw ArgumentError("jacobian oracle returned the wrong shape");
  }
  for (Index c = 0; c < d; ++c) {
    for (Index r = 0; r < d; ++r) {
      if (!std::isfinite(J(r, c))) {
        throw EvaluationError("jacobian is non-finite at (" +
                                  std::to_string(r) + ", " +
                                  std::to_string(c) + ")",
                              static_cast<long>(c));
      }
    }
  }
  return J;
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Toy2d: return "toy2d";
    case ProblemKind::Bilinear: return "bilinear";
    case ProblemKind::Quadratic: return "quadratic";
    case ProblemKind::Qre: return "qre";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(const std::string& text) {
  if (text == "toy2d") return ProblemKind::Toy2d;
  if (text == "bilinear") return ProblemKind::Bilinear;
  if (text == "quadratic") return ProblemKind::Quadratic;
  if (text == "qre") return ProblemKind::Qre;
  throw ArgumentError("unknown problem kind '" + text + "'");
}

GameOracle make_builtin(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemKind::Toy2d: return make_toy2d(spec.sign);
    case ProblemKind::Bilinear: return make_bilinear(spec.A);
    case ProblemKind::Quadratic: return make_quadratic(spec.P, spec.Q, spec.B);
    case ProblemKind::Qre: return make_qre(spec.A);
  }
  throw ArgumentError("unknown problem kind");
}

FdReport fd_check(const GameOracle& problem, const JointPoint& z, double h) {
  if (!(h > 0.0)) throw ArgumentError("fd_check step must be positive");
  const Vector w = eval_omega(problem, z);
  const Matrix J = eval_jacobian(problem, z);
  const Index d = z.size();
  const Index n = problem.dims.n;

  FdReport report;
  for (Index i = 0; i < d; ++i) {
    const double hi = h * std::max(1.0, std::abs(z[i]));
    Vector plus = z.values();
    Vector minus = z.values();
    plus[i] += hi;
    minus[i] -= hi;
    const JointPoint zp(plus, z.dims());
    const JointPoint zm(minus, z.dims());

    // omega_i = +df/dz_i for x-coordinates and -df/dz_i for y-coordinates.
    const double df =
        (eval_objective(problem, zp) - eval_objective(problem, zm)) / (2 * hi);
    const double fd_w = i < n ? df : -df;
    const double err_w = std::abs(fd_w - w[i]) / std::max(1.0, std::abs(w[i]));
    if (report.omega_worst < 0 || err_w > report.omega_rel_error) {
      report.omega_rel_error = err_w;
      report.omega_worst = i;
    }

    const Vector col =
        (eval_omega(problem, zp) - eval_omega(problem, zm)) / (2 * hi);
    for (Index r = 0; r < d; ++r) {
      const double err =
          std::abs(col[r] - J(r, i)) / std::max(1.0, std::abs(J(r, i)));
      if (report.jac_worst_row < 0 || err > report.jac_rel_error) {
        report.jac_rel_error = err;
        report.jac_worst_row = r;
        report.jac_worst_col = i;
      }
    }
  }
  return report;
}

FdReport fd_check(const GameOracle& problem, const JointPoint& z) {
  return fd_check(problem, z,
                  std::cbrt(std::numeric_limits<double>::epsilon()));
}

}  // namespace nashdyn
