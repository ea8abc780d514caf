#pragma once

#include "nashdyn/game.hpp"

#include <cstdint>
#include <random>

namespace nd_test {

using nashdyn::Index;
using nashdyn::Matrix;
using nashdyn::Vector;

/// Seeded source of random test inputs.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  Vector vec(Index n, double lo = -1.0, double hi = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Matrix mat(Index r, Index c, double lo = -1.0, double hi = 1.0) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
      for (Index j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
    }
    return m;
  }
  /// Square matrix with smallest singular value at least 0.5.
  Matrix well_conditioned(Index n) {
    for (;;) {
      Matrix m = mat(n, n, -2.0, 2.0);
      Eigen::JacobiSVD<Matrix> svd(m);
      if (svd.singularValues()[n - 1] >= 0.5) return m;
    }
  }
  /// Symmetric positive definite with eigenvalues in [lo, hi].
  Matrix spd(Index n, double lo, double hi) {
    Eigen::HouseholderQR<Matrix> qr(mat(n, n));
    const Matrix Qm = qr.householderQ();
    Vector d(n);
    for (Index i = 0; i < n; ++i) d[i] = uniform(lo, hi);
    return Qm * d.asDiagonal() * Qm.transpose();
  }
  /// Uniform point of the probability simplex of dimension n.
  Vector simplex_point(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = -std::log(uniform(1e-12, 1.0));
    return v / v.sum();
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

inline Vector vec4(double a, double b, double c, double d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace nd_test
