#include "nashdyn/spectral.hpp"

#include "nashdyn/errors.hpp"

#include <cmath>

namespace nashdyn {

namespace {

void require_square(const Matrix& M, const char* what) {
  if (M.rows() != M.cols()) {
    throw ArgumentError(std::string(what) + " must be square");
  }
}

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) {
    throw ArgumentError(std::string(what) + " has non-finite entries");
  }
}

void require_block_shape(const Matrix& J, Dims dims) {
  require_square(J, "J");
  if (J.rows() != dims.total()) {
    throw ArgumentError("J does not match the player dimensions");
  }
  require_finite(J, "J");
}

Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

}  // namespace

void RegularizerParams::validate() const {
  if (!(b_x > 0.5)) throw ArgumentError("b_x must exceed 1/2");
  if (!(b_y < -0.5)) throw ArgumentError("b_y must be below -1/2");
  if (!(lambda0 > 0.0)) throw ArgumentError("lambda0 must be positive");
  if (!(delta0 > 0.0)) throw ArgumentError("delta0 must be positive");
}

BlockEigs extreme_block_eigs(const Matrix& J, Dims dims) {
  require_block_shape(J, dims);
  const Index n = dims.n;
  const Index m = dims.m;
  // Small blocks dominate the toy problems; skip the eigensolver for 1x1.
  BlockEigs out;
  if (n == 1) {
    out.lambda_x = J(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        symmetrized(J.topLeftCorner(n, n)), Eigen::EigenvaluesOnly);
    out.lambda_x = es.eigenvalues().minCoeff();
  }
  if (m == 1) {
    out.lambda_y = -J(n, n);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        symmetrized(-J.bottomRightCorner(m, m)), Eigen::EigenvaluesOnly);
    out.lambda_y = es.eigenvalues().maxCoeff();
  }
  return out;
}

BlockEigenpairs extreme_block_eigenpairs(const Matrix& J, Dims dims) {
  require_block_shape(J, dims);
  const Index n = dims.n;
  const Index m = dims.m;
  BlockEigenpairs out;

  Eigen::SelfAdjointEigenSolver<Matrix> ex(symmetrized(J.topLeftCorner(n, n)));
  if (ex.info() != Eigen::Success) throw NumericError("f_xx eigensolver failed");
  out.lambda_x = ex.eigenvalues()[0];
  out.v_x = ex.eigenvectors().col(0);

  Eigen::SelfAdjointEigenSolver<Matrix> ey(
      symmetrized(-J.bottomRightCorner(m, m)));
  if (ey.info() != Eigen::Success) throw NumericError("f_yy eigensolver failed");
  out.lambda_y = ey.eigenvalues()[m - 1];
  out.v_y = ey.eigenvectors().col(m - 1);
  return out;
}

Diagonal build_beta(const BlockEigs& eigs, const RegularizerParams& params,
                    Dims dims) {
  params.validate();
  Vector d = Vector::Zero(dims.total());
  if (eigs.lambda_x > 0.0) d.head(dims.n).setConstant(params.b_x);
  if (eigs.lambda_y < 0.0) {
    const double by =
        params.beta_literal_sign ? params.b_y : std::abs(params.b_y);
    d.tail(dims.m).setConstant(by);
  }
  return Diagonal(d);
}

Diagonal gershgorin_regularizer(const Matrix& A, double lambda0, bool active,
                                bool literal) {
  require_square(A, "A");
  if (!(lambda0 > 0.0)) throw ArgumentError("lambda0 must be positive");
  Vector d = Vector::Zero(A.rows());
  if (!active) return Diagonal(d);
  for (Index i = 0; i < A.rows(); ++i) {
    const double radius = A.row(i).cwiseAbs().sum() - std::abs(A(i, i));
    const double deficit = A(i, i) - radius;
    if (literal) {
      d[i] = deficit < 0.0 ? lambda0 - deficit : 0.0;
    } else {
      d[i] = std::max(0.0, lambda0 - deficit);
    }
  }
  return Diagonal(d);
}

Matrix build_gn_metric(const Matrix& J, double omega_norm, double lambda0) {
  require_square(J, "J");
  Matrix S = J.transpose() * J;
  S = 0.5 * (S + S.transpose()).eval();
  S.diagonal().array() += std::min(lambda0, omega_norm);
  return S;
}

Eigen::VectorXcd spectrum(const Matrix& M) {
  require_square(M, "matrix");
  require_finite(M, "matrix");
  Eigen::EigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigensolver did not converge");
  }
  return es.eigenvalues();
}

double spectral_radius(const Matrix& M) {
  return spectrum(M).cwiseAbs().maxCoeff();
}

}  // namespace nashdyn
