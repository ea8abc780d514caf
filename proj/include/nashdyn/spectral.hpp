#pragma once

#include "nashdyn/game.hpp"

namespace nashdyn {

using Diagonal = Eigen::DiagonalMatrix<double, Eigen::Dynamic>;

/// lambda_x = min eig of f_xx, lambda_y = max eig of f_yy.
struct BlockEigs {
  double lambda_x = 0.0;
  double lambda_y = 0.0;
};

/// Constants of the stabilizer and of the Gershgorin regularizers.
struct RegularizerParams {
  double b_x = 1.0;      // > 1/2
  double b_y = -1.0;     // < -1/2
  double lambda0 = 5.0;  // Gershgorin floor
  double delta0 = 5e-5;  // regularizers vanish once |omega| <= delta0
  /// Add b_y itself (negative) to the y block instead of |b_y|.
  bool beta_literal_sign = false;
  /// Regularize only rows with a negative Gershgorin deficit, adding
  /// |deficit| + lambda0 there (no shift on the other rows).
  bool literal_gershgorin = false;

  /// Throws ArgumentError when a constant is out of range.
  void validate() const;
};

/// Extreme eigenvalues of the symmetrized diagonal blocks of J.
BlockEigs extreme_block_eigs(const Matrix& J, Dims dims);

/// Eigenpair (value, unit vector) of a diagonal block, used by curvature
/// exploitation: the minimum pair of f_xx and the maximum pair of f_yy.
struct BlockEigenpairs {
  double lambda_x = 0.0;
  Vector v_x;
  double lambda_y = 0.0;
  Vector v_y;
};

BlockEigenpairs extreme_block_eigenpairs(const Matrix& J, Dims dims);

/// Stabilizer beta = diag(1{lambda_x > 0} b_x I_n, 1{lambda_y < 0} |b_y| I_m).
Diagonal build_beta(const BlockEigs& eigs, const RegularizerParams& params,
                    Dims dims);

/// Diagonal shift M with M_ii = max(0, lambda0 - (A_ii - R_i)), where R_i is
/// the off-diagonal absolute row sum. Every Gershgorin disc of A + M then
/// starts at or right of lambda0. Returns zeros when `active` is false.
/// `literal` restricts the shift to rows with a negative deficit.
Diagonal gershgorin_regularizer(const Matrix& A, double lambda0, bool active,
                                bool literal = false);

/// Gauss-Newton metric S = J'J + min(lambda0, |omega|) I, exactly symmetric.
Matrix build_gn_metric(const Matrix& J, double omega_norm, double lambda0);

/// max |lambda| over the (complex) spectrum.
double spectral_radius(const Matrix& M);

/// Full complex spectrum of a real square matrix.
Eigen::VectorXcd spectrum(const Matrix& M);

}  // namespace nashdyn
