#pragma once

#include <Eigen/Dense>

namespace nlci {

enum class LyapunovMethod {
  automatic,  // Kronecker for n <= kKroneckerMaxSize, Bartels-Stewart above
  kronecker,
  bartels_stewart,
};

inline constexpr Eigen::Index kKroneckerMaxSize = 40;

// Maximum real part of the eigenvalues of A.
double spectral_abscissa(const Eigen::MatrixXd& a);

// Solves Sigma S + S Sigma^T + Q = 0 for stable Sigma, i.e.
// S = int_0^inf e^{Sigma v} Q e^{Sigma^T v} dv.
//
// The Kronecker path solves (I (x) Sigma + Sigma (x) I) vec(S) = -vec(Q) by
// LU. The Bartels-Stewart path reduces Sigma to complex Schur form
// Sigma = U T U^H and back-substitutes column by column; a symmetric Sigma is
// reduced with the symmetric eigen-solver, whose T is diagonal. The result is
// symmetrized.
//
// Throws InstabilityError when the spectral abscissa of Sigma is >= 0 and
// ParameterError on a shape mismatch.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& q,
                               LyapunovMethod method = LyapunovMethod::automatic);

// ||Sigma S + S Sigma^T + Q||_F
double lyapunov_residual(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s,
                         const Eigen::MatrixXd& q);

}  // namespace nlci
