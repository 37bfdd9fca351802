#include "nlci/lyapunov.hpp"

#include <Eigen/Eigenvalues>
#include <complex>
#include <limits>
#include <sstream>

#include "nlci/errors.hpp"

namespace nlci {

namespace {

bool is_symmetric(const Eigen::MatrixXd& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= 0.0;
}

Eigen::MatrixXd solve_kronecker(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& q) {
  const Eigen::Index n = sigma.rows();
  const Eigen::Index nn = n * n;
  // Column-major vec: vec(Sigma S) = (I (x) Sigma) vec(S),
  // vec(S Sigma^T) = (Sigma (x) I) vec(S).
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(nn, nn);
  for (Eigen::Index col = 0; col < n; ++col) {
    op.block(col * n, col * n, n, n) += sigma;
    for (Eigen::Index other = 0; other < n; ++other) {
      const double s = sigma(col, other);
      if (s == 0.0) continue;
      op.block(col * n, other * n, n, n).diagonal().array() += s;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), nn);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op);
  const Eigen::VectorXd x = lu.solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
}

Eigen::MatrixXd solve_symmetric_schur(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericError("symmetric Schur reduction failed");
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::VectorXd& d = eig.eigenvalues();
  Eigen::MatrixXd f = v.transpose() * q * v;
  const Eigen::Index n = sigma.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) f(i, j) = -f(i, j) / (d(i) + d(j));
  }
  return v * f * v.transpose();
}

Eigen::MatrixXd solve_complex_schur(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& q) {
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(sigma, true);
  if (schur.info() != Eigen::Success) throw NumericError("complex Schur reduction did not converge");
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();
  const Eigen::MatrixXcd f = u.adjoint() * q.cast<std::complex<double>>() * u;

  // T Y + Y T^H + F = 0, T upper triangular. Column k couples only to
  // columns j > k:  (T + conj(T_kk) I) Y_k = -F_k - sum_{j>k} conj(T_kj) Y_j.
  const Eigen::Index n = sigma.rows();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd shifted = t;
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    Eigen::VectorXcd rhs = -f.col(k);
    for (Eigen::Index j = k + 1; j < n; ++j) rhs -= std::conj(t(k, j)) * y.col(j);
    const std::complex<double> shift = std::conj(t(k, k));
    shifted.diagonal() = t.diagonal().array() + shift;
    y.col(k) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (u * y * u.adjoint()).real();
}

}  // namespace

double spectral_abscissa(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ParameterError("spectral_abscissa: matrix is not square");
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  if (is_symmetric(a)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericError("eigen-solver did not converge");
    return eig.eigenvalues().maxCoeff();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a, false);
  if (eig.info() != Eigen::Success) throw NumericError("eigen-solver did not converge");
  return eig.eigenvalues().real().maxCoeff();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& q,
                               LyapunovMethod method) {
  if (sigma.rows() != sigma.cols() || q.rows() != sigma.rows() || q.cols() != sigma.cols()) {
    throw ParameterError("solve_lyapunov: Sigma and Q must be square and of equal size");
  }
  const double abscissa = spectral_abscissa(sigma);
  if (!(abscissa < 0.0)) {
    std::ostringstream msg;
    msg << "Sigma is not stable (spectral abscissa " << abscissa
        << " >= 0); the covariance integral diverges";
    throw InstabilityError(msg.str(), abscissa);
  }
  if (method == LyapunovMethod::automatic) {
    method = sigma.rows() <= kKroneckerMaxSize ? LyapunovMethod::kronecker
                                               : LyapunovMethod::bartels_stewart;
  }
  Eigen::MatrixXd s;
  if (method == LyapunovMethod::kronecker) {
    s = solve_kronecker(sigma, q);
  } else if (is_symmetric(sigma)) {
    s = solve_symmetric_schur(sigma, q);
  } else {
    s = solve_complex_schur(sigma, q);
  }
  if (!s.allFinite()) throw NumericError("Lyapunov solution is not finite");
  return 0.5 * (s + s.transpose());
}

double lyapunov_residual(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& s,
                         const Eigen::MatrixXd& q) {
  return (sigma * s + s * sigma.transpose() + q).norm();
}

}  // namespace nlci
