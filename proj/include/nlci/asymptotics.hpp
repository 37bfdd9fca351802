#pragma once

// Asymptotic covariance of the nonlinear consensus+innovations estimator
// with step a/(t+1):
//
//   sqrt(t+1) (x^t - 1 (x) theta*)  =>  N(0, S),
//   S = a^2 int_0^inf e^{Sigma v} S0 e^{Sigma^T v} dv,
//   Sigma = I/2 - b phi_c'(0) (L (x) I_M) - a phi_o'(0) H^T H,
//   S0 = (b/a)^2 sigma_c^2 Diag(d_i I_M) - (b/a)(Kco H + H^T Kco^T)
//        + sigma_o^2 H^T H.
//
// plus the closed form of Tr(S)/N on regular graphs with M = 1 and a common
// h, and the k-hop ring sweep built on it.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlci/graph.hpp"
#include "nlci/lyapunov.hpp"
#include "nlci/noise.hpp"
#include "nlci/nonlinearity.hpp"

namespace nlci {

// N x NM block-diagonal matrix with h_i^T in block row i, so that
// H^T H = Diag(h_i h_i^T). Throws ParameterError on an empty list, mixed
// dimensions, or a zero vector.
Eigen::MatrixXd build_H(std::span<const Eigen::VectorXd> obs_vectors);

Eigen::MatrixXd build_sigma(double a, double b, double phi_c_prime0, double phi_o_prime0,
                            const Eigen::MatrixXd& laplacian, const Eigen::MatrixXd& H,
                            std::size_t M);

// Spectral abscissa of Sigma; stable iff the result is negative.
double check_stability(const Eigen::MatrixXd& sigma);

struct S0Result {
  Eigen::MatrixXd s0;
  std::vector<std::string> warnings;
};

// kco (MN x N) may be omitted, meaning the zero matrix.
S0Result build_s0(double a, double b, double sigma_c_sq, double sigma_o_sq,
                  std::span<const std::size_t> degrees, const Eigen::MatrixXd& H,
                  const std::optional<Eigen::MatrixXd>& kco = std::nullopt);

// Joint density of (communication noise entry, observation noise).
using JointDensity = std::function<double(double w_comm, double w_obs)>;

// Joint density of observation noise n_k and entry l of xi_ij, or nullopt
// when the two are independent (the entry is then exactly zero: odd maps,
// symmetric densities). Indices are 0-based.
using JointDensityLookup = std::function<std::optional<JointDensity>(
    std::size_t obs_agent, std::size_t i, std::size_t j, std::size_t entry)>;

// int int Psi_c(w1) Psi_o(w2) p(w1, w2) dw1 dw2 by nested adaptive
// quadrature split at the maps' breakpoints.
double cross_moment(const Nonlinearity& nl_c, const Nonlinearity& nl_o, const JointDensity& joint);

// Kco in R^{MN x N}: row s = M i + l, column k,
// Kco(s, k) = sum_{j in Omega_i} cross_moment(density of (xi_ij[l], n_k)).
Eigen::MatrixXd build_kco(const Graph& g, std::size_t M, const Nonlinearity& nl_c,
                          const Nonlinearity& nl_o, const JointDensityLookup& lookup);

struct AsymptoticInputs {
  double a = 1.0;
  double b = 1.0;
  Nonlinearity nl_c = Nonlinearity::sign();
  Nonlinearity nl_o = Nonlinearity::sign();
  NoiseModel noise_c = NoiseModel::gaussian(1.0);
  NoiseModel noise_o = NoiseModel::gaussian(1.0);
  Graph graph;
  std::vector<Eigen::VectorXd> obs_vectors;
  std::optional<Eigen::MatrixXd> kco;
  LyapunovMethod method = LyapunovMethod::automatic;
};

struct AsymptoticModel {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd s0;
  Eigen::MatrixXd kco;
  Eigen::MatrixXd s;
  double sigma_o_sq = 0.0;
  double sigma_c_sq = 0.0;
  double phi_c_prime0 = 0.0;
  double phi_o_prime0 = 0.0;
  double spectral_abscissa = 0.0;
  double trace_s_over_n = 0.0;
  double residual = 0.0;  // ||Sigma S + S Sigma^T + a^2 S0||_F
  std::vector<std::string> warnings;
};

// Throws InstabilityError (naming the abscissa) when Sigma is not stable.
AsymptoticModel asymptotic_covariance(const AsymptoticInputs& in);

struct RegularVarianceInputs {
  double degree = 0.0;
  std::span<const double> eigenvalues;  // ascending, eigenvalues[0] = 0
  double a = 1.0;
  double b = 1.0;
  double h = 1.0;
  double f_o0 = 0.0;  // observation noise density at 0
  double f_c0 = 0.0;  // communication noise density at 0
  double sigma_o_sq = 1.0;
  double sigma_c_sq = 1.0;
};

// sigma_d^2 = (a^2 h^2 so + b^2 d sc) / N
//             * [ 1/(4 a h^2 f_o0 - 1) + sum_{i>=2} 1/(4 b lambda_i f_c0 + 4 a h^2 f_o0 - 1) ]
// Throws InstabilityError when a denominator is not positive.
double per_node_variance_regular(const RegularVarianceInputs& in);

struct SweepRow {
  std::size_t degree = 0;
  double sigma_d_sq = 0.0;
  bool stable = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ascending degree
  std::optional<std::size_t> argmin_degree;
};

// Sign nonlinearities on both channels over ring_khop graphs k = 1..(N-1)/2.
// N must be odd and >= 3.
SweepResult topology_sweep(std::size_t n, const NoiseModel& noise_o, const NoiseModel& noise_c,
                           double a, double b, double h);
SweepResult topology_sweep(std::size_t n, double beta, double a, double b, double h);

}  // namespace nlci
