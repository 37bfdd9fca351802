#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite. None of these call into the solvers they check.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

namespace oracle {

// S = int_0^inf e^{Sigma v} Q e^{Sigma^T v} dv by composite 20-point
// Gauss-Legendre on panels of width `panel`, propagating e^{Sigma v} from
// panel to panel with one matrix exponential. Stops once the propagator has
// decayed below 1e-13 (its square then sits far under double precision).
inline Eigen::MatrixXd lyapunov_quadrature(const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& q,
                                           double panel = 0.25) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto n = sigma.rows();
  // Nodes/weights on [0, panel].
  std::vector<double> nodes;
  std::vector<double> weights;
  const auto& abs = Rule::abscissa();
  const auto& wts = Rule::weights();
  for (std::size_t i = 0; i < abs.size(); ++i) {
    for (double s : {-1.0, 1.0}) {
      if (abs[i] == 0.0 && s < 0) continue;
      nodes.push_back(0.5 * panel * (1.0 + s * abs[i]));
      weights.push_back(0.5 * panel * wts[i]);
    }
  }
  std::vector<Eigen::MatrixXd> node_exp;
  for (double x : nodes) node_exp.push_back((sigma * x).exp());
  const Eigen::MatrixXd step = (sigma * panel).exp();

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd prop = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < 2000000; ++k) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const Eigen::MatrixXd e = prop * node_exp[j];
      total += weights[j] * (e * q * e.transpose());
    }
    prop = prop * step;
    if (prop.norm() < 1e-13) break;
  }
  return 0.5 * (total + total.transpose());
}

struct LyapunovSystem {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd s0;
  double a = 1.0;
};

// Random nonsymmetric Sigma shifted so its spectral abscissa is in
// [-1, -0.2], and a random PSD S0.
inline LyapunovSystem random_stable_system(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  LyapunovSystem sys;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = normal(rng) / std::sqrt(static_cast<double>(n));
  }
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a, false);
  const double abscissa = eig.eigenvalues().real().maxCoeff();
  sys.sigma = a - (abscissa + unif(rng)) * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = normal(rng);
  }
  sys.s0 = b * b.transpose() / static_cast<double>(n);
  sys.a = unif(rng) * 2.0;
  return sys;
}

// sup_x |F_n(x) - F(x)| for the empirical cdf of `samples`.
inline double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Heavy-tail density written out directly.
inline double heavy_tail_pdf(double beta, double w) {
  return (beta - 1.0) / (2.0 * std::pow(1.0 + std::abs(w), beta));
}

inline double heavy_tail_cdf(double beta, double w) {
  const double tail = 0.5 * std::pow(1.0 + std::abs(w), -(beta - 1.0));
  return w >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace oracle
