#include "nlci/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlci/errors.hpp"
#include "nlci/simd/kernels.hpp"
#include "quadrature.hpp"

namespace nlci {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integration segments covering the real line, split where Psi is
// discontinuous or changes slope.
std::vector<double> segment_edges(const Nonlinearity& nl) {
  std::vector<double> edges{-kInf, 0.0, kInf};
  for (const auto& p : nl.pieces()) {
    if (p.lo > 0.0) {
      edges.push_back(p.lo);
      edges.push_back(-p.lo);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

Eigen::MatrixXd build_H(std::span<const Eigen::VectorXd> obs_vectors) {
  if (obs_vectors.empty()) throw ParameterError("build_H: no observation vectors");
  const auto m = obs_vectors.front().size();
  if (m == 0) throw ParameterError("build_H: observation vectors must have dimension >= 1");
  const auto n = static_cast<Eigen::Index>(obs_vectors.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& hi = obs_vectors[static_cast<std::size_t>(i)];
    if (hi.size() != m) throw ParameterError("build_H: observation vectors differ in dimension");
    if (hi.squaredNorm() == 0.0) {
      throw ParameterError("build_H: h_" + std::to_string(i + 1) + " is the zero vector");
    }
    h.block(i, i * m, 1, m) = hi.transpose();
  }
  return h;
}

Eigen::MatrixXd build_sigma(double a, double b, double phi_c_prime0, double phi_o_prime0,
                            const Eigen::MatrixXd& laplacian, const Eigen::MatrixXd& H,
                            std::size_t M) {
  const Eigen::Index n = laplacian.rows();
  const auto m = static_cast<Eigen::Index>(M);
  const Eigen::Index nm = n * m;
  if (H.rows() != n || H.cols() != nm) throw ParameterError("build_sigma: H has the wrong shape");
  Eigen::MatrixXd sigma = 0.5 * Eigen::MatrixXd::Identity(nm, nm);
  // L (x) I_M
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double l = laplacian(i, j);
      if (l == 0.0) continue;
      sigma.block(i * m, j * m, m, m).diagonal().array() -= b * phi_c_prime0 * l;
    }
  }
  sigma.noalias() -= a * phi_o_prime0 * (H.transpose() * H);
  return sigma;
}

double check_stability(const Eigen::MatrixXd& sigma) { return spectral_abscissa(sigma); }

S0Result build_s0(double a, double b, double sigma_c_sq, double sigma_o_sq,
                  std::span<const std::size_t> degrees, const Eigen::MatrixXd& H,
                  const std::optional<Eigen::MatrixXd>& kco) {
  const auto n = static_cast<Eigen::Index>(degrees.size());
  if (H.rows() != n || n == 0 || H.cols() % n != 0) {
    throw ParameterError("build_s0: H and degree list disagree on N");
  }
  const Eigen::Index m = H.cols() / n;
  const double ratio = b / a;

  S0Result out;
  out.s0 = sigma_o_sq * (H.transpose() * H);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(degrees[static_cast<std::size_t>(i)]);
    out.s0.block(i * m, i * m, m, m).diagonal().array() += ratio * ratio * sigma_c_sq * d;
  }
  if (kco && kco->size() > 0) {
    if (kco->rows() != n * m || kco->cols() != n) {
      throw ParameterError("build_s0: Kco must be MN x N");
    }
    const Eigen::MatrixXd kh = *kco * H;
    out.s0 -= ratio * (kh + kh.transpose());
    if (kco->cwiseAbs().maxCoeff() > 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.s0, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      if (lo < -1e-12 * std::max(1.0, out.s0.norm())) {
        std::ostringstream msg;
        msg << "S0 is not positive semidefinite (min eigenvalue " << lo
            << "); the supplied cross-covariance may be inconsistent";
        out.warnings.push_back(msg.str());
      }
    }
  }
  return out;
}

double cross_moment(const Nonlinearity& nl_c, const Nonlinearity& nl_o, const JointDensity& joint) {
  const auto edges_c = segment_edges(nl_c);
  const auto edges_o = segment_edges(nl_o);
  double total = 0.0;
  for (std::size_t a = 0; a + 1 < edges_c.size(); ++a) {
    auto outer = [&](double w_comm) {
      const double psi_c = nl_c(w_comm);
      if (psi_c == 0.0) return 0.0;
      double inner = 0.0;
      for (std::size_t b = 0; b + 1 < edges_o.size(); ++b) {
        inner += detail::integrate([&](double w_obs) { return nl_o(w_obs) * joint(w_comm, w_obs); },
                                   edges_o[b], edges_o[b + 1]);
      }
      return psi_c * inner;
    };
    total += detail::integrate(outer, edges_c[a], edges_c[a + 1]);
  }
  return total;
}

Eigen::MatrixXd build_kco(const Graph& g, std::size_t M, const Nonlinearity& nl_c,
                          const Nonlinearity& nl_o, const JointDensityLookup& lookup) {
  const std::size_t n = g.size();
  Eigen::MatrixXd kco = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * M),
                                              static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < M; ++l) {
      const auto row = static_cast<Eigen::Index>(M * i + l);
      for (std::size_t k = 0; k < n; ++k) {
        double entry = 0.0;
        for (std::size_t j : g.neighbors(i)) {
          if (auto density = lookup(k, i, j, l)) entry += cross_moment(nl_c, nl_o, *density);
        }
        kco(row, static_cast<Eigen::Index>(k)) = entry;
      }
    }
  }
  return kco;
}

AsymptoticModel asymptotic_covariance(const AsymptoticInputs& in) {
  if (!(in.a > 0.0) || !(in.b > 0.0)) throw ParameterError("asymptotic_covariance: need a, b > 0");
  const std::size_t n = in.graph.size();
  if (in.obs_vectors.size() != n) {
    throw ParameterError("asymptotic_covariance: need one observation vector per agent");
  }
  const Eigen::MatrixXd H = build_H(in.obs_vectors);
  const auto m = static_cast<std::size_t>(in.obs_vectors.front().size());

  AsymptoticModel model;
  model.sigma_o_sq = effective_variance(in.nl_o, in.noise_o);
  model.sigma_c_sq = in.graph.edges().empty() ? 0.0 : effective_variance(in.nl_c, in.noise_c);
  model.phi_o_prime0 = phi_prime_zero(in.nl_o, in.noise_o);
  model.phi_c_prime0 = phi_prime_zero(in.nl_c, in.noise_c);

  model.sigma = build_sigma(in.a, in.b, model.phi_c_prime0, model.phi_o_prime0,
                            laplacian(in.graph), H, m);
  model.spectral_abscissa = check_stability(model.sigma);
  if (!(model.spectral_abscissa < 0.0)) {
    std::ostringstream msg;
    msg << "Sigma is not stable: spectral abscissa " << model.spectral_abscissa
        << " >= 0; increase a";
    throw InstabilityError(msg.str(), model.spectral_abscissa);
  }

  const auto degrees = in.graph.degrees();
  auto s0 = build_s0(in.a, in.b, model.sigma_c_sq, model.sigma_o_sq, degrees, H, in.kco);
  model.s0 = std::move(s0.s0);
  model.warnings = std::move(s0.warnings);
  model.kco = in.kco.value_or(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * m),
                                                    static_cast<Eigen::Index>(n)));

  const Eigen::MatrixXd q = in.a * in.a * model.s0;
  model.s = solve_lyapunov(model.sigma, q, in.method);
  model.residual = lyapunov_residual(model.sigma, model.s, q);
  model.trace_s_over_n = model.s.trace() / static_cast<double>(n);
  return model;
}

double per_node_variance_regular(const RegularVarianceInputs& in) {
  const std::size_t n = in.eigenvalues.size();
  if (n == 0) throw ParameterError("per_node_variance_regular: empty spectrum");
  const double innovation = 4.0 * in.a * in.h * in.h * in.f_o0;
  const double consensus = 4.0 * in.b * in.f_c0;
  double min_den = innovation - 1.0;
  for (std::size_t i = 1; i < n; ++i) min_den = std::min(min_den, consensus * in.eigenvalues[i] + innovation - 1.0);
  if (!(min_den > 0.0)) {
    std::ostringstream msg;
    msg << "closed-form variance undefined: denominator " << min_den
        << " <= 0 (Sigma unstable; increase a)";
    throw InstabilityError(msg.str(), -0.5 * min_den);
  }
  const double numerator =
      in.a * in.a * in.h * in.h * in.sigma_o_sq + in.b * in.b * in.degree * in.sigma_c_sq;
  const double tail = simd::reciprocal_sum(in.eigenvalues.subspan(1), consensus, innovation - 1.0);
  const double dn = static_cast<double>(n);
  return numerator / (dn * (innovation - 1.0)) + (numerator / dn) * tail;
}

SweepResult topology_sweep(std::size_t n, const NoiseModel& noise_o, const NoiseModel& noise_c,
                           double a, double b, double h) {
  if (n < 3 || n % 2 == 0) throw ParameterError("topology_sweep needs an odd N >= 3");
  const auto sign = Nonlinearity::sign();
  const double sigma_o_sq = effective_variance(sign, noise_o);
  const double sigma_c_sq = effective_variance(sign, noise_c);
  const double f_o0 = noise_o.pdf(0.0);
  const double f_c0 = noise_c.pdf(0.0);

  // Circulant spectrum of ring_khop_graph(n, k), built incrementally in k in
  // the same summation order as ring_khop_spectrum().
  std::vector<double> cos_table(n);
  for (std::size_t m = 0; m < n; ++m) {
    cos_table[m] = std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
  }
  std::vector<double> lambda(n, 0.0);
  std::vector<double> sorted(n);

  SweepResult result;
  double best = kInf;
  for (std::size_t k = 1; k <= (n - 1) / 2; ++k) {
    for (std::size_t r = 0; r < n; ++r) lambda[r] += 2.0 - 2.0 * cos_table[(k * r) % n];
    sorted = lambda;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t degree = 2 * k;  // equals n - 1 at k = (n - 1) / 2

    SweepRow row;
    row.degree = degree;
    try {
      row.sigma_d_sq = per_node_variance_regular({static_cast<double>(degree), sorted, a, b, h, f_o0,
                                                  f_c0, sigma_o_sq, sigma_c_sq});
      row.stable = true;
    } catch (const InstabilityError&) {
      row.sigma_d_sq = std::numeric_limits<double>::quiet_NaN();
      row.stable = false;
    }
    if (row.stable && row.sigma_d_sq < best) {
      best = row.sigma_d_sq;
      result.argmin_degree = degree;
    }
    result.rows.push_back(row);
  }
  return result;
}

SweepResult topology_sweep(std::size_t n, double beta, double a, double b, double h) {
  const auto noise = NoiseModel::heavy_tail(beta);
  return topology_sweep(n, noise, noise, a, b, h);
}

}  // namespace nlci
