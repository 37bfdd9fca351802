#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "nlci/asymptotics.hpp"
#include "nlci/errors.hpp"
#include "oracles.hpp"

using namespace nlci;
using Catch::Approx;

namespace {

AsymptoticInputs ring_inputs(std::size_t n, std::size_t k, double a = 1.0, double b = 1.0) {
  AsymptoticInputs in;
  in.a = a;
  in.b = b;
  in.noise_c = NoiseModel::heavy_tail(2.05);
  in.noise_o = NoiseModel::heavy_tail(2.05);
  in.graph = ring_khop_graph(n, k);
  in.obs_vectors.assign(n, Eigen::VectorXd::Ones(1));
  return in;
}

double closed_form(std::size_t n, std::size_t k, double a = 1.0, double b = 1.0, double h = 1.0) {
  const auto spec = ring_khop_spectrum(n, k);
  return per_node_variance_regular({2.0 * static_cast<double>(k), spec, a, b, h, 0.525, 0.525, 1.0, 1.0});
}

}  // namespace

TEST_CASE("single agent: Sigma = 1/2 - a phi'(0) h^2") {
  AsymptoticInputs in;
  in.noise_o = NoiseModel::heavy_tail(2.05);
  in.noise_c = NoiseModel::heavy_tail(2.05);
  in.graph = Graph::from_edges(1, {});
  in.obs_vectors = {Eigen::VectorXd::Ones(1)};
  const auto m = asymptotic_covariance(in);
  CHECK(m.sigma(0, 0) == Approx(-0.55).epsilon(1e-14));
  CHECK(m.s(0, 0) == Approx(1.0 / 1.1).epsilon(1e-13));
  CHECK(m.sigma_c_sq == 0.0);

  in.a = 0.1;
  CHECK_THROWS_AS(asymptotic_covariance(in), InstabilityError);
  try {
    asymptotic_covariance(in);
  } catch (const InstabilityError& e) {
    CHECK(e.abscissa() == Approx(0.395).epsilon(1e-12));
    CHECK(std::string(e.what()).find("increase a") != std::string::npos);
  }
}

TEST_CASE("regular closed form: hand-computed rings") {
  // N = 3: spectrum {0, 3, 3}, numerator 1 + d = 3 (sigma^2 = 1, d = 2):
  // (3/3) [1/1.1 + 2/(4*3*0.525 + 1.1)]
  const double n3 = 1.0 / 1.1 + 2.0 / (4.0 * 3.0 * 0.525 + 1.1);
  CHECK(closed_form(3, 1) == Approx(n3).epsilon(1e-14));
  CHECK(closed_form(3, 1) == Approx(1.17936).epsilon(1e-5));
  CHECK(closed_form(10, 1) == Approx(0.92958).epsilon(1e-5));
}

TEST_CASE("closed form equals Tr(S)/N of the matrix pipeline") {
  for (std::size_t n : {3u, 5u, 10u, 11u, 21u}) {
    for (std::size_t k = 1; k <= (n - 1) / 2; ++k) {
      const auto m = asymptotic_covariance(ring_inputs(n, k));
      CHECK(m.trace_s_over_n == Approx(closed_form(n, k)).epsilon(1e-10));
      CHECK(m.residual <= 1e-9 * (m.s0.norm()));
    }
  }
  // different a, b, h
  auto in = ring_inputs(11, 2, 0.8, 1.7);
  for (auto& h : in.obs_vectors) h(0) = 1.3;
  CHECK(asymptotic_covariance(in).trace_s_over_n == Approx(closed_form(11, 2, 0.8, 1.7, 1.3)).epsilon(1e-10));
}

TEST_CASE("stability: closed-form denominators positive iff Sigma stable") {
  for (double a : {0.2, 0.4, 0.45, 0.5, 0.6, 1.0}) {
    for (double b : {0.05, 0.5, 2.0}) {
      auto in = ring_inputs(7, 2, a, b);
      bool closed_ok = true;
      try {
        closed_form(7, 2, a, b);
      } catch (const InstabilityError&) {
        closed_ok = false;
      }
      bool matrix_ok = true;
      try {
        asymptotic_covariance(in);
      } catch (const InstabilityError&) {
        matrix_ok = false;
      }
      INFO("a=" << a << " b=" << b);
      CHECK(closed_ok == matrix_ok);
      CHECK(closed_ok == (4.0 * a * 0.525 > 1.0));
    }
  }
}

TEST_CASE("build_H and build_s0 shapes") {
  std::vector<Eigen::VectorXd> hs{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 2), Eigen::Vector2d(1, 1)};
  const auto H = build_H(hs);
  CHECK(H.rows() == 3);
  CHECK(H.cols() == 6);
  CHECK(H(1, 3) == 2.0);
  CHECK(H(1, 0) == 0.0);
  hs[1].setZero();
  CHECK_THROWS_AS(build_H(hs), ParameterError);

  const std::vector<std::size_t> deg{1, 2, 1};
  const std::vector<Eigen::VectorXd> ones(3, Eigen::VectorXd::Ones(1));
  const auto s0 = build_s0(2.0, 1.0, 3.0, 1.0, deg, build_H(ones));
  CHECK(s0.s0(1, 1) == Approx(0.25 * 3.0 * 2.0 + 1.0));
  CHECK(s0.s0(0, 1) == 0.0);
}

TEST_CASE("vector parameter, collectively observable") {
  // Each agent sees one coordinate of a 2-vector; only the network can
  // identify theta.
  AsymptoticInputs in;
  in.noise_o = NoiseModel::gaussian(1.0);
  in.noise_c = NoiseModel::gaussian(1.0);
  in.graph = ring_khop_graph(6, 1);
  for (int i = 0; i < 6; ++i) in.obs_vectors.push_back(i % 2 ? Eigen::Vector2d(0, 1.5) : Eigen::Vector2d(1.5, 0));
  in.a = 2.0;
  in.b = 1.0;
  const auto m = asymptotic_covariance(in);
  CHECK(m.spectral_abscissa < 0.0);
  CHECK(m.s.rows() == 12);
  CHECK(m.residual <= 1e-9 * (in.a * in.a * m.s0).norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.s);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("cross moment of sign under a bivariate Gaussian is (2/pi) asin rho") {
  for (double rho : {-0.6, 0.0, 0.3, 0.9}) {
    const double det = 1.0 - rho * rho;
    JointDensity joint = [=](double x, double y) {
      return std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * det)) / (2.0 * std::numbers::pi * std::sqrt(det));
    };
    const double got = cross_moment(Nonlinearity::sign(), Nonlinearity::sign(), joint);
    CHECK(got == Approx(2.0 / std::numbers::pi * std::asin(rho)).margin(1e-9));
  }
}

TEST_CASE("Kco enters S0 as -(b/a)(K H + H^T K^T)") {
  const auto g = ring_khop_graph(3, 1);
  const double rho = 0.4;
  JointDensityLookup lookup = [&](std::size_t obs_agent, std::size_t i, std::size_t, std::size_t)
      -> std::optional<JointDensity> {
    if (obs_agent != i) return std::nullopt;
    const double det = 1.0 - rho * rho;
    return JointDensity([=](double x, double y) {
      return std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * det)) / (2.0 * std::numbers::pi * std::sqrt(det));
    });
  };
  const auto kco = build_kco(g, 1, Nonlinearity::sign(), Nonlinearity::sign(), lookup);
  const double entry = 2.0 / std::numbers::pi * std::asin(rho);
  CHECK(kco.rows() == 3);
  CHECK(kco.cols() == 3);
  CHECK(kco(0, 0) == Approx(2.0 * entry).margin(1e-9));  // two neighbours
  CHECK(kco(0, 1) == 0.0);

  auto in = ring_inputs(3, 1);
  const auto base = asymptotic_covariance(in);
  in.kco = kco;
  const auto with = asymptotic_covariance(in);
  const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd delta = -(kco * H + H.transpose() * kco.transpose());
  CHECK((with.s0 - base.s0 - delta).norm() < 1e-12);
  CHECK(with.trace_s_over_n < base.trace_s_over_n);
  CHECK(with.warnings.empty());
}

TEST_CASE("topology sweep") {
  const auto small = topology_sweep(11, 2.05, 1.0, 1.0, 1.0);
  REQUIRE(small.rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(small.rows[i].degree == 2 * (i + 1));
    CHECK(small.rows[i].stable);
    CHECK(small.rows[i].sigma_d_sq == Approx(closed_form(11, i + 1)).epsilon(1e-13));
  }
  const auto twice = topology_sweep(11, 2.05, 1.0, 1.0, 1.0);
  for (std::size_t i = 0; i < 5; ++i) CHECK(twice.rows[i].sigma_d_sq == small.rows[i].sigma_d_sq);

  const auto unstable = topology_sweep(11, 2.05, 0.3, 1.0, 1.0);
  CHECK_FALSE(unstable.argmin_degree.has_value());
  for (const auto& row : unstable.rows) CHECK_FALSE(row.stable);

  CHECK_THROWS_AS(topology_sweep(10, 2.05, 1.0, 1.0, 1.0), ParameterError);
}
