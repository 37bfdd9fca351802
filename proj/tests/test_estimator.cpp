#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "nlci/errors.hpp"
#include "nlci/estimator.hpp"

using namespace nlci;
using Catch::Approx;

namespace {

EstimatorConfig basic_config(std::size_t n, std::size_t m = 1) {
  EstimatorConfig cfg;
  cfg.theta_star = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m));
  cfg.obs_vectors.assign(n, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)));
  cfg.horizon = 200;
  return cfg;
}

EstimatorModel heavy_model(const Graph& g, Nonlinearity c = Nonlinearity::sign(), Nonlinearity o = Nonlinearity::sign()) {
  return {g, c, o, NoiseModel::heavy_tail(2.05), NoiseModel::heavy_tail(2.05), false};
}

// Straight transcription of the update with the documented draw order.
StateMatrix reference_step(const StateMatrix& x, std::size_t t, const EstimatorConfig& cfg, const EstimatorModel& model,
                           RandomStream& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto m = static_cast<std::size_t>(x.cols());
  std::vector<double> innov(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = cfg.obs_vectors[i].dot(cfg.theta_star) + model.noise_o.sample(rng);
    double predicted = 0.0;
    for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(m); ++l) {
      predicted += cfg.obs_vectors[i](l) * x(static_cast<Eigen::Index>(i), l);
    }
    innov[i] = model.psi_o(z - predicted);
  }
  StateMatrix consensus = StateMatrix::Zero(x.rows(), x.cols());
  for (const auto& e : model.graph.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(m); ++l) {
      consensus(u, l) += model.psi_c(x(u, l) - x(v, l) + model.noise_c.sample(rng));
    }
    for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(m); ++l) {
      consensus(v, l) += model.psi_c(x(v, l) - x(u, l) + model.noise_c.sample(rng));
    }
  }
  const double alpha = cfg.a / std::pow(static_cast<double>(t + 1), cfg.delta);
  StateMatrix next = x;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < m; ++l) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(l);
      next(r, c) = x(r, c) - alpha * ((cfg.b / cfg.a) * consensus(r, c) - cfg.obs_vectors[i](c) * innov[i]);
    }
  }
  return next;
}

}  // namespace

TEST_CASE("step size") {
  EstimatorConfig cfg;
  cfg.a = 2.0;
  CHECK(cfg.step_size(0) == 2.0);
  CHECK(cfg.step_size(3) == 0.5);
  cfg.delta = 0.75;
  CHECK(cfg.step_size(15) == Approx(2.0 / 8.0));
}

TEST_CASE("config validation") {
  auto cfg = basic_config(3);
  CHECK_NOTHROW(cfg.validate(3));
  CHECK_THROWS_AS(cfg.validate(4), ParameterError);
  cfg.delta = 0.4;
  CHECK_THROWS_AS(cfg.validate(3), ParameterError);
  cfg.delta = 1.0;
  cfg.obs_vectors[1].setZero();
  CHECK_THROWS_AS(cfg.validate(3), ParameterError);
  cfg.allow_zero_obs_vectors = true;
  CHECK_NOTHROW(cfg.validate(3));
}

TEST_CASE("noiseless start at theta* is a fixed point") {
  const auto g = ring_khop_graph(6, 2);
  auto cfg = basic_config(6, 2);
  cfg.theta_star << 0.3, -1.2;
  cfg.initial_state = StateMatrix(6, 2);
  for (int i = 0; i < 6; ++i) cfg.initial_state->row(i) = cfg.theta_star.transpose();
  for (const auto& nl : {Nonlinearity::sign(), Nonlinearity::clip(0.5), Nonlinearity::identity()}) {
    auto model = heavy_model(g, nl, nl);
    model.noiseless = true;
    const auto rec = run(cfg, model, 0);
    CHECK_FALSE(rec.diverged_at.has_value());
    for (const auto& s : rec.snapshots) CHECK(s.network_mse == 0.0);
  }
}

TEST_CASE("two-agent hand iterations") {
  const auto pair = Graph::from_edges(2, {{0, 1}});
  auto cfg = basic_config(2);
  cfg.b = 0.5;
  auto model = heavy_model(pair);
  model.noiseless = true;
  NetworkState s;
  s.x = StateMatrix(2, 1);
  s.x << 0.0, 2.0;
  StepWorkspace ws(pair, 1);
  auto rng = make_stream(1, 0);
  // residuals 1, -1; arcs sign(0 - 2) = -1, sign(2 - 0) = 1; alpha = 1
  step(s, cfg, model, rng, ws);
  CHECK(s.x(0, 0) == 1.5);
  CHECK(s.x(1, 0) == 0.5);
  CHECK(s.t == 1);
  // alpha = 1/2; residuals -0.5, 0.5 -> -1, 1; arcs sign(1) = 1, -1
  step(s, cfg, model, rng, ws);
  CHECK(s.x(0, 0) == 1.5 - 0.5 * (0.5 * 1.0 + 1.0));
  CHECK(s.x(1, 0) == 0.5 - 0.5 * (0.5 * -1.0 - 1.0));
}

TEST_CASE("noisy steps match a direct transcription bit for bit") {
  const auto g = ring_khop_graph(5, 2);
  auto cfg = basic_config(5, 2);
  cfg.theta_star << 1.0, -0.5;
  cfg.obs_vectors = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, -1),
                     Eigen::Vector2d(0.5, 0.5)};
  cfg.a = 0.7;
  cfg.b = 1.3;
  cfg.delta = 0.8;
  const auto model = heavy_model(g, Nonlinearity::clip(0.6), Nonlinearity::quantizer({0.5, 1.5}));
  NetworkState s = initial_state(cfg, 5);
  StateMatrix ref = s.x;
  StepWorkspace ws(g, 2);
  auto rng = make_stream(77, 3);
  auto rng_ref = make_stream(77, 3);
  for (std::size_t t = 0; t < 50; ++t) {
    ref = reference_step(ref, t, cfg, model, rng_ref);
    step(s, cfg, model, rng, ws);
  }
  CHECK((s.x - ref).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("agent update order does not change the synchronous result") {
  const auto g = ring_khop_graph(7, 2);
  auto cfg = basic_config(7);
  const auto model = heavy_model(g);
  std::vector<std::size_t> order(7);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle(4);
  NetworkState a = initial_state(cfg, 7);
  NetworkState b = a;
  StepWorkspace wa(g, 1);
  StepWorkspace wb(g, 1);
  auto ra = make_stream(5, 0);
  auto rb = make_stream(5, 0);
  for (int t = 0; t < 100; ++t) {
    std::shuffle(order.begin(), order.end(), shuffle);
    step(a, cfg, model, ra, wa);
    step(b, cfg, model, rb, wb, order);
  }
  CHECK(a.x == b.x);
}

TEST_CASE("runs are reproducible and replicates differ") {
  const auto g = ring_khop_graph(10, 1);
  auto cfg = basic_config(10);
  cfg.horizon = 500;
  const auto model = heavy_model(g);
  const auto r1 = run(cfg, model, 2);
  const auto r2 = run(cfg, model, 2);
  const auto r3 = run(cfg, model, 3);
  REQUIRE(r1.snapshots.size() == r2.snapshots.size());
  for (std::size_t k = 0; k < r1.snapshots.size(); ++k) {
    CHECK(r1.snapshots[k].agent_sq_error == r2.snapshots[k].agent_sq_error);
  }
  CHECK(r1.snapshots.back().network_mse != r3.snapshots.back().network_mse);
}

TEST_CASE("snapshot schedule") {
  const std::vector<std::size_t> want{1, 2, 4, 8, 10, 16, 32, 64, 100, 128, 256, 512, 1000};
  CHECK(snapshot_schedule(1000) == want);
  const std::vector<std::size_t> extra{7, 5000, 1000};
  auto with = snapshot_schedule(1000, extra);
  CHECK(std::find(with.begin(), with.end(), 7u) != with.end());
  CHECK(with.back() == 1000);
  CHECK(std::adjacent_find(with.begin(), with.end(), std::greater_equal<>()) == with.end());
  CHECK(snapshot_schedule(1) == std::vector<std::size_t>{1});
  CHECK(snapshot_schedule(30).back() == 30);
}

TEST_CASE("metrics rows") {
  const auto g = ring_khop_graph(4, 1);
  auto cfg = basic_config(4);
  cfg.horizon = 16;
  const auto rec = run(cfg, heavy_model(g), 0);
  const auto rows = error_metrics(rec);
  CHECK(rows.size() == rec.snapshots.size() * 5);
  for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
    const auto& snap = rec.snapshots[k];
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& row = rows[k * 5 + i];
      CHECK(row.agent == static_cast<long>(i));
      CHECK(row.scaled_second_moment == static_cast<double>(snap.t + 1) * row.mse);
      total += row.mse;
    }
    CHECK(rows[k * 5 + 4].agent == -1);
    CHECK(rows[k * 5 + 4].mse == Approx(total / 4.0));
  }
}

TEST_CASE("divergence flag") {
  const auto g = ring_khop_graph(3, 1);
  auto cfg = basic_config(3);
  cfg.initial_state = StateMatrix::Constant(3, 1, 1e7);
  auto model = heavy_model(g);
  model.noiseless = true;
  const auto rec = run(cfg, model, 0);
  REQUIRE(rec.diverged_at.has_value());
  CHECK(*rec.diverged_at == 1);
  CHECK(rec.snapshots.back().t == 1);
}

TEST_CASE("ensemble statistics") {
  const auto g = ring_khop_graph(5, 1);
  auto cfg = basic_config(5);
  cfg.horizon = 300;
  cfg.replicates = 6;

  SECTION("noiseless from theta* gives zero error") {
    cfg.initial_state = StateMatrix::Ones(5, 1);
    auto model = heavy_model(g);
    model.noiseless = true;
    const auto res = run_ensemble(cfg, model, 1);
    for (const auto& s : res.snapshots) {
      CHECK(s.scaled_second_moment == 0.0);
      CHECK(s.replicates_used == 6);
    }
  }

  SECTION("independent of thread count and equal to a direct reduction") {
    const auto model = heavy_model(g);
    const auto one = run_ensemble(cfg, model, 1);
    const auto three = run_ensemble(cfg, model, 3);
    REQUIRE(one.snapshots.size() == three.snapshots.size());
    for (std::size_t k = 0; k < one.snapshots.size(); ++k) {
      CHECK(one.snapshots[k].scaled_second_moment == three.snapshots[k].scaled_second_moment);
      CHECK(one.snapshots[k].var_scaled_error == three.snapshots[k].var_scaled_error);
    }
    // final snapshot against single runs
    double second = 0.0;
    std::vector<double> e(6);
    for (std::size_t r = 0; r < 6; ++r) {
      const auto rec = run(cfg, model, r);
      second += rec.snapshots.back().network_mse;
      CHECK(one.replicate_mse[r].back() == rec.snapshots.back().network_mse);
    }
    const auto& last = one.snapshots.back();
    CHECK(last.scaled_second_moment == Approx(301.0 * second / 6.0).epsilon(1e-12));
  }

  SECTION("needs two replicates") {
    cfg.replicates = 1;
    CHECK_THROWS_AS(run_ensemble(cfg, heavy_model(g), 1), ParameterError);
  }
}

TEST_CASE("sign estimator converges on a small ring") {
  const auto g = ring_khop_graph(10, 1);
  auto cfg = basic_config(10);
  cfg.horizon = 20000;
  const auto rec = run(cfg, heavy_model(g), 0);
  CHECK_FALSE(rec.diverged_at.has_value());
  CHECK(rec.snapshots.back().network_mse < 1e-2);
  CHECK(rec.snapshots.back().network_mse < rec.snapshots[rec.snapshots.size() / 2].network_mse);
}
