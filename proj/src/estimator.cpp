#include "nlci/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "nlci/errors.hpp"
#include "nlci/simd/kernels.hpp"

namespace nlci {

double EstimatorConfig::step_size(std::size_t t) const noexcept {
  const double base = static_cast<double>(t + 1);
  return delta == 1.0 ? a / base : a / std::pow(base, delta);
}

void EstimatorConfig::validate(std::size_t agents) const {
  std::vector<std::string> problems;
  if (!(a > 0.0)) problems.push_back("a must be positive");
  if (!(b > 0.0)) problems.push_back("b must be positive");
  if (!(delta > 0.5 && delta <= 1.0)) problems.push_back("delta must lie in (0.5, 1]");
  if (horizon == 0) problems.push_back("horizon must be at least 1");
  if (replicates == 0) problems.push_back("replicates must be at least 1");
  if (theta_star.size() == 0) problems.push_back("theta_star must have dimension >= 1");
  if (obs_vectors.size() != agents) {
    problems.push_back("need one observation vector per agent (" + std::to_string(agents) + ")");
  }
  for (std::size_t i = 0; i < obs_vectors.size(); ++i) {
    if (obs_vectors[i].size() != theta_star.size()) {
      problems.push_back("h_" + std::to_string(i + 1) + " has the wrong dimension");
    } else if (!allow_zero_obs_vectors && obs_vectors[i].squaredNorm() == 0.0) {
      problems.push_back("h_" + std::to_string(i + 1) + " is the zero vector");
    }
  }
  if (initial_state && (static_cast<std::size_t>(initial_state->rows()) != agents ||
                        initial_state->cols() != theta_star.size())) {
    problems.push_back("initial state must be N x M");
  }
  if (!problems.empty()) {
    std::string msg = "invalid estimator configuration:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ParameterError(msg);
  }
}

NetworkState initial_state(const EstimatorConfig& cfg, std::size_t agents) {
  NetworkState s;
  if (cfg.initial_state) {
    s.x = *cfg.initial_state;
  } else {
    s.x = StateMatrix::Zero(static_cast<Eigen::Index>(agents), static_cast<Eigen::Index>(cfg.dimension()));
  }
  return s;
}

StepWorkspace::StepWorkspace(const Graph& g, std::size_t M) {
  const std::size_t n = g.size();
  residual_.resize(n);
  arc_values_.resize(2 * g.edges().size() * M);
  in_arcs_offsets_.assign(n + 1, 0);
  for (const auto& e : g.edges()) {
    ++in_arcs_offsets_[e.u + 1];
    ++in_arcs_offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) in_arcs_offsets_[i + 1] += in_arcs_offsets_[i];
  in_arcs_.resize(in_arcs_offsets_[n]);
  std::vector<std::size_t> fill(in_arcs_offsets_.begin(), in_arcs_offsets_.end() - 1);
  const auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    in_arcs_[fill[edges[e].u]++] = 2 * e;      // u receives from v
    in_arcs_[fill[edges[e].v]++] = 2 * e + 1;  // v receives from u
  }
  next_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(M));
}

bool step(NetworkState& s, const EstimatorConfig& cfg, const EstimatorModel& model,
          RandomStream& rng, StepWorkspace& ws, std::span<const std::size_t> agent_order) {
  const auto& g = model.graph;
  const std::size_t n = g.size();
  const std::size_t m = cfg.dimension();
  const double alpha = cfg.step_size(s.t);
  const double ratio = cfg.b / cfg.a;

  // Observation block.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& h = cfg.obs_vectors[i];
    const double noise = model.noiseless ? 0.0 : model.noise_o.sample(rng);
    const double z = h.dot(cfg.theta_star) + noise;
    double predicted = 0.0;
    for (std::size_t l = 0; l < m; ++l) predicted += h(static_cast<Eigen::Index>(l)) * s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
    ws.residual_[i] = z - predicted;
  }
  model.psi_o.apply_inplace(ws.residual_);

  // Communication block, canonical arc order.
  const auto edges = g.edges();
  double* arc = ws.arc_values_.data();
  for (const auto& e : edges) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    for (std::size_t l = 0; l < m; ++l) {
      const double xi = model.noiseless ? 0.0 : model.noise_c.sample(rng);
      *arc++ = s.x(u, static_cast<Eigen::Index>(l)) - s.x(v, static_cast<Eigen::Index>(l)) + xi;
    }
    for (std::size_t l = 0; l < m; ++l) {
      const double xi = model.noiseless ? 0.0 : model.noise_c.sample(rng);
      *arc++ = s.x(v, static_cast<Eigen::Index>(l)) - s.x(u, static_cast<Eigen::Index>(l)) + xi;
    }
  }
  model.psi_c.apply_inplace(ws.arc_values_);

  auto update_agent = [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    const auto& h = cfg.obs_vectors[i];
    for (std::size_t l = 0; l < m; ++l) {
      double consensus = 0.0;
      for (std::size_t k = ws.in_arcs_offsets_[i]; k < ws.in_arcs_offsets_[i + 1]; ++k) {
        consensus += ws.arc_values_[ws.in_arcs_[k] * m + l];
      }
      const auto col = static_cast<Eigen::Index>(l);
      const double innovation = h(col) * ws.residual_[i];
      ws.next_(row, col) = s.x(row, col) - alpha * (ratio * consensus - innovation);
    }
  };
  if (agent_order.empty()) {
    for (std::size_t i = 0; i < n; ++i) update_agent(i);
  } else {
    for (std::size_t i : agent_order) update_agent(i);
  }

  s.x.swap(ws.next_);
  ++s.t;

  if (!s.x.allFinite()) return true;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq += (s.x.row(static_cast<Eigen::Index>(i)).transpose() - cfg.theta_star).squaredNorm();
  }
  return !(sq / static_cast<double>(n) <= kDivergenceMse);
}

std::vector<std::size_t> snapshot_schedule(std::size_t horizon, std::span<const std::size_t> extra) {
  std::vector<std::size_t> times;
  for (std::size_t t = 1; t <= horizon; t *= 2) {
    times.push_back(t);
    if (t > horizon / 2) break;
  }
  for (std::size_t t = 1; t <= horizon; t *= 10) {
    times.push_back(t);
    if (t > horizon / 10) break;
  }
  times.push_back(horizon);
  for (std::size_t t : extra) {
    if (t >= 1 && t <= horizon) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

Snapshot take_snapshot(const NetworkState& s, const Eigen::VectorXd& theta_star, bool keep_state) {
  Snapshot snap;
  snap.t = s.t;
  const auto n = s.x.rows();
  const auto m = s.x.cols();
  snap.agent_sq_error.resize(static_cast<std::size_t>(n));
  std::vector<double> err(static_cast<std::size_t>(m));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < m; ++l) err[static_cast<std::size_t>(l)] = s.x(i, l) - theta_star(l);
    const double sq = simd::sum_squares(err);
    snap.agent_sq_error[static_cast<std::size_t>(i)] = sq;
    total += sq;
  }
  snap.network_mse = total / static_cast<double>(n);
  if (keep_state) snap.state = s.x;
  return snap;
}

TrajectoryRecord run(const EstimatorConfig& cfg, const EstimatorModel& model, std::size_t replicate) {
  const std::size_t n = model.graph.size();
  cfg.validate(n);
  TrajectoryRecord rec;
  rec.replicate = replicate;
  const auto times = snapshot_schedule(cfg.horizon, cfg.extra_snapshots);
  RandomStream rng = make_stream(cfg.seed, replicate);
  StepWorkspace ws(model.graph, cfg.dimension());
  NetworkState state = initial_state(cfg, n);

  std::size_t next = 0;
  while (state.t < cfg.horizon) {
    const bool diverged = step(state, cfg, model, rng, ws);
    if (diverged) {
      rec.diverged_at = state.t;
      rec.snapshots.push_back(take_snapshot(state, cfg.theta_star, cfg.record_state));
      return rec;
    }
    if (next < times.size() && state.t == times[next]) {
      rec.snapshots.push_back(take_snapshot(state, cfg.theta_star, cfg.record_state));
      ++next;
    }
  }
  return rec;
}

EnsembleResult run_ensemble(const EstimatorConfig& cfg, const EstimatorModel& model, unsigned threads) {
  if (cfg.replicates < 2) throw ParameterError("run_ensemble needs at least 2 replicates");
  const std::size_t n = model.graph.size();
  cfg.validate(n);
  EstimatorConfig local = cfg;
  local.record_state = true;

  const std::size_t r_count = cfg.replicates;
  std::vector<TrajectoryRecord> records(r_count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, r_count));
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t r = cursor.fetch_add(1); r < r_count; r = cursor.fetch_add(1)) {
      records[r] = run(local, model, r);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  EnsembleResult out;
  out.times = snapshot_schedule(cfg.horizon, cfg.extra_snapshots);
  const std::size_t k_count = out.times.size();
  const auto m = static_cast<Eigen::Index>(cfg.dimension());
  const auto rows = static_cast<Eigen::Index>(n);

  out.replicate_mse.assign(r_count, std::vector<double>(k_count, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t r = 0; r < r_count; ++r) {
    const auto& rec = records[r];
    if (rec.diverged_at) {
      out.diverged.push_back(r);
      out.diverged_at.push_back(*rec.diverged_at);
    }
    for (std::size_t k = 0; k < rec.snapshots.size() && k < k_count; ++k) {
      if (rec.snapshots[k].t == out.times[k]) out.replicate_mse[r][k] = rec.snapshots[k].network_mse;
    }
  }

  for (std::size_t k = 0; k < k_count; ++k) {
    EnsembleSnapshot snap;
    snap.t = out.times[k];
    const double scale = std::sqrt(static_cast<double>(snap.t + 1));
    snap.mean_scaled_error = StateMatrix::Zero(rows, m);
    snap.var_scaled_error = StateMatrix::Zero(rows, m);
    double second = 0.0;
    for (const auto& rec : records) {
      if (rec.diverged_at) continue;
      const StateMatrix err = (rec.snapshots[k].state->rowwise() - cfg.theta_star.transpose()) * scale;
      snap.mean_scaled_error += err;
      second += err.squaredNorm();
      ++snap.replicates_used;
    }
    if (snap.replicates_used > 0) {
      const double used = static_cast<double>(snap.replicates_used);
      snap.mean_scaled_error /= used;
      snap.scaled_second_moment = second / (used * static_cast<double>(n));
      for (const auto& rec : records) {
        if (rec.diverged_at) continue;
        const StateMatrix err = (rec.snapshots[k].state->rowwise() - cfg.theta_star.transpose()) * scale;
        snap.var_scaled_error += (err - snap.mean_scaled_error).cwiseAbs2();
      }
      if (snap.replicates_used > 1) snap.var_scaled_error /= used - 1.0;
      snap.scaled_error_variance = snap.var_scaled_error.mean();
    } else {
      snap.scaled_second_moment = std::numeric_limits<double>::quiet_NaN();
      snap.scaled_error_variance = std::numeric_limits<double>::quiet_NaN();
    }
    out.snapshots.push_back(std::move(snap));
  }
  return out;
}

std::vector<MetricsRow> error_metrics(const TrajectoryRecord& rec) {
  std::vector<MetricsRow> rows;
  for (const auto& snap : rec.snapshots) {
    const double scale = static_cast<double>(snap.t + 1);
    for (std::size_t i = 0; i < snap.agent_sq_error.size(); ++i) {
      rows.push_back({snap.t, static_cast<long>(i), snap.agent_sq_error[i], scale * snap.agent_sq_error[i]});
    }
    rows.push_back({snap.t, -1, snap.network_mse, scale * snap.network_mse});
  }
  return rows;
}

}  // namespace nlci
