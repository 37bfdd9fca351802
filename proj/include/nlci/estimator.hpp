#pragma once

// Nonlinear consensus+innovations recursion. At every step t each agent i
// draws a fresh scalar observation z_i = h_i^T theta* + n_i and updates
//
//   x_i <- x_i - alpha_t [ (b/a) sum_{j in Omega_i} Psi_c(x_i - x_j + xi_ij)
//                          - h_i Psi_o(z_i - h_i^T x_i) ],
//   alpha_t = a / (t+1)^delta,
//
// synchronously from the time-t state. One communication noise vector is
// drawn per directed arc per step.
//
// Random stream discipline per replicate and step: N observation draws (agent
// order), then 2|E| M communication draws in canonical arc order (for each
// edge {u<v}: arc u<-v entries 0..M-1, then arc v<-u). Results therefore do
// not depend on thread scheduling.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nlci/graph.hpp"
#include "nlci/noise.hpp"
#include "nlci/nonlinearity.hpp"

namespace nlci {

using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDivergenceMse = 1e12;

struct EstimatorConfig {
  double a = 1.0;
  double b = 1.0;
  double delta = 1.0;
  std::size_t horizon = 1000;
  std::size_t replicates = 1;
  std::uint64_t seed = 1;
  Eigen::VectorXd theta_star = Eigen::VectorXd::Ones(1);
  std::vector<Eigen::VectorXd> obs_vectors;  // one h_i per agent
  std::optional<StateMatrix> initial_state;  // N x M; zero when absent
  std::vector<std::size_t> extra_snapshots;
  bool record_state = false;
  // Relaxes the h_i != 0 check (unit tests of the consensus term alone).
  bool allow_zero_obs_vectors = false;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(theta_star.size()); }
  double step_size(std::size_t t) const noexcept;

  // Throws ParameterError.
  void validate(std::size_t agents) const;
};

struct EstimatorModel {
  Graph graph;
  Nonlinearity psi_c = Nonlinearity::sign();
  Nonlinearity psi_o = Nonlinearity::sign();
  NoiseModel noise_o = NoiseModel::gaussian(1.0);
  NoiseModel noise_c = NoiseModel::gaussian(1.0);
  // Zero-noise runs for fixed-point and hand-iteration checks.
  bool noiseless = false;
};

struct NetworkState {
  StateMatrix x;  // N x M, row i is agent i's estimate
  std::size_t t = 0;
};

NetworkState initial_state(const EstimatorConfig& cfg, std::size_t agents);

// Scratch buffers reused across steps (one per replicate).
class StepWorkspace {
 public:
  StepWorkspace(const Graph& g, std::size_t M);

 private:
  friend bool step(NetworkState&, const EstimatorConfig&, const EstimatorModel&, RandomStream&,
                   StepWorkspace&, std::span<const std::size_t>);
  std::vector<double> residual_;     // N
  std::vector<double> arc_values_;   // 2|E| M
  std::vector<std::size_t> in_arcs_offsets_;
  std::vector<std::size_t> in_arcs_;  // per receiving agent, canonical arc order
  StateMatrix next_;
};

// Advances s by one step. Returns true when the new state diverged
// (non-finite entry or network MSE above kDivergenceMse); the diverged state
// is kept in s. agent_order, when non-empty, is the order in which agent
// updates are written (it cannot change the result).
bool step(NetworkState& s, const EstimatorConfig& cfg, const EstimatorModel& model,
          RandomStream& rng, StepWorkspace& ws, std::span<const std::size_t> agent_order = {});

// Times 1, 2, 4, ... and 1, 10, 100, ... up to T, plus T and any extra times
// in [1, T]; strictly increasing.
std::vector<std::size_t> snapshot_schedule(std::size_t horizon, std::span<const std::size_t> extra = {});

struct Snapshot {
  std::size_t t = 0;
  std::vector<double> agent_sq_error;  // ||x_i - theta*||^2
  double network_mse = 0.0;            // (1/N) sum_i ||x_i - theta*||^2
  std::optional<StateMatrix> state;
};

struct TrajectoryRecord {
  std::size_t replicate = 0;
  std::vector<Snapshot> snapshots;
  std::optional<std::size_t> diverged_at;
};

Snapshot take_snapshot(const NetworkState& s, const Eigen::VectorXd& theta_star, bool keep_state);

// Runs cfg.horizon steps with the stream make_stream(cfg.seed, replicate).
// A diverged run stops and records a final snapshot at the divergence time.
TrajectoryRecord run(const EstimatorConfig& cfg, const EstimatorModel& model, std::size_t replicate);

struct EnsembleSnapshot {
  std::size_t t = 0;
  std::size_t replicates_used = 0;
  // N x M mean and sample variance across replicates of sqrt(t+1)(x_i - theta*).
  StateMatrix mean_scaled_error;
  StateMatrix var_scaled_error;
  // (1/N) sum_i mean over replicates of (t+1) ||x_i - theta*||^2
  double scaled_second_moment = 0.0;
  // average over agents and entries of var_scaled_error
  double scaled_error_variance = 0.0;
};

struct EnsembleResult {
  std::vector<std::size_t> times;
  std::vector<EnsembleSnapshot> snapshots;
  // replicate_mse[r][k] = network MSE of replicate r at times[k] (NaN when
  // the replicate diverged before that time).
  std::vector<std::vector<double>> replicate_mse;
  std::vector<std::size_t> diverged;  // replicate indices
  std::vector<std::size_t> diverged_at;
};

// Runs replicates 0..R-1 on up to `threads` worker threads (0 = hardware
// concurrency). Statistics are reduced in replicate order, so the result
// does not depend on the thread count. Requires R >= 2.
EnsembleResult run_ensemble(const EstimatorConfig& cfg, const EstimatorModel& model,
                            unsigned threads = 0);

struct MetricsRow {
  std::size_t t = 0;
  long agent = -1;  // -1 for the network aggregate
  double mse = 0.0;
  double scaled_second_moment = 0.0;  // (t+1) mse
};

// Per-agent rows followed by the network row, for each snapshot.
std::vector<MetricsRow> error_metrics(const TrajectoryRecord& rec);

}  // namespace nlci
