#pragma once

// Experiment commands behind the nlci CLI. Each returns a process exit code:
//   0 success, 2 validation error, 3 instability, 4 numeric failure
// (including divergence of a non-baseline run).
//
// Files written to the output directory:
//   trajectory.csv           replicate,t,agent,mse,scaled_second_moment
//                            (agent is 1-based, -1 is the network aggregate)
//   ensemble.csv             t,replicates_used,scaled_second_moment,
//                            scaled_error_variance,reference_trace_S_over_N
//   ensemble_agents.csv      t,agent,entry,mean_scaled_error,var_scaled_error
//   ensemble_replicates.csv  replicate,t,mse,diverged
//   asymptotic.txt           key=value lines
//   sigma.csv s0.csv s.csv kco.csv   with --dump-matrices
//   sweep.csv                d,sigma_d_sq,stable
//   summary.txt              plain-text report of the run

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nlci/asymptotics.hpp"
#include "nlci/config.hpp"

namespace nlci {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInstability = 3;
inline constexpr int kExitNumeric = 4;

struct CommandOptions {
  std::string out_dir;  // overrides [output] directory when non-empty
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool dump_matrices = false;
  std::size_t replicate = 0;  // simulate only
  unsigned threads = 0;       // ensemble workers, 0 = hardware concurrency
};

// Shortest round-trip-safe text for CSV output ("%.17g"; nan/inf spelled out).
std::string format_double(double x);

// Asymptotic inputs derived from a parsed config (no cross-covariance).
AsymptoticInputs asymptotic_inputs(const ExperimentConfig& cfg);

// Closed-form per-agent variance when it applies (regular graph, M = 1,
// common h, sign nonlinearities on both channels).
std::optional<double> closed_form_variance(const ExperimentConfig& cfg);

struct ValidationLine {
  std::string check;
  bool pass = false;
  std::string detail;
};

// Connectivity, nonlinearity shape conditions, noise symmetry and moments,
// and (for simulate/ensemble/asymptotic) stability of Sigma.
std::vector<ValidationLine> validation_report(const ExperimentConfig& cfg);

int cmd_validate(const std::string& config_path, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_ensemble(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_asymptotic(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                   std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
              std::ostream& err);

// Parses the config (strict), checks that it declares a kind the command can
// run, applies overrides and dispatches. Errors are mapped to exit codes.
int run_command(ExperimentKind command, const std::string& config_path, const CommandOptions& opts,
                std::ostream& out, std::ostream& err);

}  // namespace nlci
