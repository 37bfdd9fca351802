#pragma once

// Experiment configuration file: INI-style "key = value" lines grouped in
// [sections], '#' or ';' starts a comment, lists are comma separated.
//
//   experiment = sweep            # simulate | ensemble | asymptotic | sweep
//   baseline = false              # true permits the identity nonlinearity
//
//   [graph]
//   family = ring_khop            # ring_khop | complete | edge_list
//   n = 1001
//   k = 1                         # ring_khop only
//   path = edges.txt              # edge_list only, relative to the config
//
//   [noise.observation]           # and [noise.communication]
//   family = eq3                  # eq3 | gaussian
//   beta = 2.05                   # eq3
//   sigma = 1                     # gaussian
//
//   [nonlinearity.consensus]      # and [nonlinearity.observation]
//   kind = sign                   # sign | clip | quantizer | identity
//   tau = 0.5                     # clip
//   levels = 0.5, 1, 2            # quantizer thresholds
//
//   [estimator]
//   a = 1
//   b = 1
//   delta = 1
//   horizon = 100000
//   replicates = 500
//   seed = 1
//   theta_star = 1                # M entries
//   h = 1                         # common h_i (M entries)
//   h.3 = 2                       # per-agent override, 1-based
//   initial = zero                # zero | theta_star | M entries
//   snapshots = 1000              # extra snapshot times
//
//   [output]
//   directory = out

#include <optional>
#include <string>
#include <vector>

#include "nlci/estimator.hpp"
#include "nlci/graph.hpp"
#include "nlci/noise.hpp"
#include "nlci/nonlinearity.hpp"

namespace nlci {

enum class ExperimentKind { simulate, ensemble, asymptotic, sweep };

std::string_view experiment_name(ExperimentKind kind) noexcept;

enum class ParseMode {
  strict,   // assumption violations are errors
  lenient,  // assumption violations are recorded in `findings` (validate)
};

struct GraphSpec {
  std::string family;
  std::size_t n = 0;
  std::size_t k = 0;
  std::string path;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::sweep;
  bool baseline = false;
  GraphSpec graph_spec;
  Graph graph;
  NoiseModel noise_o = NoiseModel::gaussian(1.0);
  NoiseModel noise_c = NoiseModel::gaussian(1.0);
  Nonlinearity psi_c = Nonlinearity::sign();
  Nonlinearity psi_o = Nonlinearity::sign();
  EstimatorConfig estimator;
  std::string output_dir = "out";
  std::vector<std::string> findings;

  EstimatorModel model() const { return {graph, psi_c, psi_o, noise_o, noise_c, false}; }
};

// Throws ConfigError listing every problem found.
ExperimentConfig parse_config(const std::string& path, ParseMode mode = ParseMode::strict);
ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir,
                                   ParseMode mode = ParseMode::strict);

}  // namespace nlci
