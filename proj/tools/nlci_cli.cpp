#include <CLI11.hpp>
#include <iostream>
#include <vector>

#include "nlci/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"nlci: distributed estimation with bounded nonlinear updates"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  nlci::CommandOptions opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--quiet", opts.quiet, "suppress the summary on stdout");
  };
  std::vector<CLI::Option*> seed_options;
  auto add_run = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    seed_options.push_back(sub->add_option("--seed", seed, "override estimator.seed"));
  };

  auto* validate = app.add_subcommand("validate", "check a config against the model assumptions");
  add_common(validate);
  auto* simulate = app.add_subcommand("simulate", "run one replicate and write trajectory.csv");
  add_run(simulate);
  simulate->add_option("--replicate", opts.replicate, "replicate index (selects the random stream)");
  auto* ensemble = app.add_subcommand("ensemble", "run R replicates and write ensemble statistics");
  add_run(ensemble);
  ensemble->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
  auto* asymptotic = app.add_subcommand("asymptotic", "compute the asymptotic covariance S");
  add_run(asymptotic);
  asymptotic->add_flag("--dump-matrices", opts.dump_matrices, "write sigma.csv, s0.csv, s.csv, kco.csv");
  auto* sweep = app.add_subcommand("sweep", "per-agent variance versus degree on k-hop rings");
  add_run(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nlci::kExitValidation;
  }

  opts.out_dir = out_dir;
  for (auto* opt : seed_options) {
    if (opt->count() > 0) opts.seed = seed;
  }

  if (validate->parsed()) return nlci::cmd_validate(config, opts, std::cout, std::cerr);
  nlci::ExperimentKind kind = nlci::ExperimentKind::sweep;
  if (simulate->parsed()) kind = nlci::ExperimentKind::simulate;
  if (ensemble->parsed()) kind = nlci::ExperimentKind::ensemble;
  if (asymptotic->parsed()) kind = nlci::ExperimentKind::asymptotic;
  return nlci::run_command(kind, config, opts, std::cout, std::cerr);
}
