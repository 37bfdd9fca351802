#include "nlci/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nlci/errors.hpp"
#include "nlci/lyapunov.hpp"
#include "nlci/simd/kernels.hpp"

namespace nlci {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw NumericError("cannot write '" + path.string() + "'");
  return f;
}

fs::path prepare_dir(const ExperimentConfig& cfg, const CommandOptions& opts) {
  fs::path dir = opts.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw NumericError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m) {
  auto f = open_output(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) f << ',';
      f << format_double(m(i, j));
    }
    f << '\n';
  }
}

std::string header(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "experiment: " << experiment_name(cfg.kind) << (cfg.baseline ? " (linear baseline)" : "") << '\n'
    << "graph: " << cfg.graph_spec.family << ", N = " << cfg.graph.size() << ", |E| = " << cfg.graph.edges().size()
    << '\n'
    << "noise: observation " << cfg.noise_o.describe() << ", communication " << cfg.noise_c.describe() << '\n'
    << "nonlinearity: consensus " << cfg.psi_c.describe() << ", observation " << cfg.psi_o.describe() << '\n'
    << "a = " << cfg.estimator.a << ", b = " << cfg.estimator.b << ", delta = " << cfg.estimator.delta
    << ", M = " << cfg.estimator.dimension() << ", seed = " << cfg.estimator.seed << '\n'
    << "simd: " << simd::isa_name(simd::active_isa()) << '\n';
  return s.str();
}

bool uses_sign(const ExperimentConfig& cfg) {
  return cfg.psi_c.kind() == NonlinearityKind::sign && cfg.psi_o.kind() == NonlinearityKind::sign;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

AsymptoticInputs asymptotic_inputs(const ExperimentConfig& cfg) {
  AsymptoticInputs in;
  in.a = cfg.estimator.a;
  in.b = cfg.estimator.b;
  in.nl_c = cfg.psi_c;
  in.nl_o = cfg.psi_o;
  in.noise_c = cfg.noise_c;
  in.noise_o = cfg.noise_o;
  in.graph = cfg.graph;
  in.obs_vectors = cfg.estimator.obs_vectors;
  return in;
}

std::optional<double> closed_form_variance(const ExperimentConfig& cfg) {
  const auto degree = cfg.graph.regular_degree();
  if (!degree || cfg.estimator.dimension() != 1 || !uses_sign(cfg)) return std::nullopt;
  const auto& hs = cfg.estimator.obs_vectors;
  if (hs.empty()) return std::nullopt;
  for (const auto& h : hs) {
    if (h(0) != hs.front()(0)) return std::nullopt;
  }
  const auto spectrum = laplacian_spectrum(cfg.graph);
  const auto sign = Nonlinearity::sign();
  return per_node_variance_regular({static_cast<double>(*degree), spectrum, cfg.estimator.a, cfg.estimator.b,
                                    hs.front()(0), cfg.noise_o.pdf(0.0), cfg.noise_c.pdf(0.0),
                                    effective_variance(sign, cfg.noise_o),
                                    cfg.graph.edges().empty() ? 0.0 : effective_variance(sign, cfg.noise_c)});
}

std::vector<ValidationLine> validation_report(const ExperimentConfig& cfg) {
  std::vector<ValidationLine> lines;

  const auto conn = validate_connected(cfg.graph);
  lines.push_back({"graph connected", conn.connected, conn.connected ? "1 component" : conn.message});

  const auto grid = symmetric_grid(20.0, 400);
  for (const auto& [label, nl] : {std::pair{"consensus", &cfg.psi_c}, std::pair{"observation", &cfg.psi_o}}) {
    const auto rep = validate_shape(*nl, grid);
    const std::string base = std::string("nonlinearity.") + label + " ";
    lines.push_back({base + "odd", rep.odd, nl->describe()});
    lines.push_back({base + "positive on positives", rep.positive_on_positives, ""});
    lines.push_back({base + "nondecreasing", rep.monotone, ""});
    lines.push_back({base + "bounded", rep.bounded, rep.bounded ? "c1 = " + format_double(rep.c1) : "unbounded"});
    lines.push_back({base + "jump or slope at 0", rep.jump_or_slope,
                     rep.discontinuous_at_zero ? "jump at 0" : "c2 = " + format_double(rep.c2)});
  }

  for (const auto& [label, noise] : {std::pair{"observation", &cfg.noise_o}, std::pair{"communication", &cfg.noise_c}}) {
    const std::string base = std::string("noise.") + label + " ";
    bool symmetric = noise->cdf(0.0) == 0.5;
    for (double w : grid) {
      if (noise->pdf(w) != noise->pdf(-w)) symmetric = false;
    }
    lines.push_back({base + "symmetric", symmetric, noise->describe()});
    const double m1 = noise->first_absolute_moment();
    lines.push_back({base + "finite first moment", std::isfinite(m1), "E|w| = " + format_double(m1)});
  }

  if (cfg.kind != ExperimentKind::sweep && cfg.psi_c.is_compliant() && cfg.psi_o.is_compliant()) {
    try {
      const auto in = asymptotic_inputs(cfg);
      const Eigen::MatrixXd H = build_H(in.obs_vectors);
      const double phi_c = phi_prime_zero(in.nl_c, in.noise_c);
      const double phi_o = phi_prime_zero(in.nl_o, in.noise_o);
      const double abscissa = check_stability(build_sigma(in.a, in.b, phi_c, phi_o, laplacian(in.graph), H,
                                                          cfg.estimator.dimension()));
      lines.push_back({"Sigma stable", abscissa < 0.0, "spectral abscissa = " + format_double(abscissa)});
    } catch (const std::exception& e) {
      lines.push_back({"Sigma stable", false, e.what()});
    }
  }
  return lines;
}

int cmd_validate(const std::string& config_path, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(config_path, ParseMode::lenient);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  }
  const auto lines = validation_report(cfg);
  bool all = true;
  for (const auto& l : lines) all = all && l.pass;
  if (!opts.quiet) {
    for (const auto& l : lines) {
      out << (l.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(46) << l.check << l.detail << '\n';
    }
    out << (all ? "all checks pass" : "some checks fail") << '\n';
  }
  return all ? kExitOk : kExitValidation;
}

int cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err) {
  const auto dir = prepare_dir(cfg, opts);
  const auto rec = run(cfg.estimator, cfg.model(), opts.replicate);

  auto csv = open_output(dir / "trajectory.csv");
  csv << "replicate,t,agent,mse,scaled_second_moment\n";
  for (const auto& row : error_metrics(rec)) {
    csv << rec.replicate << ',' << row.t << ',' << (row.agent < 0 ? -1L : row.agent + 1) << ','
        << format_double(row.mse) << ',' << format_double(row.scaled_second_moment) << '\n';
  }

  std::ostringstream summary;
  summary << header(cfg) << "replicate: " << rec.replicate << ", horizon: " << cfg.estimator.horizon << '\n';
  const auto& last = rec.snapshots.back();
  summary << "final t = " << last.t << ", network mse = " << format_double(last.network_mse)
          << ", scaled = " << format_double(static_cast<double>(last.t + 1) * last.network_mse) << '\n';
  if (rec.diverged_at) summary << "diverged at t = " << *rec.diverged_at << '\n';
  auto f = open_output(dir / "summary.txt");
  f << summary.str();
  if (!opts.quiet) out << summary.str();

  if (rec.diverged_at && !cfg.baseline) {
    err << "error: the estimator diverged at t = " << *rec.diverged_at << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_ensemble(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                 std::ostream& err) {
  const auto dir = prepare_dir(cfg, opts);

  // Reference line: Tr(S)/N is the limit of the scaled second moment for
  // step exponent 1 only.
  std::optional<double> reference;
  std::string reference_note;
  if (cfg.estimator.delta != 1.0) {
    reference_note = "no reference: the (t+1) scaling applies to delta = 1 only";
  } else {
    try {
      reference = asymptotic_covariance(asymptotic_inputs(cfg)).trace_s_over_n;
    } catch (const std::exception& e) {
      reference_note = std::string("no reference: ") + e.what();
    }
  }

  const auto res = run_ensemble(cfg.estimator, cfg.model(), opts.threads);
  const std::size_t n = cfg.graph.size();

  {
    auto csv = open_output(dir / "ensemble.csv");
    csv << "t,replicates_used,scaled_second_moment,scaled_error_variance,reference_trace_S_over_N\n";
    for (const auto& s : res.snapshots) {
      csv << s.t << ',' << s.replicates_used << ',' << format_double(s.scaled_second_moment) << ','
          << format_double(s.scaled_error_variance) << ','
          << (reference ? format_double(*reference) : std::string()) << '\n';
    }
  }
  {
    auto csv = open_output(dir / "ensemble_agents.csv");
    csv << "t,agent,entry,mean_scaled_error,var_scaled_error\n";
    for (const auto& s : res.snapshots) {
      for (Eigen::Index i = 0; i < s.mean_scaled_error.rows(); ++i) {
        for (Eigen::Index l = 0; l < s.mean_scaled_error.cols(); ++l) {
          csv << s.t << ',' << i + 1 << ',' << l + 1 << ',' << format_double(s.mean_scaled_error(i, l)) << ','
              << format_double(s.var_scaled_error(i, l)) << '\n';
        }
      }
    }
  }
  {
    auto csv = open_output(dir / "ensemble_replicates.csv");
    csv << "replicate,t,mse,diverged\n";
    std::vector<bool> div(cfg.estimator.replicates, false);
    for (auto r : res.diverged) div[r] = true;
    for (std::size_t r = 0; r < res.replicate_mse.size(); ++r) {
      for (std::size_t k = 0; k < res.times.size(); ++k) {
        csv << r << ',' << res.times[k] << ',' << format_double(res.replicate_mse[r][k]) << ','
            << (div[r] ? 1 : 0) << '\n';
      }
    }
  }

  std::ostringstream summary;
  summary << header(cfg) << "replicates: " << cfg.estimator.replicates << ", horizon: " << cfg.estimator.horizon
          << ", agents: " << n << '\n';
  const auto& last = res.snapshots.back();
  summary << "final t = " << last.t << ", replicates used = " << last.replicates_used << '\n'
          << "scaled second moment = " << format_double(last.scaled_second_moment) << '\n'
          << "scaled error variance = " << format_double(last.scaled_error_variance) << '\n';
  if (reference) {
    summary << "reference Tr(S)/N = " << format_double(*reference) << ", ratio = "
            << format_double(last.scaled_second_moment / *reference) << '\n';
  } else {
    summary << reference_note << '\n';
  }
  // Share of replicates whose MSE dropped from the snapshot two decades
  // before the horizon.
  if (res.times.size() >= 2) {
    std::size_t early = 0;
    for (std::size_t k = 0; k < res.times.size(); ++k) {
      if (res.times[k] * 100 <= res.times.back()) early = k;
    }
    std::size_t dropped = 0;
    for (const auto& row : res.replicate_mse) {
      if (row.back() < row[early]) ++dropped;
    }
    summary << "mse(t=" << res.times.back() << ") < mse(t=" << res.times[early] << ") in " << dropped << " of "
            << res.replicate_mse.size() << " replicates\n";
  }
  summary << "diverged replicates: " << res.diverged.size() << '\n';
  auto f = open_output(dir / "summary.txt");
  f << summary.str();
  if (!opts.quiet) out << summary.str();

  if (!res.diverged.empty() && !cfg.baseline) {
    err << "error: " << res.diverged.size() << " replicate(s) diverged\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_asymptotic(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out,
                   std::ostream& err) {
  const auto dir = prepare_dir(cfg, opts);
  const auto model = asymptotic_covariance(asymptotic_inputs(cfg));

  std::ostringstream report;
  report << "N=" << cfg.graph.size() << '\n'
         << "M=" << cfg.estimator.dimension() << '\n'
         << "trace_S_over_N=" << format_double(model.trace_s_over_n) << '\n'
         << "spectral_abscissa=" << format_double(model.spectral_abscissa) << '\n'
         << "sigma_o_sq=" << format_double(model.sigma_o_sq) << '\n'
         << "sigma_c_sq=" << format_double(model.sigma_c_sq) << '\n'
         << "phi_o_prime0=" << format_double(model.phi_o_prime0) << '\n'
         << "phi_c_prime0=" << format_double(model.phi_c_prime0) << '\n'
         << "lyapunov_residual=" << format_double(model.residual) << '\n';
  if (auto closed = closed_form_variance(cfg)) report << "closed_form_sigma_d_sq=" << format_double(*closed) << '\n';
  auto f = open_output(dir / "asymptotic.txt");
  f << report.str();

  if (opts.dump_matrices) {
    write_matrix(dir / "sigma.csv", model.sigma);
    write_matrix(dir / "s0.csv", model.s0);
    write_matrix(dir / "s.csv", model.s);
    write_matrix(dir / "kco.csv", model.kco);
  }
  for (const auto& w : model.warnings) err << "warning: " << w << '\n';

  auto s = open_output(dir / "summary.txt");
  s << header(cfg) << report.str();
  if (!opts.quiet) out << report.str();
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const auto dir = prepare_dir(cfg, opts);
  const auto h = cfg.estimator.obs_vectors.empty() ? 1.0 : cfg.estimator.obs_vectors.front()(0);
  for (const auto& v : cfg.estimator.obs_vectors) {
    if (v(0) != h) throw ParameterError("sweep needs a common observation gain h");
  }
  const auto res = topology_sweep(cfg.graph.size(), cfg.noise_o, cfg.noise_c, cfg.estimator.a, cfg.estimator.b, h);

  auto csv = open_output(dir / "sweep.csv");
  csv << "d,sigma_d_sq,stable\n";
  std::size_t unstable = 0;
  for (const auto& row : res.rows) {
    csv << row.degree << ',' << format_double(row.sigma_d_sq) << ',' << (row.stable ? 1 : 0) << '\n';
    if (!row.stable) ++unstable;
  }

  std::ostringstream summary;
  summary << header(cfg) << "degrees: " << res.rows.size() << ", unstable: " << unstable << '\n';
  if (res.argmin_degree) {
    double best = 0.0;
    for (const auto& row : res.rows) {
      if (row.degree == *res.argmin_degree) best = row.sigma_d_sq;
    }
    summary << "argmin d = " << *res.argmin_degree << '\n' << "min sigma_d_sq = " << format_double(best) << '\n';
  }
  auto f = open_output(dir / "summary.txt");
  f << summary.str();
  if (!opts.quiet) out << summary.str();
  if (!res.argmin_degree) {
    err << "error: every degree is unstable; increase a\n";
    return kExitInstability;
  }
  return kExitOk;
}

int run_command(ExperimentKind command, const std::string& config_path, const CommandOptions& opts,
                std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg = parse_config(config_path, ParseMode::strict);
    const bool compatible = cfg.kind == command ||
                            (command == ExperimentKind::asymptotic && cfg.kind != ExperimentKind::sweep && !cfg.baseline);
    if (!compatible) {
      err << "error: config declares experiment = " << experiment_name(cfg.kind) << ", cannot run "
          << experiment_name(command) << '\n';
      return kExitValidation;
    }
    cfg.kind = command;
    if (opts.seed) cfg.estimator.seed = *opts.seed;
    switch (command) {
      case ExperimentKind::simulate:
        return cmd_simulate(cfg, opts, out, err);
      case ExperimentKind::ensemble:
        return cmd_ensemble(cfg, opts, out, err);
      case ExperimentKind::asymptotic:
        return cmd_asymptotic(cfg, opts, out, err);
      case ExperimentKind::sweep:
        return cmd_sweep(cfg, opts, out, err);
    }
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kExitValidation;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const AssumptionViolation& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InstabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInstability;
  } catch (const DivergentVarianceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitNumeric;
}

}  // namespace nlci
