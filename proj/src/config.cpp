#include "nlci/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nlci/errors.hpp"

namespace nlci {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Drops '#' comments (the INI reader only knows ';' at line start).
std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find_first_of("#;"); pos != std::string::npos) line.erase(pos);
    out << line << '\n';
  }
  return out.str();
}

class Reader {
 public:
  Reader(const pt::ptree& root, std::vector<std::string>& errors) : root_(root), errors_(errors) {
    for (const auto& [name, child] : root_) {
      if (child.empty()) {
        top_keys_.insert(name);
      } else {
        sections_.insert(name);
      }
    }
  }

  const pt::ptree* section(const std::string& name) {
    used_sections_.insert(name);
    auto it = root_.find(name);
    if (it == root_.not_found() || it->second.empty()) return nullptr;
    return &it->second;
  }

  std::optional<std::string> raw(const std::string& sec, const std::string& key) {
    used_keys_[sec].insert(key);
    const pt::ptree* node = sec.empty() ? &root_ : section(sec);
    if (node == nullptr) return std::nullopt;
    auto it = node->find(key);
    if (it == node->not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  std::string where(const std::string& sec, const std::string& key) const {
    return sec.empty() ? key : sec + "." + key;
  }

  std::optional<std::string> text(const std::string& sec, const std::string& key, bool required) {
    auto v = raw(sec, key);
    if (!v && required) errors_.push_back("missing key " + where(sec, key));
    return v;
  }

  std::optional<double> number(const std::string& sec, const std::string& key, bool required) {
    auto v = text(sec, key, required);
    if (!v) return std::nullopt;
    double out = 0.0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
      errors_.push_back(where(sec, key) + ": expected a number, got '" + *v + "'");
      return std::nullopt;
    }
    return out;
  }

  std::optional<std::uint64_t> integer(const std::string& sec, const std::string& key, bool required) {
    auto v = text(sec, key, required);
    if (!v) return std::nullopt;
    std::uint64_t out = 0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
      errors_.push_back(where(sec, key) + ": expected a nonnegative integer, got '" + *v + "'");
      return std::nullopt;
    }
    return out;
  }

  std::optional<bool> boolean(const std::string& sec, const std::string& key) {
    auto v = text(sec, key, false);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    errors_.push_back(where(sec, key) + ": expected true/false, got '" + *v + "'");
    return std::nullopt;
  }

  std::optional<std::vector<double>> numbers(const std::string& sec, const std::string& key, bool required) {
    auto v = text(sec, key, required);
    if (!v) return std::nullopt;
    return parse_list(*v, where(sec, key));
  }

  std::optional<std::vector<double>> parse_list(const std::string& value, const std::string& label) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      double x = 0.0;
      auto res = std::from_chars(item.data(), item.data() + item.size(), x);
      if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
        errors_.push_back(label + ": expected a comma-separated list of numbers, got '" + value + "'");
        return std::nullopt;
      }
      out.push_back(x);
    }
    if (out.empty()) {
      errors_.push_back(label + ": empty list");
      return std::nullopt;
    }
    return out;
  }

  // Keys of `sec` starting with `prefix`.
  std::vector<std::pair<std::string, std::string>> prefixed(const std::string& sec, const std::string& prefix) {
    std::vector<std::pair<std::string, std::string>> out;
    const pt::ptree* node = section(sec);
    if (node == nullptr) return out;
    for (const auto& [name, child] : *node) {
      if (name.rfind(prefix, 0) == 0) {
        used_keys_[sec].insert(name);
        out.emplace_back(name, trim(child.data()));
      }
    }
    return out;
  }

  void report_unknown() {
    for (const auto& k : top_keys_) {
      if (!used_keys_[""].count(k)) errors_.push_back("unknown key " + k);
    }
    for (const auto& s : sections_) {
      if (!used_sections_.count(s)) {
        errors_.push_back("unknown section [" + s + "]");
        continue;
      }
      for (const auto& [name, child] : root_.find(s)->second) {
        if (!used_keys_[s].count(name)) errors_.push_back("unknown key " + s + "." + name);
      }
    }
  }

 private:
  const pt::ptree& root_;
  std::vector<std::string>& errors_;
  std::set<std::string> top_keys_;
  std::set<std::string> sections_;
  std::set<std::string> used_sections_;
  std::map<std::string, std::set<std::string>> used_keys_;
};

std::optional<NoiseModel> read_noise(Reader& r, const std::string& sec, std::vector<std::string>& errors) {
  auto family = r.text(sec, "family", true);
  auto beta = r.number(sec, "beta", false);
  auto sigma = r.number(sec, "sigma", false);
  if (!family) return std::nullopt;
  try {
    if (*family == "eq3") {
      if (!beta) {
        errors.push_back("missing key " + sec + ".beta");
        return std::nullopt;
      }
      return NoiseModel::heavy_tail(*beta);
    }
    if (*family == "gaussian") {
      if (!sigma) {
        errors.push_back("missing key " + sec + ".sigma");
        return std::nullopt;
      }
      return NoiseModel::gaussian(*sigma);
    }
    errors.push_back(sec + ".family must be eq3 or gaussian, got '" + *family + "'");
  } catch (const ParameterError& e) {
    errors.push_back(sec + ": " + e.what());
  }
  return std::nullopt;
}

std::optional<Nonlinearity> read_nonlinearity(Reader& r, const std::string& sec,
                                              std::vector<std::string>& errors) {
  auto kind = r.text(sec, "kind", true);
  auto tau = r.number(sec, "tau", false);
  auto levels = r.numbers(sec, "levels", false);
  if (!kind) return std::nullopt;
  try {
    if (*kind == "sign") return Nonlinearity::sign();
    if (*kind == "identity") return Nonlinearity::identity();
    if (*kind == "clip") {
      if (!tau) {
        errors.push_back("missing key " + sec + ".tau");
        return std::nullopt;
      }
      return Nonlinearity::clip(*tau);
    }
    if (*kind == "quantizer") {
      if (!levels) {
        errors.push_back("missing key " + sec + ".levels");
        return std::nullopt;
      }
      return Nonlinearity::quantizer(*levels);
    }
    errors.push_back(sec + ".kind must be sign, clip, quantizer or identity, got '" + *kind + "'");
  } catch (const ParameterError& e) {
    errors.push_back(sec + ": " + e.what());
  }
  return std::nullopt;
}

}  // namespace

std::string_view experiment_name(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::simulate:
      return "simulate";
    case ExperimentKind::ensemble:
      return "ensemble";
    case ExperimentKind::asymptotic:
      return "asymptotic";
    case ExperimentKind::sweep:
      break;
  }
  return "sweep";
}

ExperimentConfig parse_config(const std::string& path, ParseMode mode) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config_text(buffer.str(), dir, mode);
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir, ParseMode mode) {
  pt::ptree root;
  try {
    std::istringstream in(strip_comments(text));
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("malformed config: ") + e.what()});
  }

  std::vector<std::string> errors;
  Reader r(root, errors);
  ExperimentConfig cfg;

  // Experiment kind.
  bool kind_ok = false;
  if (auto kind = r.text("", "experiment", true)) {
    if (*kind == "simulate") {
      cfg.kind = ExperimentKind::simulate;
      kind_ok = true;
    } else if (*kind == "ensemble") {
      cfg.kind = ExperimentKind::ensemble;
      kind_ok = true;
    } else if (*kind == "asymptotic") {
      cfg.kind = ExperimentKind::asymptotic;
      kind_ok = true;
    } else if (*kind == "sweep") {
      cfg.kind = ExperimentKind::sweep;
      kind_ok = true;
    } else {
      errors.push_back("experiment must be simulate, ensemble, asymptotic or sweep, got '" + *kind + "'");
    }
  }
  cfg.baseline = r.boolean("", "baseline").value_or(false);
  const bool runs_estimator = kind_ok && (cfg.kind == ExperimentKind::simulate || cfg.kind == ExperimentKind::ensemble);

  // Graph.
  bool graph_ok = false;
  {
    auto family = r.text("graph", "family", true);
    auto n = r.integer("graph", "n", false);
    auto k = r.integer("graph", "k", false);
    auto path = r.text("graph", "path", false);
    if (family) {
      cfg.graph_spec.family = *family;
      cfg.graph_spec.n = n.value_or(0);
      cfg.graph_spec.k = k.value_or(0);
      try {
        if (*family == "ring_khop") {
          if (!n) errors.push_back("missing key graph.n");
          if (!k && !(kind_ok && cfg.kind == ExperimentKind::sweep)) errors.push_back("missing key graph.k");
          if (n && (k || cfg.kind == ExperimentKind::sweep)) {
            cfg.graph = ring_khop_graph(*n, k.value_or(1));
            graph_ok = true;
          }
        } else if (*family == "complete") {
          if (!n) {
            errors.push_back("missing key graph.n");
          } else {
            if (*n < 1) throw ParameterError("graph.n must be at least 1");
            cfg.graph = complete_graph(*n);
            graph_ok = true;
          }
        } else if (*family == "edge_list") {
          if (!path) {
            errors.push_back("missing key graph.path");
          } else {
            std::filesystem::path p(*path);
            if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
            cfg.graph_spec.path = p.string();
            if (!std::filesystem::exists(p)) {
              errors.push_back("graph.path: file '" + p.string() + "' does not exist");
            } else {
              cfg.graph = read_edge_list_file(p.string(), n ? std::optional<std::size_t>(*n) : std::nullopt);
              graph_ok = true;
            }
          }
        } else {
          errors.push_back("graph.family must be ring_khop, complete or edge_list, got '" + *family + "'");
        }
      } catch (const ParameterError& e) {
        errors.push_back(std::string("graph: ") + e.what());
      }
    }
    if (graph_ok) {
      const auto conn = validate_connected(cfg.graph);
      if (!conn.connected) {
        const std::string msg = "connectivity: network is not connected: " + conn.message;
        if (mode == ParseMode::strict) {
          errors.push_back(msg);
        } else {
          cfg.findings.push_back(msg);
        }
      }
    }
  }

  // Noise and nonlinearities.
  auto noise_o = read_noise(r, "noise.observation", errors);
  auto noise_c = read_noise(r, "noise.communication", errors);
  auto psi_c = read_nonlinearity(r, "nonlinearity.consensus", errors);
  auto psi_o = read_nonlinearity(r, "nonlinearity.observation", errors);
  if (noise_o) cfg.noise_o = *noise_o;
  if (noise_c) cfg.noise_c = *noise_c;
  if (psi_c) cfg.psi_c = *psi_c;
  if (psi_o) cfg.psi_o = *psi_o;
  for (const auto& [label, nl] : {std::pair{"consensus", psi_c}, std::pair{"observation", psi_o}}) {
    if (!nl || nl->is_compliant()) continue;
    const std::string msg = std::string("boundedness: the ") + label +
                            " nonlinearity " + nl->describe() + " is unbounded";
    if (mode == ParseMode::lenient) {
      cfg.findings.push_back(msg);
    } else if (!cfg.baseline || !runs_estimator) {
      errors.push_back(msg + "; the identity map is only allowed with baseline = true in simulate/ensemble");
    }
  }
  if (cfg.baseline && kind_ok && !runs_estimator) {
    errors.push_back("baseline = true is only meaningful for simulate and ensemble experiments");
  }

  // Estimator block.
  auto& est = cfg.estimator;
  if (auto a = r.number("estimator", "a", true)) est.a = *a;
  if (auto b = r.number("estimator", "b", true)) est.b = *b;
  if (!(est.a > 0.0)) errors.push_back("estimator.a must be positive");
  if (!(est.b > 0.0)) errors.push_back("estimator.b must be positive");
  if (auto delta = r.number("estimator", "delta", false)) est.delta = *delta;
  if (!(est.delta > 0.5 && est.delta <= 1.0)) {
    std::ostringstream msg;
    msg << "estimator.delta = " << est.delta
        << " is outside (0.5, 1], the step-size exponent range for almost sure convergence";
    errors.push_back(msg.str());
  }
  if (kind_ok && cfg.kind == ExperimentKind::sweep && est.delta != 1.0) {
    errors.push_back("sweep uses the delta = 1 asymptotic covariance; set estimator.delta = 1");
  }
  if (auto horizon = r.integer("estimator", "horizon", runs_estimator)) {
    est.horizon = *horizon;
    if (*horizon == 0) errors.push_back("estimator.horizon must be at least 1");
  }
  if (auto reps = r.integer("estimator", "replicates", false)) {
    est.replicates = *reps;
    if (*reps == 0) errors.push_back("estimator.replicates must be at least 1");
  }
  if (kind_ok && cfg.kind == ExperimentKind::ensemble && est.replicates < 2) {
    errors.push_back("ensemble needs estimator.replicates >= 2");
  }
  if (auto seed = r.integer("estimator", "seed", false)) est.seed = *seed;

  std::optional<std::vector<double>> theta = r.numbers("estimator", "theta_star", runs_estimator);
  std::optional<std::vector<double>> h_common = r.numbers("estimator", "h", false);
  std::size_t dim = theta ? theta->size() : (h_common ? h_common->size() : 1);
  if (theta) {
    est.theta_star = Eigen::Map<const Eigen::VectorXd>(theta->data(), static_cast<Eigen::Index>(theta->size()));
  } else {
    est.theta_star = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
  }
  Eigen::VectorXd h_default = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
  if (h_common) {
    if (h_common->size() != dim) {
      errors.push_back("estimator.h must have " + std::to_string(dim) + " entries (dimension of theta_star)");
    } else {
      h_default = Eigen::Map<const Eigen::VectorXd>(h_common->data(), static_cast<Eigen::Index>(dim));
    }
  }
  const std::size_t agents = graph_ok ? cfg.graph.size() : 0;
  est.obs_vectors.assign(agents, h_default);
  for (const auto& [key, value] : r.prefixed("estimator", "h.")) {
    const std::string index_text = key.substr(2);
    std::size_t index = 0;
    auto res = std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
    if (res.ec != std::errc() || res.ptr != index_text.data() + index_text.size() || index < 1) {
      errors.push_back("estimator." + key + ": expected h.<agent> with a 1-based agent index");
      continue;
    }
    if (graph_ok && index > agents) {
      errors.push_back("estimator." + key + ": agent index beyond N = " + std::to_string(agents));
      continue;
    }
    auto values = r.parse_list(value, "estimator." + key);
    if (!values) continue;
    if (values->size() != dim) {
      errors.push_back("estimator." + key + " must have " + std::to_string(dim) + " entries");
      continue;
    }
    if (graph_ok) {
      est.obs_vectors[index - 1] = Eigen::Map<const Eigen::VectorXd>(values->data(), static_cast<Eigen::Index>(dim));
    }
  }
  for (std::size_t i = 0; i < est.obs_vectors.size(); ++i) {
    if (est.obs_vectors[i].squaredNorm() == 0.0) {
      errors.push_back("h_" + std::to_string(i + 1) + " is the zero vector; observation vectors must be nonzero");
    }
  }
  if (kind_ok && cfg.kind == ExperimentKind::sweep && dim != 1) {
    errors.push_back("sweep needs a scalar parameter (M = 1)");
  }

  if (auto init = r.text("estimator", "initial", false); init && graph_ok) {
    if (*init == "theta_star") {
      est.initial_state = StateMatrix(static_cast<Eigen::Index>(agents), static_cast<Eigen::Index>(dim));
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(agents); ++i) est.initial_state->row(i) = est.theta_star.transpose();
    } else if (*init != "zero") {
      if (auto values = r.parse_list(*init, "estimator.initial")) {
        if (values->size() != dim) {
          errors.push_back("estimator.initial must be zero, theta_star or " + std::to_string(dim) + " numbers");
        } else {
          est.initial_state = StateMatrix(static_cast<Eigen::Index>(agents), static_cast<Eigen::Index>(dim));
          for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(agents); ++i) {
            for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(dim); ++l) (*est.initial_state)(i, l) = (*values)[static_cast<std::size_t>(l)];
          }
        }
      }
    }
  }
  if (auto snaps = r.numbers("estimator", "snapshots", false)) {
    for (double t : *snaps) {
      if (t < 1 || t != std::floor(t)) {
        errors.push_back("estimator.snapshots must be positive integers");
        break;
      }
      est.extra_snapshots.push_back(static_cast<std::size_t>(t));
    }
  }

  // Sweep-specific requirements.
  if (kind_ok && cfg.kind == ExperimentKind::sweep) {
    if (cfg.graph_spec.family != "ring_khop") errors.push_back("sweep needs graph.family = ring_khop");
    if (cfg.graph_spec.n % 2 == 0) errors.push_back("sweep needs an odd graph.n");
    if ((psi_c && psi_c->kind() != NonlinearityKind::sign) || (psi_o && psi_o->kind() != NonlinearityKind::sign)) {
      errors.push_back("sweep is defined for sign nonlinearities on both channels");
    }
  }

  // Output.
  if (auto dir = r.text("output", "directory", false)) cfg.output_dir = *dir;
  if (auto formats = r.text("output", "formats", false); formats && *formats != "csv") {
    errors.push_back("output.formats: only csv is supported");
  }

  r.report_unknown();
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

}  // namespace nlci
