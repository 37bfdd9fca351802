#include "nlci/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <sstream>

#include "nlci/errors.hpp"

namespace nlci {

Graph Graph::from_edges(std::size_t n, std::vector<Edge> edges) {
  if (n == 0) throw ParameterError("graph must have at least one agent");
  for (auto& e : edges) {
    if (e.u == e.v) throw ParameterError("self-loop at agent " + std::to_string(e.u + 1));
    if (e.u >= n || e.v >= n) {
      throw ParameterError("edge {" + std::to_string(e.u + 1) + "," + std::to_string(e.v + 1) +
                           "} references an agent outside 1.." + std::to_string(n));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end()); dup != edges.end()) {
    throw ParameterError("duplicate edge {" + std::to_string(dup->u + 1) + "," +
                         std::to_string(dup->v + 1) + "}");
  }

  Graph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.offsets_.assign(n + 1, 0);
  for (const auto& e : g.edges_) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
  g.adjacency_.resize(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.adjacency_[fill[e.u]++] = e.v;
    g.adjacency_[fill[e.v]++] = e.u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
  }
  return g;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = degree(i);
  return d;
}

std::optional<std::size_t> Graph::regular_degree() const noexcept {
  if (n_ == 0) return std::nullopt;
  const std::size_t d = degree(0);
  for (std::size_t i = 1; i < n_; ++i) {
    if (degree(i) != d) return std::nullopt;
  }
  return d;
}

Graph ring_khop_graph(std::size_t n, std::size_t k) {
  if (n < 3) throw ParameterError("ring_khop_graph needs n >= 3, got " + std::to_string(n));
  if (k < 1 || k > (n - 1) / 2) {
    throw ParameterError("hop radius k=" + std::to_string(k) + " outside 1.." +
                         std::to_string((n - 1) / 2) + " for n=" + std::to_string(n));
  }
  std::vector<Edge> edges;
  edges.reserve(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 1; m <= k; ++m) {
      const std::size_t j = (i + m) % n;
      // For even n and k = n/2 the pair would appear twice; k <= (n-1)/2 rules
      // that out.
      edges.push_back({std::min(i, j), std::max(i, j)});
    }
  }
  return Graph::from_edges(n, std::move(edges));
}

Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
  }
  return Graph::from_edges(n, std::move(edges));
}

Graph read_edge_list(std::istream& in, std::optional<std::size_t> n) {
  std::vector<Edge> edges;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    if (!(fields >> i)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParameterError("edge list line " + std::to_string(line_no) + ": expected \"i j\"");
    }
    std::string rest;
    if (!(fields >> j) || (fields >> rest)) {
      throw ParameterError("edge list line " + std::to_string(line_no) + ": expected \"i j\"");
    }
    if (i < 1 || j < 1) {
      throw ParameterError("edge list line " + std::to_string(line_no) +
                           ": agent indices are 1-based");
    }
    edges.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)});
    max_index = std::max({max_index, static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
  }
  return Graph::from_edges(n.value_or(max_index), std::move(edges));
}

Graph read_edge_list_file(const std::string& path, std::optional<std::size_t> n) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open edge list '" + path + "'");
  return read_edge_list(in, n);
}

Eigen::MatrixXd laplacian(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    lap(u, v) = -1.0;
    lap(v, u) = -1.0;
    lap(u, u) += 1.0;
    lap(v, v) += 1.0;
  }
  return lap;
}

std::vector<double> laplacian_spectrum(const Graph& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(g), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("Laplacian eigen-solver did not converge");
  const auto& ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> ring_khop_spectrum(std::size_t n, std::size_t k) {
  if (n < 3 || k < 1 || k > (n - 1) / 2) {
    throw ParameterError("ring_khop_spectrum: invalid (n, k)");
  }
  std::vector<double> cos_table(n);
  for (std::size_t m = 0; m < n; ++m) {
    cos_table[m] = std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
  }
  std::vector<double> lambda(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t m = 1; m <= k; ++m) acc += 2.0 - 2.0 * cos_table[(m * r) % n];
    lambda[r] = acc;
  }
  std::sort(lambda.begin(), lambda.end());
  return lambda;
}

ConnectivityReport validate_connected(const Graph& g) {
  ConnectivityReport report;
  const std::size_t n = g.size();
  if (n == 0) {
    report.message = "graph has no agents";
    return report;
  }
  std::vector<std::size_t> component(n, n);
  std::size_t count = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (component[root] != n) continue;
    std::queue<std::size_t> frontier;
    frontier.push(root);
    component[root] = count;
    while (!frontier.empty()) {
      const std::size_t i = frontier.front();
      frontier.pop();
      for (std::size_t j : g.neighbors(i)) {
        if (component[j] == n) {
          component[j] = count;
          frontier.push(j);
        }
      }
    }
    ++count;
  }
  report.components = count;
  report.connected = count == 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (component[i] != 0) report.unreachable.push_back(i);
  }
  if (report.connected) {
    report.message = "connected";
  } else {
    report.message = "disconnected: " + std::to_string(count) + " components, " +
                     std::to_string(report.unreachable.size()) + " agents unreachable from agent 1";
  }
  return report;
}

}  // namespace nlci
