#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nlci {

// Undirected edge {u, v}, stored with u < v (0-based agent indices).
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  auto operator<=>(const Edge&) const = default;
};

// Undirected, simple, static, unweighted network topology.
//
// Construction validates simplicity (no self-loops, no duplicate edges,
// indices in range) and stores edges in canonical sorted order. Connectivity
// is not enforced here; see validate_connected().
class Graph {
 public:
  Graph() = default;

  // Throws ParameterError on a self-loop, duplicate edge, or out-of-range
  // index. Edge endpoints may be given in either order.
  static Graph from_edges(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const noexcept { return n_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const std::size_t> neighbors(std::size_t i) const noexcept {
    return {adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(std::size_t i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
  std::vector<std::size_t> degrees() const;

  // Common degree if every agent has the same degree.
  std::optional<std::size_t> regular_degree() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> adjacency_;  // sorted neighbor lists, CSR layout
};

// Circulant graph on n agents, i ~ j iff their ring distance is <= k.
// Requires n >= 3 and 1 <= k <= (n - 1) / 2.
Graph ring_khop_graph(std::size_t n, std::size_t k);

Graph complete_graph(std::size_t n);

// Plain-text edge list: one "i j" pair per line with 1-based indices, '#'
// starts a comment. The agent count is n when given, otherwise the largest
// index seen.
Graph read_edge_list(std::istream& in, std::optional<std::size_t> n = std::nullopt);
Graph read_edge_list_file(const std::string& path, std::optional<std::size_t> n = std::nullopt);

// L = D - A.
Eigen::MatrixXd laplacian(const Graph& g);

// Ascending eigenvalues of L from a dense symmetric eigen-solver.
std::vector<double> laplacian_spectrum(const Graph& g);

// Closed-form ascending Laplacian spectrum of ring_khop_graph(n, k):
// lambda_r = sum_{m=1..k} (2 - 2 cos(2 pi m r / n)), r = 0..n-1.
std::vector<double> ring_khop_spectrum(std::size_t n, std::size_t k);

struct ConnectivityReport {
  bool connected = false;
  std::size_t components = 0;
  std::vector<std::size_t> unreachable;  // agents not reached from agent 0
  std::string message;
};

// Breadth-first traversal from agent 0.
ConnectivityReport validate_connected(const Graph& g);

}  // namespace nlci
