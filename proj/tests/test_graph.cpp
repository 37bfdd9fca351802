#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nlci/errors.hpp"
#include "nlci/graph.hpp"

using namespace nlci;
using Catch::Approx;

TEST_CASE("ring_khop_graph builds a 2k-regular circulant") {
  const auto g = ring_khop_graph(10, 1);
  CHECK(g.size() == 10);
  CHECK(g.edges().size() == 10);
  CHECK(g.regular_degree() == 2u);
  const auto n0 = g.neighbors(0);
  CHECK(std::vector<std::size_t>(n0.begin(), n0.end()) == std::vector<std::size_t>{1, 9});

  for (std::size_t n : {5u, 11u, 21u}) {
    for (std::size_t k = 1; k <= (n - 1) / 2; ++k) {
      const auto h = ring_khop_graph(n, k);
      CHECK(h.regular_degree() == 2 * k);
      CHECK(h.edges().size() == n * k);
    }
  }
  // k = (N-1)/2 is the complete graph.
  CHECK(ring_khop_graph(7, 3).edges().size() == complete_graph(7).edges().size());
}

TEST_CASE("ring_khop_graph rejects bad parameters") {
  CHECK_THROWS_AS(ring_khop_graph(2, 1), ParameterError);
  CHECK_THROWS_AS(ring_khop_graph(10, 0), ParameterError);
  CHECK_THROWS_AS(ring_khop_graph(10, 5), ParameterError);
  CHECK_NOTHROW(ring_khop_graph(11, 5));
}

TEST_CASE("from_edges validates and canonicalizes") {
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 0}}), ParameterError);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 1}, {1, 0}}), ParameterError);
  CHECK_THROWS_AS(Graph::from_edges(3, {{0, 3}}), ParameterError);
  const auto g = Graph::from_edges(3, {{2, 1}, {1, 0}});
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0].u == 0);
  CHECK(g.edges()[0].v == 1);
  CHECK(g.edges()[1].u == 1);
  CHECK(g.edges()[1].v == 2);
  CHECK(g.degrees() == std::vector<std::size_t>{1, 2, 1});
  CHECK_FALSE(g.regular_degree().has_value());
}

TEST_CASE("edge list reader") {
  std::istringstream in("# triangle plus tail\n1 2\n2 3 # inline\n\n3 1\n3 4\n");
  const auto g = read_edge_list(in);
  CHECK(g.size() == 4);
  CHECK(g.edges().size() == 4);
  std::istringstream bad("1 x\n");
  CHECK_THROWS_AS(read_edge_list(bad), ParameterError);
  std::istringstream zero("0 1\n");
  CHECK_THROWS_AS(read_edge_list(zero), ParameterError);
  std::istringstream isolated("1 2\n");
  CHECK(read_edge_list(isolated, 3).size() == 3);
}

TEST_CASE("Laplacian of the 4-cycle") {
  const auto l = laplacian(ring_khop_graph(4, 1));
  Eigen::MatrixXd expected(4, 4);
  expected << 2, -1, 0, -1, -1, 2, -1, 0, 0, -1, 2, -1, -1, 0, -1, 2;
  CHECK(l.isApprox(expected));
  const auto spec = laplacian_spectrum(ring_khop_graph(4, 1));
  const std::vector<double> want{0, 2, 2, 4};
  for (std::size_t i = 0; i < 4; ++i) CHECK(spec[i] == Approx(want[i]).margin(1e-12));
}

TEST_CASE("closed-form circulant spectrum matches the dense eigen-solver") {
  for (std::size_t n : {3u, 5u, 10u, 11u, 21u, 40u}) {
    for (std::size_t k = 1; k <= (n - 1) / 2; ++k) {
      const auto dense = laplacian_spectrum(ring_khop_graph(n, k));
      const auto closed = ring_khop_spectrum(n, k);
      REQUIRE(dense.size() == closed.size());
      for (std::size_t i = 0; i < n; ++i) CHECK(closed[i] == Approx(dense[i]).margin(1e-10));
    }
  }
}

TEST_CASE("spectrum properties: lambda_1 = 0, trace = sum of degrees, complete graph") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng() % 30;
    const std::size_t k = 1 + rng() % ((n - 1) / 2);
    const auto spec = ring_khop_spectrum(n, k);
    CHECK(spec.front() == Approx(0.0).margin(1e-12));
    double trace = 0.0;
    for (double x : spec) trace += x;
    CHECK(trace == Approx(static_cast<double>(n * 2 * k)).epsilon(1e-12));
    CHECK(spec[1] > 1e-9);  // connected
  }
  const auto kn = laplacian_spectrum(complete_graph(6));
  for (std::size_t i = 1; i < 6; ++i) CHECK(kn[i] == Approx(6.0));
}

TEST_CASE("connectivity check") {
  CHECK(validate_connected(ring_khop_graph(9, 2)).connected);
  const auto split = Graph::from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  const auto rep = validate_connected(split);
  CHECK_FALSE(rep.connected);
  CHECK(rep.components == 2);
  CHECK(rep.unreachable == std::vector<std::size_t>{3, 4, 5});
  CHECK_FALSE(rep.message.empty());
  CHECK(validate_connected(Graph::from_edges(1, {})).connected);
  // lambda_2 = 0 exactly when disconnected
  CHECK(laplacian_spectrum(split)[1] == Approx(0.0).margin(1e-12));
}
