#include <doctest.h>

#include <cmath>
#include <random>

#include "gwcrp/errors.hpp"
#include "gwcrp/graph.hpp"
#include "helpers.hpp"

using namespace gwcrp;

namespace {

std::vector<std::vector<bool>> from_edges(
    int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto [a, b] : edges) {
    adj[a][b] = true;
    adj[b][a] = true;
  }
  return adj;
}

}  // namespace

TEST_CASE("graph distances on small hand graphs") {
  SUBCASE("path A-B-C") {
    auto d = graph_distances(from_edges(3, {{0, 1}, {1, 2}}));
    CHECK(d(0, 1) == 1.0);
    CHECK(d(0, 2) == 2.0);
    CHECK(d(0, 0) == 0.0);
  }
  SUBCASE("disconnected components give infinite cross distances") {
    auto d = graph_distances(from_edges(4, {{0, 1}, {2, 3}}));
    CHECK(std::isinf(d(0, 2)));
    CHECK(std::isinf(d(1, 3)));
    CHECK(d(2, 3) == 1.0);
  }
}

TEST_CASE("BFS distances match Floyd-Warshall on random graphs") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 11;  // up to 12 vertices
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (uniform(rng) < 0.25) adj[i][j] = adj[j][i] = true;
      }
    }
    auto bfs = graph_distances(adj);
    auto fw = oracle::floyd_warshall(adj);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        CHECK(bfs(i, j) == fw[i][j]);
      }
    }
  }
}

TEST_CASE("SpatialGraph validates its adjacency input") {
  CHECK_THROWS_AS(SpatialGraph({"a"}, {{true}}), UsageError);  // diagonal
  CHECK_THROWS_AS(SpatialGraph({"a", "b"}, {{false, true}, {false, false}}),
                  UsageError);  // asymmetric
  SpatialGraph g({"a", "b"}, from_edges(2, {{0, 1}}));
  CHECK(g.index_of("b") == 1);
  CHECK_THROWS_AS(g.index_of("zz"), UsageError);
  CHECK(g.distances()(0, 1) == 1.0);
}

TEST_CASE("weight matrix values") {
  Eigen::MatrixXd d(3, 3);
  const double inf = std::numeric_limits<double>::infinity();
  d << 0, 1, 2, 1, 0, inf, 2, inf, 0;

  SUBCASE("h = 0 reduces to the plain CRP (all finite weights 1)") {
    auto w = weight_matrix(d, 0.0);
    CHECK(w.weights(0, 1) == 1.0);
    CHECK(w.weights(0, 2) == 1.0);
    CHECK(w.weights(1, 2) == 0.0);  // disconnected stays 0
  }
  SUBCASE("exponential kernel at d=2, h=1") {
    auto w = weight_matrix(d, 1.0);
    CHECK(w.weights(0, 2) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
    CHECK(w.weights(0, 1) == 1.0);  // adjacent keeps weight 1
  }
  SUBCASE("squared-exponential kernel at d=2, h=1") {
    auto w = weight_matrix(d, 1.0, Kernel::kSquaredExponential);
    CHECK(w.weights(0, 2) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
    CHECK(w.weights(0, 1) == 1.0);
  }
  SUBCASE("negative h is a usage error") {
    CHECK_THROWS_AS(weight_matrix(d, -0.1), UsageError);
  }
}

TEST_CASE("weight monotonicity and limit behavior") {
  Eigen::MatrixXd d(2, 2);
  d << 0, 3, 3, 0;
  double previous = 1.0;
  for (double h : {0.5, 1.0, 2.0, 4.0}) {
    for (Kernel kernel : {Kernel::kExponential, Kernel::kSquaredExponential}) {
      auto w = weight_matrix(d, h, kernel);
      CHECK(w.weights(0, 1) > 0.0);
      CHECK(w.weights(0, 1) <= 1.0);
    }
    auto w = weight_matrix(d, h);
    CHECK(w.weights(0, 1) < previous);  // strictly decreasing in h
    previous = w.weights(0, 1);
  }
  // non-increasing in distance for fixed h
  Eigen::MatrixXd dd(3, 3);
  dd << 0, 2, 5, 2, 0, 2, 5, 2, 0;
  auto w = weight_matrix(dd, 0.7);
  CHECK(w.weights(0, 2) < w.weights(0, 1));

  // h -> infinity approaches the adjacency indicator
  auto wbig = weight_matrix(d, 50.0);
  CHECK(wbig.weights(0, 1) <= 1e-10);
  Eigen::MatrixXd adj_only(2, 2);
  adj_only << 0, 1, 1, 0;
  CHECK(weight_matrix(adj_only, 50.0).weights(0, 1) == 1.0);
}
