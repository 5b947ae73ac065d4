#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dopt/graph/graph.hpp"

using namespace dopt;

namespace {

// Breadth-first hop distances.
int bfs_diameter(const CommGraph& g) {
  int best = 0;
  for (int s = 0; s < g.size(); ++s) {
    std::vector<int> dist(g.size(), -1);
    std::vector<int> queue{s};
    dist[s] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (int j : g.neighbors(queue[h]))
        if (dist[j] < 0) dist[j] = dist[queue[h]] + 1, queue.push_back(j);
    best = std::max(best, *std::max_element(dist.begin(), dist.end()));
  }
  return best;
}

}  // namespace

TEST_CASE("range-limited graph") {
  SUBCASE("two points within range") {
    const auto g = range_limited_graph({Point2(0, 0), Point2(1, 0)}, 2.0);
    CHECK(g.edge_count() == 1);
  }
  SUBCASE("two points out of range") {
    try {
      range_limited_graph({Point2(0, 0), Point2(3, 0)}, 2.0);
      FAIL("expected a disconnected error");
    } catch (const DisconnectedError& e) {
      CHECK(e.components().size() == 2);
    }
  }
  SUBCASE("unit-spaced line") {
    std::vector<Point2> pts;
    for (int i = 0; i < 5; ++i) pts.emplace_back(i, 0.0);
    const auto g = range_limited_graph(pts, 1.5);
    CHECK(g.edge_count() == 4);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        CHECK(g.has_edge(i, j) == ((pts[i] - pts[j]).norm() <= 1.5));
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(range_limited_graph({Point2(0, 0), Point2(1, 0)}, 0.0), ArgumentError);
    CHECK_THROWS_AS(range_limited_graph({Point2(0, 0), Point2(0, 0)}, 1.0), ArgumentError);
  }
}

TEST_CASE("chain graph") {
  CHECK(chain_graph(2).edge_count() == 1);
  const auto g4 = chain_graph(4);
  CHECK(g4.edges() == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
  const auto g10 = chain_graph(10);
  CHECK(g10.edge_count() == 9);
  CHECK(g10.diameter() == 9);
  CHECK(bfs_diameter(g10) == 9);
  for (int i = 0; i < 10; ++i) CHECK(g10.degree(i) <= 2);
  CHECK_THROWS_AS(chain_graph(1), ArgumentError);
}

TEST_CASE("self loops and disconnection are rejected") {
  CHECK_THROWS_AS(CommGraph(2, {{0, 0}}), ArgumentError);
  CHECK_THROWS_AS(CommGraph(3, {{0, 1}}), DisconnectedError);
}

TEST_CASE("Metropolis weights on small graphs") {
  SUBCASE("3-node chain") {
    const Matrix w = metropolis_weights(chain_graph(3));
    CHECK(w(0, 1) == 0.5);
    CHECK(w(1, 2) == 0.5);
    CHECK(w(0, 0) == 0.5);
    CHECK(w(2, 2) == 0.5);
    CHECK(w(1, 1) == 0.0);
    CHECK(w(0, 2) == 0.0);
  }
  SUBCASE("triangle") {
    const Matrix w = metropolis_weights(complete_graph(3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(w(i, j) == (i == j ? 0.0 : 0.5));
  }
  SUBCASE("2-node graph follows the degree formula") {
    const Matrix w = metropolis_weights(chain_graph(2));
    CHECK(w(0, 1) == 1.0);
    CHECK(w(0, 0) == 0.0);
  }
}

TEST_CASE("Metropolis weights are doubly stochastic over random graphs") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 5 + static_cast<int>(seed % 26);
    const auto g = random_range_graph(n, 0.45, seed);
    const Matrix w = metropolis_weights(g);
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((w.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((w.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(w.minCoeff() >= 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && !g.has_edge(i, j)) CHECK(w(i, j) == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(w);
    const Vector ev = es.eigenvalues();
    CHECK(ev(n - 1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ev(n - 2) < 1.0 - 1e-9);
    CHECK(ev(0) > -1.0 + 1e-9);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("random range graphs are connected and seed-determined") {
  const auto a = random_range_graph(15, 0.35, 42);
  const auto b = random_range_graph(15, 0.35, 42);
  CHECK(a.edges() == b.edges());
  CHECK(connected_components(a.size(), a.edges()).size() == 1);
  CHECK_THROWS_AS(random_range_graph(30, 0.01, 1, 5), Error);
}

TEST_CASE("Fiedler value") {
  // Path P_n: 2 − 2cos(π/n).
  CHECK(fiedler_value(chain_graph(6)) == doctest::Approx(2.0 - 2.0 * std::cos(M_PI / 6.0)).epsilon(1e-10));
  // K_n: n.
  CHECK(fiedler_value(complete_graph(5)) == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("edge list and json round trips") {
  const auto g = random_range_graph(10, 0.5, 3);
  std::stringstream ss;
  write_edge_list(ss, g);
  std::string first;
  std::getline(ss, first);
  CHECK(first == "10");
  ss.seekg(0);
  const auto back = read_edge_list(ss);
  CHECK(back.size() == 10);
  CHECK(back.edges() == g.edges());
  nlohmann::json j = g;
  CHECK(graph_from_json(j).edges() == g.edges());
  std::stringstream bad("3\n0 1\n");
  CHECK_THROWS_AS(read_edge_list(bad), DisconnectedError);
}
