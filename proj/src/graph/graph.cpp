#include "dopt/graph/graph.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dopt {

namespace {

std::string describe(const std::vector<std::vector<int>>& comps) {
  std::ostringstream os;
  os << "graph is disconnected into " << comps.size() << " components:";
  for (const auto& c : comps) {
    os << " {";
    for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
    os << "}";
  }
  return os.str();
}

}  // namespace

DisconnectedError::DisconnectedError(std::vector<std::vector<int>> components)
    : Error(describe(components)), components_(std::move(components)) {}

std::vector<std::vector<int>> connected_components(int n,
                                                   const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (auto [a, b] : edges) {
    const int ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::vector<int>> comps;
  std::vector<int> slot(n, -1);
  for (int v = 0; v < n; ++v) {
    const int r = find(v);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[slot[r]].push_back(v);
  }
  return comps;
}

CommGraph::CommGraph(int n, std::vector<std::pair<int, int>> edges, std::vector<Point2> positions)
    : n_(n), positions_(std::move(positions)) {
  if (n < 1) throw ArgumentError("graph needs at least one node");
  if (!positions_.empty() && static_cast<int>(positions_.size()) != n)
    throw ArgumentError("position count differs from node count");
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw ArgumentError("edge endpoint out of range");
    if (a == b) throw ArgumentError("self-loop at node " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  auto comps = connected_components(n, edges);
  if (comps.size() > 1) throw DisconnectedError(std::move(comps));
  edges_ = std::move(edges);
  adj_.assign(n, {});
  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
}

bool CommGraph::has_edge(int i, int j) const {
  const auto& nb = adj_[i];
  return std::binary_search(nb.begin(), nb.end(), j);
}

int CommGraph::diameter() const {
  int best = 0;
  for (int s = 0; s < n_; ++s) {
    std::vector<int> dist(n_, -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj_[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          best = std::max(best, dist[w]);
          q.push(w);
        }
      }
    }
  }
  return best;
}

CommGraph range_limited_graph(const std::vector<Point2>& positions, double radius) {
  if (!(radius > 0.0)) throw ArgumentError("radius must be positive");
  const int n = static_cast<int>(positions.size());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (positions[i] - positions[j]).norm();
      if (d == 0.0) throw ArgumentError("positions must be distinct");
      if (d <= radius) edges.emplace_back(i, j);
    }
  }
  return CommGraph(n, std::move(edges), positions);
}

CommGraph chain_graph(int n) {
  if (n < 2) throw ArgumentError("chain graph needs at least two nodes");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return CommGraph(n, std::move(edges));
}

CommGraph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return CommGraph(n, std::move(edges));
}

CommGraph random_range_graph(int n, double radius, std::uint64_t seed, int max_retries) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = Point2(u(rng), u(rng));
    try {
      return range_limited_graph(pts, radius);
    } catch (const DisconnectedError&) {
    }
  }
  throw Error("no connected range-limited graph after " + std::to_string(max_retries) + " draws");
}

Matrix metropolis_weights(const CommGraph& g) {
  const int n = g.size();
  Matrix w = Matrix::Zero(n, n);
  for (auto [a, b] : g.edges()) {
    const double v = 1.0 / std::max(g.degree(a), g.degree(b));
    w(a, b) = v;
    w(b, a) = v;
  }
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j : g.neighbors(i)) s += w(i, j);
    w(i, i) = std::max(0.0, 1.0 - s);
  }
  return w;
}

double fiedler_value(const CommGraph& g) {
  const int n = g.size();
  if (n < 2) return 0.0;
  Matrix lap = Matrix::Zero(n, n);
  for (auto [a, b] : g.edges()) {
    lap(a, b) -= 1.0;
    lap(b, a) -= 1.0;
    lap(a, a) += 1.0;
    lap(b, b) += 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(lap, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[1];
}

void write_edge_list(std::ostream& os, const CommGraph& g) {
  os << g.size() << '\n';
  for (auto [a, b] : g.edges()) os << a << ' ' << b << '\n';
}

CommGraph read_edge_list(std::istream& is) {
  int n = 0;
  if (!(is >> n)) throw ArgumentError("edge list: missing node count");
  std::vector<std::pair<int, int>> edges;
  int a = 0, b = 0;
  while (is >> a >> b) edges.emplace_back(a, b);
  if (!is.eof()) throw ArgumentError("edge list: malformed pair");
  return CommGraph(n, std::move(edges));
}

void to_json(nlohmann::json& j, const CommGraph& g) {
  j = nlohmann::json::object();
  j["n"] = g.size();
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : g.edges()) edges.push_back({a, b});
  j["edges"] = edges;
  if (!g.positions().empty()) {
    nlohmann::json pos = nlohmann::json::array();
    for (const auto& p : g.positions()) pos.push_back({p.x(), p.y()});
    j["positions"] = pos;
  }
}

CommGraph graph_from_json(const nlohmann::json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  std::vector<Point2> pos;
  if (j.contains("positions"))
    for (const auto& p : j.at("positions")) pos.emplace_back(p[0].get<double>(), p[1].get<double>());
  return CommGraph(j.at("n").get<int>(), std::move(edges), std::move(pos));
}

}  // namespace dopt
