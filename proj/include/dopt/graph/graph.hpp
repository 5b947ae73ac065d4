#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dopt/core/types.hpp"

namespace dopt {

using Point2 = Eigen::Vector2d;

class DisconnectedError : public Error {
 public:
  explicit DisconnectedError(std::vector<std::vector<int>> components);
  const std::vector<std::vector<int>>& components() const { return components_; }

 private:
  std::vector<std::vector<int>> components_;
};

/// Undirected, connected communication graph without self-loops.
class CommGraph {
 public:
  CommGraph(int n, std::vector<std::pair<int, int>> edges, std::vector<Point2> positions = {});

  int size() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }
  bool has_edge(int i, int j) const;
  const std::vector<Point2>& positions() const { return positions_; }

  /// Longest shortest-path length in hops.
  int diameter() const;

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<Point2> positions_;
};

/// Connected components of an edge set, each sorted, ordered by first node.
std::vector<std::vector<int>> connected_components(int n, const std::vector<std::pair<int, int>>& edges);

CommGraph range_limited_graph(const std::vector<Point2>& positions, double radius);
CommGraph chain_graph(int n);
CommGraph complete_graph(int n);

/// Uniform positions in the unit square, resampled until the range-limited
/// graph is connected.
CommGraph random_range_graph(int n, double radius, std::uint64_t seed, int max_retries = 1000);

/// w_ij = 1/max(deg_i, deg_j) on edges, w_ii = 1 − Σ_j w_ij.
Matrix metropolis_weights(const CommGraph& g);

/// Second-smallest Laplacian eigenvalue.
double fiedler_value(const CommGraph& g);

void write_edge_list(std::ostream& os, const CommGraph& g);
CommGraph read_edge_list(std::istream& is);

void to_json(nlohmann::json& j, const CommGraph& g);
CommGraph graph_from_json(const nlohmann::json& j);

}  // namespace dopt
