#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dopt/core/executor.hpp"
#include "dopt/core/objective.hpp"
#include "dopt/graph/graph.hpp"

namespace dopt::problems {

using MapBank = std::vector<std::vector<std::pair<Matrix, Matrix>>>;

/// A benchmark assembled for the executor: one objective per node, the
/// centralized reference, and the graph the problem was generated with.
struct ProblemInstance {
  std::string kind;
  std::vector<ObjectivePtr> objectives;
  Vector reference;
  Vector ground_truth;
  std::optional<ConstraintSet> common;
  std::optional<CommGraph> graph;
  MapBank maps;                        // reduced-variable instances only
  std::vector<Vector> node_references; // reduced-variable instances only
  std::vector<std::string> warnings;
  nlohmann::json meta = nlohmann::json::object();

  int size() const { return static_cast<int>(objectives.size()); }
  double total_value(const Vector& x) const;
  Vector total_gradient(const Vector& x) const;

  /// Context for run_rounds on the given graph (defaults to the instance graph).
  RunContext context(const CommGraph* g = nullptr) const;
};

nlohmann::json instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& j);

ObjectivePtr objective_from_json(const nlohmann::json& j);

/// Radius 1.25× the smallest radius that connects the points.
double connecting_radius(const std::vector<Point2>& points, double factor = 1.25);

}  // namespace dopt::problems
