#include "dopt/problems/instance.hpp"

#include <algorithm>

#include "dopt/core/json_io.hpp"
#include "dopt/problems/mapping.hpp"

namespace dopt::problems {

double ProblemInstance::total_value(const Vector& x) const {
  double v = 0.0;
  for (const auto& f : objectives) v += f->value(x);
  return v;
}

Vector ProblemInstance::total_gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (const auto& f : objectives) g += f->gradient(x);
  return g;
}

RunContext ProblemInstance::context(const CommGraph* g) const {
  RunContext ctx;
  ctx.objectives = objectives;
  ctx.graph = g ? g : (graph ? &*graph : nullptr);
  if (!ctx.graph) throw StateError("instance has no communication graph");
  if (ctx.graph->size() != size()) throw ArgumentError("graph size differs from the node count");
  ctx.weights = metropolis_weights(*ctx.graph);
  ctx.common = common;
  ctx.maps = maps;
  ctx.node_references = node_references;
  ctx.reference = reference;
  return ctx;
}

nlohmann::json instance_to_json(const ProblemInstance& inst) {
  nlohmann::json j;
  j["kind"] = inst.kind;
  j["objectives"] = nlohmann::json::array();
  for (const auto& f : inst.objectives) j["objectives"].push_back(f->to_json());
  j["reference"] = vector_to_json(inst.reference);
  j["ground_truth"] = vector_to_json(inst.ground_truth);
  if (inst.common) j["common"] = *inst.common;
  if (inst.graph) j["graph"] = *inst.graph;
  if (!inst.maps.empty()) {
    auto& bank = j["maps"] = nlohmann::json::array();
    for (const auto& node : inst.maps) {
      nlohmann::json pairs = nlohmann::json::array();
      for (const auto& [a, b] : node) pairs.push_back({matrix_to_json(a), matrix_to_json(b)});
      bank.push_back(pairs);
    }
  }
  if (!inst.node_references.empty()) {
    auto& refs = j["node_references"] = nlohmann::json::array();
    for (const auto& r : inst.node_references) refs.push_back(vector_to_json(r));
  }
  j["warnings"] = inst.warnings;
  j["meta"] = inst.meta;
  return j;
}

ObjectivePtr objective_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "quadratic") {
    ConstraintSet cons;
    if (j.contains("constraints")) cons = j.at("constraints").get<ConstraintSet>();
    return std::make_shared<QuadraticObjective>(matrix_from_json(j.at("m")), vector_from_json(j.at("b")),
                                                j.value("c", 0.0), std::move(cons));
  }
  if (type == "range_mapping") {
    std::vector<RangeTerm> terms;
    for (const auto& t : j.at("terms")) {
      if (!t.is_array() || t.size() != 5) throw ArgumentError("range term must have 5 entries");
      terms.push_back({t[0].get<int>(), Point2(t[1].get<double>(), t[2].get<double>()), t[3].get<double>(),
                       t[4].get<double>()});
    }
    return std::make_shared<RangeMappingObjective>(j.at("landmarks").get<int>(), std::move(terms),
                                                   j.value("singular_radius", 1e-9));
  }
  throw ArgumentError("unknown objective type '" + type + "'");
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
  ProblemInstance inst;
  inst.kind = j.value("kind", "");
  for (const auto& f : j.at("objectives")) inst.objectives.push_back(objective_from_json(f));
  inst.reference = vector_from_json(j.at("reference"));
  if (j.contains("ground_truth")) inst.ground_truth = vector_from_json(j.at("ground_truth"));
  if (j.contains("common")) inst.common = j.at("common").get<ConstraintSet>();
  if (j.contains("graph")) inst.graph = graph_from_json(j.at("graph"));
  if (j.contains("maps")) {
    for (const auto& node : j.at("maps")) {
      std::vector<std::pair<Matrix, Matrix>> pairs;
      for (const auto& p : node) pairs.emplace_back(matrix_from_json(p.at(0)), matrix_from_json(p.at(1)));
      inst.maps.push_back(std::move(pairs));
    }
  }
  if (j.contains("node_references"))
    for (const auto& r : j.at("node_references")) inst.node_references.push_back(vector_from_json(r));
  if (j.contains("warnings")) inst.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (j.contains("meta")) inst.meta = j.at("meta");
  return inst;
}

double connecting_radius(const std::vector<Point2>& points, double factor) {
  // Longest edge of the Euclidean minimum spanning tree (Prim).
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  std::vector<double> dist(n, kInf);
  std::vector<bool> in(n, false);
  dist[0] = 0.0;
  double longest = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!in[v] && (u == n || dist[v] < dist[u])) u = v;
    in[u] = true;
    longest = std::max(longest, dist[u]);
    for (std::size_t v = 0; v < n; ++v)
      if (!in[v]) dist[v] = std::min(dist[v], (points[u] - points[v]).norm());
  }
  return factor * longest;
}

}  // namespace dopt::problems
