#include "dopt/core/executor.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "dopt/bench/metrics.hpp"
#include "dopt/graph/graph.hpp"

namespace dopt {

Vector mix(const RoundInput& in, const Vector& self, Eigen::Index offset) {
  Vector out = in.self_weight * self;
  for (const auto& p : in.peers) out.noalias() += p.weight * p.slice(offset, self.size());
  return out;
}

Vector neighbor_sum(const RoundInput& in, Eigen::Index len, Eigen::Index offset) {
  Vector out = Vector::Zero(len);
  for (const auto& p : in.peers) out.noalias() += p.weight * p.slice(offset, len);
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kRunning: return "running";
    case Termination::kConverged: return "converged";
    case Termination::kCap: return "cap";
    case Termination::kDiverged: return "diverged";
  }
  return "unknown";
}

Termination check_stop(const RunTrace& trace, double tol_mse, int cap, double blowup) {
  if (trace.records.empty()) return Termination::kRunning;
  const auto& r = trace.records.back();
  if (r.mse <= tol_mse) return Termination::kConverged;
  if (!std::isfinite(r.mse) || r.mse >= blowup) return Termination::kDiverged;
  if (r.k >= cap) return Termination::kCap;
  return Termination::kRunning;
}

Vector RunContext::initial(int i) const {
  if (!x0.empty()) return x0[i];
  return Vector::Zero(objectives[i]->dim());
}

namespace {

std::vector<Vector> collect(const NodeList& nodes) {
  std::vector<Vector> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n->estimate());
  return out;
}

double safe_mse(const std::vector<Vector>& est, const std::vector<Vector>& refs, double scale) {
  for (const auto& e : est)
    if (!e.allFinite()) return std::numeric_limits<double>::infinity();
  return mse(est, refs) / scale;
}

}  // namespace

RunTrace execute(NodeList& nodes, const CommGraph& graph, const Matrix& weights,
                 const std::vector<Vector>& references, const StopRule& stop,
                 const ExecOptions& opts) {
  const int n = static_cast<int>(nodes.size());
  if (n != graph.size()) throw ArgumentError("one node program per graph node required");
  if (weights.rows() != n || weights.cols() != n) throw ArgumentError("weight matrix has wrong size");
  if (references.empty()) throw ArgumentError("missing reference solution");
  const int phases = n ? nodes[0]->phases() : 1;
  for (const auto& node : nodes)
    if (node->phases() != phases) throw ArgumentError("nodes disagree on phase count");

  double scale = 1.0;
  if (opts.normalize_mse) {
    double s = 0.0;
    for (const auto& r : references) s += r.squaredNorm();
    s /= static_cast<double>(references.size());
    if (s > 0.0) scale = s;
  }

  RunTrace trace;
  trace.records.push_back({0, safe_mse(collect(nodes), references, scale), 0, 0, 0.0});
  trace.reason = check_stop(trace, stop);

  std::vector<std::vector<double>> buffers(n);
  std::vector<RoundInput> inputs(n);
  std::vector<Flops> ops(n);
  std::vector<double> secs(n);
  std::vector<std::exception_ptr> errors(n);
  std::uint64_t floats = 0;
  Flops total_ops = 0;
  double seconds = 0.0;
  int k = 0;

  while (trace.reason == Termination::kRunning) {
    for (int phase = 0; phase < phases; ++phase) {
      for (int i = 0; i < n; ++i) {
        const Eigen::Index len = nodes[i]->public_size(phase);
        buffers[i].resize(static_cast<std::size_t>(len));
        nodes[i]->publish(phase, buffers[i].data());
        floats += static_cast<std::uint64_t>(len) * static_cast<std::uint64_t>(graph.degree(i));
      }
      for (int i = 0; i < n; ++i) {
        auto& in = inputs[i];
        in.node = i;
        in.iteration = k;
        in.phase = phase;
        in.self_weight = weights(i, i);
        in.peers.clear();
        for (int j : graph.neighbors(i))
          in.peers.push_back({j, weights(i, j), std::span<const double>(buffers[j])});
        errors[i] = nullptr;
      }
      auto body = [&](int i) {
        try {
          if (opts.timing) {
            const auto t0 = std::chrono::steady_clock::now();
            ops[i] = nodes[i]->update(inputs[i]);
            secs[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          } else {
            ops[i] = nodes[i]->update(inputs[i]);
            secs[i] = 0.0;
          }
        } catch (...) {
          errors[i] = std::current_exception();
        }
      };
      if (opts.parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) body(i);
      } else {
        for (int i = 0; i < n; ++i) body(i);
      }
      for (int i = 0; i < n; ++i) {
        total_ops += ops[i];
        seconds += secs[i];
      }
      for (int i = 0; i < n; ++i) {
        if (!errors[i]) continue;
        try {
          std::rethrow_exception(errors[i]);
        } catch (const DivergenceError& e) {
          trace.reason = Termination::kDiverged;
          trace.divergence_iteration = k + 1;
          trace.divergence_message = "node " + std::to_string(i) + ": " + e.what();
        }
        break;
      }
      if (trace.reason == Termination::kDiverged) break;
    }
    ++k;
    if (trace.reason == Termination::kDiverged) {
      trace.records.push_back({k, std::numeric_limits<double>::infinity(), floats, total_ops, seconds});
      break;
    }
    trace.records.push_back({k, safe_mse(collect(nodes), references, scale), floats, total_ops, seconds});
    trace.reason = check_stop(trace, stop);
    if (trace.reason == Termination::kDiverged) {
      trace.divergence_iteration = k;
      trace.divergence_message = "mse " + std::to_string(trace.records.back().mse);
    }
  }
  trace.final_estimates = collect(nodes);
  return trace;
}

RunTrace run_rounds(const Algorithm& algorithm, const RunContext& ctx, const StopRule& stop,
                    const ExecOptions& opts) {
  if (!ctx.graph) throw ArgumentError("run context has no graph");
  const int n = ctx.size();
  if (n != ctx.graph->size()) throw ArgumentError("one objective per graph node required");
  for (int i = 0; i < n; ++i) {
    if (!ctx.objectives[i]) throw ArgumentError("missing objective for node " + std::to_string(i));
    for (const auto& cap : algorithm.required_capabilities())
      if (!ctx.objectives[i]->has_capability(cap)) throw CapabilityError(i, cap);
  }
  NodeList nodes = algorithm.make_nodes(ctx);
  std::vector<Vector> refs = ctx.node_references.empty() ? std::vector<Vector>{ctx.reference}
                                                         : ctx.node_references;
  return execute(nodes, *ctx.graph, ctx.weights, refs, stop, opts);
}

}  // namespace dopt
