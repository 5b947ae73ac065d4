#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dopt/core/objective.hpp"
#include "dopt/core/types.hpp"

namespace dopt {

class CommGraph;

/// A neighbor's buffer published at the start of the current round.
struct Peer {
  int node = 0;
  double weight = 0.0;
  std::span<const double> data;

  Eigen::Map<const Vector> slice(Eigen::Index offset, Eigen::Index len) const {
    return Eigen::Map<const Vector>(data.data() + offset, len);
  }
};

struct RoundInput {
  int node = 0;
  int iteration = 0;
  int phase = 0;
  double self_weight = 1.0;
  std::vector<Peer> peers;
};

/// w_ii·self + Σ_j w_ij·peer_j over the slice [offset, offset + self.size()).
Vector mix(const RoundInput& in, const Vector& self, Eigen::Index offset = 0);

/// Σ_j w_ij·peer_j over the slice, self excluded.
Vector neighbor_sum(const RoundInput& in, Eigen::Index len, Eigen::Index offset = 0);

/// Per-node program driven by the executor. Each iteration runs phases()
/// communication rounds; in every round the node publishes a buffer and then
/// updates from the buffers its neighbors published in that same round.
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual int phases() const { return 1; }
  virtual Eigen::Index public_size(int phase) const = 0;
  virtual void publish(int phase, double* out) const = 0;
  // Returns the operation count of the update.
  virtual Flops update(const RoundInput& in) = 0;
  virtual const Vector& estimate() const = 0;
};

using NodeList = std::vector<std::unique_ptr<NodeProgram>>;

enum class Termination { kRunning, kConverged, kCap, kDiverged };

std::string to_string(Termination t);

struct TraceRecord {
  int k = 0;
  double mse = 0.0;
  std::uint64_t cum_floats = 0;
  Flops cum_ops = 0;
  double cum_seconds = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  Termination reason = Termination::kRunning;
  int divergence_iteration = -1;
  std::string divergence_message;
  std::vector<Vector> final_estimates;

  const TraceRecord& last() const { return records.back(); }
  int iterations() const { return records.empty() ? 0 : records.back().k; }
};

struct StopRule {
  double tol = 1e-6;
  int cap = 10000;
  double blowup = 1e12;
};

/// Converged is checked first, then divergence, then the iteration cap.
Termination check_stop(const RunTrace& trace, double tol_mse, int cap, double blowup);
inline Termination check_stop(const RunTrace& trace, const StopRule& s) {
  return check_stop(trace, s.tol, s.cap, s.blowup);
}

struct ExecOptions {
  bool parallel = true;
  bool timing = true;
  bool normalize_mse = false;
};

/// Data an algorithm needs to build its node programs.
struct RunContext {
  std::vector<ObjectivePtr> objectives;
  const CommGraph* graph = nullptr;
  Matrix weights;
  std::vector<Vector> x0;                 // empty → zeros
  std::optional<ConstraintSet> common;    // network-wide feasible set
  // Per-node coordinate maps for reduced-variable methods: maps[i][j] pairs
  // (Φ_ij, Φ_ji) for each neighbor j of i.
  std::vector<std::vector<std::pair<Matrix, Matrix>>> maps;
  std::vector<Vector> node_references;    // per-node references, else shared
  Vector reference;

  int size() const { return static_cast<int>(objectives.size()); }
  Vector initial(int i) const;
};

class Algorithm {
 public:
  virtual ~Algorithm() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> required_capabilities() const = 0;
  virtual NodeList make_nodes(const RunContext& ctx) const = 0;
};

/// Runs the synchronous round loop on prepared node programs.
RunTrace execute(NodeList& nodes, const CommGraph& graph, const Matrix& weights,
                 const std::vector<Vector>& references, const StopRule& stop,
                 const ExecOptions& opts = {});

/// Capability check, node construction and execution.
RunTrace run_rounds(const Algorithm& algorithm, const RunContext& ctx, const StopRule& stop,
                    const ExecOptions& opts = {});

}  // namespace dopt
