#include "dopt/admm/admm.hpp"

#include "dopt/graph/graph.hpp"

namespace dopt::admm {

CadmmState cadmm_step(const CadmmState& s, const RoundInput& in, const LocalObjective& f,
                      ArgminWorkspace* ws, Flops* ops) {
  if (!(s.rho > 0.0)) throw ArgumentError("C-ADMM penalty must be positive");
  const Eigen::Index n = s.x.size();
  const double deg = static_cast<double>(in.peers.size());
  Vector sum_x = Vector::Zero(n);
  for (const auto& p : in.peers) sum_x += p.slice(0, n);
  CadmmState out = s;
  out.y = s.y + s.dual_step_ratio * s.rho * (deg * s.x - sum_x);
  ProxTerm prox;
  prox.isotropic = s.rho * deg;
  prox.linear = out.y - 0.5 * s.rho * (deg * s.x + sum_x);
  add_ops(ops, static_cast<Flops>(n) * static_cast<Flops>(in.peers.size() + 8));
  ArgminResult r;
  try {
    r = f.penalized_argmin(prox, s.x, ws);
  } catch (const SolverError&) {
    if (!s.x.allFinite() || !out.y.allFinite()) throw DivergenceError(in.iteration + 1, "non-finite iterate");
    throw;
  }
  add_ops(ops, r.flops);
  out.x = std::move(r.x);
  if (!out.x.allFinite() || !out.y.allFinite()) throw DivergenceError(in.iteration + 1, "non-finite iterate");
  return out;
}

SovaState sova_step(const SovaState& s, const RoundInput& in, const LocalObjective& f,
                    ArgminWorkspace* ws, Flops* ops) {
  if (!(s.rho > 0.0)) throw ArgumentError("SOVA penalty must be positive");
  if (s.maps.size() != in.peers.size()) throw MappingError("one map pair per neighbor required");
  const Eigen::Index n = s.x.size();
  Vector y = s.y;
  Vector lin = Vector::Zero(n);
  Matrix p_mat = Matrix::Zero(n, n);
  Flops count = 0;
  for (std::size_t k = 0; k < in.peers.size(); ++k) {
    const auto& [phi_ij, phi_ji] = s.maps[k];
    const auto& peer = in.peers[k];
    const auto nj = static_cast<Eigen::Index>(peer.data.size());
    if (phi_ij.cols() != n) throw MappingError("Φ_ij columns do not match the local dimension");
    if (phi_ji.cols() != nj) throw MappingError("Φ_ji columns do not match the neighbor dimension");
    if (phi_ij.rows() != phi_ji.rows()) throw MappingError("Φ_ij and Φ_ji map to different spaces");
    if (phi_ij.rows() == 0) continue;
    const Vector own = phi_ij * s.x;
    const Vector other = phi_ji * peer.slice(0, nj);
    y += s.rho * phi_ij.transpose() * (own - other);
    lin -= s.rho * phi_ij.transpose() * (own + other);
    p_mat += 2.0 * s.rho * phi_ij.transpose() * phi_ij;
    const Flops r = static_cast<Flops>(phi_ij.rows());
    count += flops::matvec(r, n) * 3 + flops::matvec(r, nj) + static_cast<Flops>(2 * r * n * n + 6 * n);
  }
  SovaState out = s;
  out.y = y;
  ProxTerm prox;
  prox.general = std::move(p_mat);
  prox.linear = y + lin;
  add_ops(ops, count);
  const ArgminResult r = f.penalized_argmin(prox, s.x, ws);
  add_ops(ops, r.flops);
  out.x = r.x;
  if (!out.x.allFinite() || !out.y.allFinite()) throw DivergenceError(in.iteration + 1, "non-finite iterate");
  return out;
}

double mapped_agreement_residual(const std::vector<Vector>& xs,
                                 const std::vector<std::vector<std::pair<Matrix, Matrix>>>& maps,
                                 const std::vector<std::vector<int>>& neighbors) {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t k = 0; k < neighbors[i].size(); ++k) {
      const int j = neighbors[i][k];
      if (j < static_cast<int>(i)) continue;
      const auto& [phi_ij, phi_ji] = maps[i][k];
      total += (phi_ij * xs[i] - phi_ji * xs[j]).norm();
    }
  }
  return total;
}

namespace {

class CadmmNode final : public NodeProgram {
 public:
  CadmmNode(ObjectivePtr f, CadmmState s) : f_(std::move(f)), s_(std::move(s)), ws_(f_->make_workspace()) {}
  Eigen::Index public_size(int) const override { return s_.x.size(); }
  void publish(int, double* out) const override { Eigen::Map<Vector>(out, s_.x.size()) = s_.x; }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    s_ = cadmm_step(s_, in, *f_, ws_.get(), &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  CadmmState s_;
  std::unique_ptr<ArgminWorkspace> ws_;
};

class SovaNode final : public NodeProgram {
 public:
  SovaNode(ObjectivePtr f, SovaState s) : f_(std::move(f)), s_(std::move(s)), ws_(f_->make_workspace()) {}
  Eigen::Index public_size(int) const override { return s_.x.size(); }
  void publish(int, double* out) const override { Eigen::Map<Vector>(out, s_.x.size()) = s_.x; }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    s_ = sova_step(s_, in, *f_, ws_.get(), &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  SovaState s_;
  std::unique_ptr<ArgminWorkspace> ws_;
};

}  // namespace

NodeList CadmmAlgorithm::make_nodes(const RunContext& ctx) const {
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i) {
    CadmmState s;
    s.x = ctx.initial(i);
    s.y = Vector::Zero(s.x.size());
    s.rho = rho_;
    s.dual_step_ratio = ratio_;
    nodes.push_back(std::make_unique<CadmmNode>(ctx.objectives[i], std::move(s)));
  }
  return nodes;
}

NodeList SovaAlgorithm::make_nodes(const RunContext& ctx) const {
  if (static_cast<int>(ctx.maps.size()) != ctx.size())
    throw MappingError("SOVA needs a map bank for every node");
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i) {
    if (ctx.maps[i].size() != ctx.graph->neighbors(i).size())
      throw MappingError("node " + std::to_string(i) + " needs one map pair per neighbor");
    SovaState s;
    s.x = ctx.initial(i);
    s.y = Vector::Zero(s.x.size());
    s.rho = rho_;
    s.maps = ctx.maps[i];
    nodes.push_back(std::make_unique<SovaNode>(ctx.objectives[i], std::move(s)));
  }
  return nodes;
}

}  // namespace dopt::admm
