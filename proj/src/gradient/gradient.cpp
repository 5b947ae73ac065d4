#include "dopt/gradient/gradient.hpp"

#include <cmath>

namespace dopt::gradient {

namespace {

Flops mix_ops(const RoundInput& in, Eigen::Index n) {
  return static_cast<Flops>(2 * n * (static_cast<Eigen::Index>(in.peers.size()) + 1));
}

void check_finite(const Vector& v, int k) {
  if (!v.allFinite()) throw DivergenceError(k, "non-finite iterate");
}

}  // namespace

double dgd_step_size(const DgdState& s) {
  if (!s.decreasing || s.k == 0) return s.alpha0;
  return s.alpha0 / std::sqrt(static_cast<double>(s.k));
}

DgdState dgd_step(const DgdState& s, const RoundInput& in, const LocalObjective& f, Flops* ops) {
  const Vector g = checked_gradient(f, s.x, s.k, ops);
  DgdState out = s;
  out.x = mix(in, s.x) - dgd_step_size(s) * g;
  add_ops(ops, mix_ops(in, s.x.size()) + 2 * static_cast<Flops>(s.x.size()));
  check_finite(out.x, s.k + 1);
  ++out.k;
  return out;
}

ExtraState extra_first_step(const ExtraState& s, const RoundInput& in, const LocalObjective& f,
                            Flops* ops) {
  const Eigen::Index n = s.x.size();
  const Vector g = checked_gradient(f, s.x, s.k, ops);
  ExtraState out = s;
  out.x = mix(in, s.x) - s.alpha * g;
  out.x_prev = s.x;
  out.grad_prev = g;
  out.has_history = true;
  out.k = s.k + 1;
  add_ops(ops, mix_ops(in, n) + 2 * static_cast<Flops>(n));
  check_finite(out.x, out.k);
  return out;
}

ExtraState extra_step(const ExtraState& s, const RoundInput& in, const LocalObjective& f,
                      Flops* ops) {
  if (!s.has_history) throw StateError("EXTRA step requires the previous iterate and gradient");
  const Eigen::Index n = s.x.size();
  const Vector g = checked_gradient(f, s.x, s.k, ops);
  const Vector wx = mix(in, s.x, 0);
  const Vector wx_prev = mix(in, s.x_prev, n);
  ExtraState out = s;
  out.x = s.x + wx - 0.5 * (s.x_prev + wx_prev) - s.alpha * (g - s.grad_prev);
  out.x_prev = s.x;
  out.grad_prev = g;
  out.k = s.k + 1;
  add_ops(ops, 2 * mix_ops(in, n) + 8 * static_cast<Flops>(n));
  check_finite(out.x, out.k);
  return out;
}

double dda_step_size(const DdaState& s) {
  if (s.k == 0) return s.alpha0;
  return s.alpha0 / std::sqrt(static_cast<double>(s.k));
}

Vector dda_prox(const Vector& z, double alpha, const ConstraintSet& set,
                solvers::SeparableWarmStart* warm, Flops* ops) {
  if (!(alpha > 0.0)) throw ArgumentError("DDA step size must be positive");
  const Eigen::Index n = z.size();
  if (set.empty()) {
    add_ops(ops, static_cast<Flops>(n));
    return -alpha * z;
  }
  if (!set.has_equalities()) {
    add_ops(ops, 3 * static_cast<Flops>(n));
    return set.project_box(-alpha * z);
  }
  solvers::QpOptions opts;
  opts.tolerance = 1e-9;
  try {
    const auto sol = solvers::solve_qp_separable(Vector::Constant(n, 1.0 / alpha), z, set, opts, warm);
    add_ops(ops, sol.flops);
    return sol.x;
  } catch (const SolverError&) {
    if (warm) warm->eq_multipliers = Vector();
  }
  SparseMatrix h(n, n);
  h.setIdentity();
  h /= alpha;
  const auto sol = solvers::solve_qp_interior_point({h, z, set}, opts);
  add_ops(ops, sol.flops);
  return sol.x;
}

DdaState dda_step(const DdaState& s, const RoundInput& in, const LocalObjective& f,
                  const ConstraintSet& set, solvers::SeparableWarmStart* warm, Flops* ops) {
  const Eigen::Index n = s.z.size();
  const Vector g = checked_gradient(f, s.x, s.k, ops);
  DdaState out = s;
  out.z = mix(in, s.z) + g;
  add_ops(ops, mix_ops(in, n) + static_cast<Flops>(n));
  check_finite(out.z, s.k + 1);
  out.x = dda_prox(out.z, dda_step_size(s), set, warm, ops);
  ++out.k;
  return out;
}

CanonicalState canonical_step(const CanonicalState& s, const RoundInput& in,
                              const LocalObjective& f, Flops* ops) {
  const Eigen::Index n = s.x.size();
  const auto& [z0, z1, z2, z3] = s.zeta;
  const Vector wx = mix(in, s.x, 0);
  const Vector wz = mix(in, s.z, n);
  const Vector eval_at = (z3 == 0.0) ? s.x : Vector((1.0 - z3) * s.x + z3 * wx);
  const Vector g = checked_gradient(f, eval_at, 0, ops);
  CanonicalState out = s;
  out.x = s.x + z0 * s.z - z1 * (s.x - wx) + z2 * (s.z - wz) - s.alpha * g;
  out.z = s.z - (s.x - wx);
  add_ops(ops, 2 * mix_ops(in, n) + 14 * static_cast<Flops>(n));
  check_finite(out.x, 0);
  check_finite(out.z, 0);
  return out;
}

DigingState diging_init(const Vector& x0, double alpha, const LocalObjective& f) {
  DigingState s;
  s.x = x0;
  s.grad = f.gradient(x0);
  s.y = s.grad;
  s.alpha = alpha;
  return s;
}

DigingState diging_step(const DigingState& s, const RoundInput& in, const LocalObjective& f,
                        Flops* ops) {
  const Eigen::Index n = s.x.size();
  DigingState out = s;
  out.x = mix(in, s.x, 0) - s.alpha * s.y;
  out.grad = checked_gradient(f, out.x, in.iteration + 1, ops);
  out.y = mix(in, s.y, n) + out.grad - s.grad;
  add_ops(ops, 2 * mix_ops(in, n) + 4 * static_cast<Flops>(n));
  check_finite(out.y, in.iteration + 1);
  return out;
}

namespace {

class DgdNode final : public NodeProgram {
 public:
  DgdNode(ObjectivePtr f, DgdState s) : f_(std::move(f)), s_(std::move(s)) {}
  Eigen::Index public_size(int) const override { return s_.x.size(); }
  void publish(int, double* out) const override { Eigen::Map<Vector>(out, s_.x.size()) = s_.x; }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    s_ = dgd_step(s_, in, *f_, &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  DgdState s_;
};

class ExtraNode final : public NodeProgram {
 public:
  ExtraNode(ObjectivePtr f, ExtraState s) : f_(std::move(f)), s_(std::move(s)) {
    if (s_.x_prev.size() == 0) s_.x_prev = s_.x;
  }
  Eigen::Index public_size(int) const override { return 2 * s_.x.size(); }
  void publish(int, double* out) const override {
    const Eigen::Index n = s_.x.size();
    Eigen::Map<Vector>(out, n) = s_.x;
    Eigen::Map<Vector>(out + n, n) = s_.x_prev;
  }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    s_ = s_.has_history ? extra_step(s_, in, *f_, &ops) : extra_first_step(s_, in, *f_, &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  ExtraState s_;
};

class DdaNode final : public NodeProgram {
 public:
  DdaNode(ObjectivePtr f, DdaState s, ConstraintSet set)
      : f_(std::move(f)), s_(std::move(s)), set_(std::move(set)) {
    s_.x = dda_prox(s_.z, dda_step_size(s_), set_, &warm_);
  }
  Eigen::Index public_size(int) const override { return s_.z.size(); }
  void publish(int, double* out) const override { Eigen::Map<Vector>(out, s_.z.size()) = s_.z; }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    s_ = dda_step(s_, in, *f_, set_, &warm_, &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  DdaState s_;
  ConstraintSet set_;
  solvers::SeparableWarmStart warm_;
};

class CanonicalNode final : public NodeProgram {
 public:
  CanonicalNode(ObjectivePtr f, CanonicalState s) : f_(std::move(f)), s_(std::move(s)) {}
  Eigen::Index public_size(int) const override { return 2 * s_.x.size(); }
  void publish(int, double* out) const override {
    const Eigen::Index n = s_.x.size();
    Eigen::Map<Vector>(out, n) = s_.x;
    Eigen::Map<Vector>(out + n, n) = s_.z;
  }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    try {
      s_ = canonical_step(s_, in, *f_, &ops);
    } catch (const DivergenceError& e) {
      throw DivergenceError(in.iteration + 1, e.what());
    }
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  CanonicalState s_;
};

class DigingNode final : public NodeProgram {
 public:
  DigingNode(ObjectivePtr f, DigingState s) : f_(std::move(f)), s_(std::move(s)) {}
  Eigen::Index public_size(int) const override { return 2 * s_.x.size(); }
  void publish(int, double* out) const override {
    const Eigen::Index n = s_.x.size();
    Eigen::Map<Vector>(out, n) = s_.x;
    Eigen::Map<Vector>(out + n, n) = s_.y;
  }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    s_ = diging_step(s_, in, *f_, &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  DigingState s_;
};

const ConstraintSet& node_set(const RunContext& ctx, int i) {
  return ctx.common ? *ctx.common : ctx.objectives[i]->constraints();
}

}  // namespace

NodeList DgdAlgorithm::make_nodes(const RunContext& ctx) const {
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i)
    nodes.push_back(std::make_unique<DgdNode>(ctx.objectives[i], DgdState{ctx.initial(i), alpha0_, 0, decreasing_}));
  return nodes;
}

NodeList ExtraAlgorithm::make_nodes(const RunContext& ctx) const {
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i) {
    ExtraState s;
    s.x = ctx.initial(i);
    s.alpha = alpha_;
    nodes.push_back(std::make_unique<ExtraNode>(ctx.objectives[i], std::move(s)));
  }
  return nodes;
}

NodeList DdaAlgorithm::make_nodes(const RunContext& ctx) const {
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i) {
    DdaState s;
    s.z = Vector::Zero(ctx.objectives[i]->dim());
    s.alpha0 = alpha0_;
    nodes.push_back(std::make_unique<DdaNode>(ctx.objectives[i], std::move(s), node_set(ctx, i)));
  }
  return nodes;
}

NodeList CanonicalAlgorithm::make_nodes(const RunContext& ctx) const {
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i) {
    CanonicalState s;
    s.x = ctx.initial(i);
    s.z = Vector::Zero(s.x.size());
    s.alpha = alpha_;
    s.zeta = zeta_;
    nodes.push_back(std::make_unique<CanonicalNode>(ctx.objectives[i], std::move(s)));
  }
  return nodes;
}

NodeList DigingAlgorithm::make_nodes(const RunContext& ctx) const {
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i)
    nodes.push_back(std::make_unique<DigingNode>(ctx.objectives[i], diging_init(ctx.initial(i), alpha_, *ctx.objectives[i])));
  return nodes;
}

}  // namespace dopt::gradient
