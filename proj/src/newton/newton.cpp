#include "dopt/newton/newton.hpp"

namespace dopt::newton {

namespace {

Flops mix_ops(const RoundInput& in, Eigen::Index n) {
  return static_cast<Flops>(2 * n * (static_cast<Eigen::Index>(in.peers.size()) + 1));
}

}  // namespace

NnkState nnk_outer_step(const NnkState& s, const RoundInput& in, const LocalObjective& f,
                        Flops* ops) {
  const Eigen::Index n = s.x.size();
  NnkState out = s;
  out.wbar_ii = 1.0 - in.self_weight;
  if (!out.factor_valid || !f.hessian_is_constant()) {
    out.d_matrix = s.alpha * f.hessian(s.x);
    out.d_matrix.diagonal().array() += 2.0 * out.wbar_ii;
    add_ops(ops, f.hessian_flops() + static_cast<Flops>(n * n) + flops::cholesky(n));
    out.d_llt.compute(out.d_matrix);
    if (out.d_llt.info() != Eigen::Success) {
      out.factor_valid = false;
      throw SolverError("NN-K block D is not positive definite; increase alpha or the self weight", kInf);
    }
    out.factor_valid = true;
  }
  const Vector grad = checked_gradient(f, s.x, in.iteration, ops);
  out.g = s.alpha * grad + out.wbar_ii * s.x - neighbor_sum(in, n);
  out.d = -out.d_llt.solve(out.g);
  out.p = 0;
  add_ops(ops, mix_ops(in, n) + 3 * static_cast<Flops>(n) + flops::chol_solve(n));
  if (!out.d.allFinite()) throw DivergenceError(in.iteration, "non-finite Newton direction");
  return out;
}

NnkState nnk_inner_step(const NnkState& s, const RoundInput& in, Flops* ops) {
  if (s.p >= s.K) throw StateError("NN-K inner index exceeds K");
  if (!s.factor_valid) throw StateError("NN-K inner step before the outer step");
  const Eigen::Index n = s.d.size();
  NnkState out = s;
  out.d = s.d_llt.solve(s.wbar_ii * s.d - s.g + neighbor_sum(in, n));
  ++out.p;
  add_ops(ops, mix_ops(in, n) + 3 * static_cast<Flops>(n) + flops::chol_solve(n));
  if (!out.d.allFinite()) throw DivergenceError(in.iteration, "non-finite Newton direction");
  return out;
}

NnkState nnk_apply(const NnkState& s, Flops* ops) {
  NnkState out = s;
  out.x = s.x + s.epsilon * s.d;
  add_ops(ops, 2 * static_cast<Flops>(s.x.size()));
  return out;
}

double default_tau(const Matrix& hessian) {
  const double norm_inf = hessian.size() ? hessian.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  return 1e-6 * (1.0 + norm_inf);
}

Vector quadratic_surrogate_argmin(const Vector& x_anchor, const Vector& pi_tilde,
                                  const LocalObjective& f, const ConstraintSet& set, double tau,
                                  SurrogateWorkspace* ws, Flops* ops, const Vector* grad_at_anchor) {
  const Eigen::Index n = x_anchor.size();
  const bool reuse = ws && ws->factor_valid && f.hessian_is_constant();
  Matrix local_h;
  const Matrix* h = nullptr;
  if (reuse) {
    h = &ws->hessian;
  } else {
    local_h = f.hessian(x_anchor);
    add_ops(ops, f.hessian_flops());
    if (!(tau >= 0.0)) tau = default_tau(local_h);
    local_h.diagonal().array() += tau;
    h = &local_h;
  }
  const Vector grad = grad_at_anchor ? *grad_at_anchor : f.gradient(x_anchor);
  if (!grad_at_anchor) add_ops(ops, f.gradient_flops());
  const Vector c = grad + pi_tilde - (*h) * x_anchor;
  add_ops(ops, flops::matvec(n, n) + 2 * static_cast<Flops>(n));

  if (set.empty()) {
    Eigen::LLT<Matrix> local_llt;
    Eigen::LLT<Matrix>* llt = &local_llt;
    if (reuse) {
      llt = &ws->llt;
    } else {
      llt->compute(*h);
      add_ops(ops, flops::cholesky(n));
      if (llt->info() != Eigen::Success)
        throw ArgumentError("surrogate Hessian is indefinite after damping; increase tau");
      if (ws && f.hessian_is_constant()) {
        ws->llt = *llt;
        ws->hessian = *h;
        ws->factor_valid = true;
      }
    }
    add_ops(ops, flops::chol_solve(n));
    return llt->solve(-c);
  }

  if (ws && f.hessian_is_constant() && !reuse) {
    ws->hessian = *h;
    ws->factor_valid = true;
  }
  const Vector diag = h->diagonal();
  const bool is_diag = (*h - Matrix(diag.asDiagonal())).isZero(0.0);
  if (!is_diag) {
    Eigen::LLT<Matrix> chk(*h);
    if (chk.info() != Eigen::Success)
      throw ArgumentError("surrogate Hessian is indefinite after damping; increase tau");
  } else if (!(diag.minCoeff() > 0.0)) {
    throw ArgumentError("surrogate Hessian is indefinite after damping; increase tau");
  }
  solvers::QpOptions opts;
  opts.tolerance = 1e-9;
  const auto sol = solvers::minimize_quadratic(*h, c, set, opts, ws ? &ws->warm : nullptr);
  add_ops(ops, sol.flops);
  return sol.x;
}

double next_step_size(double alpha0, double mu, int k) {
  return alpha0 / (1.0 + mu * static_cast<double>(k));
}

NextState next_init(const Vector& x0, const LocalObjective& f, double alpha0, double mu,
                    double tau, int network_size, const ConstraintSet& set,
                    SurrogateWorkspace* ws) {
  NextState s;
  s.x = x0;
  s.alpha0 = alpha0;
  s.mu = mu;
  s.tau = tau;
  s.network_size = network_size;
  s.grad = f.gradient(x0);
  s.y = s.grad;
  s.pi_tilde = static_cast<double>(network_size) * s.y - s.grad;
  s.x_tilde = quadratic_surrogate_argmin(s.x, s.pi_tilde, f, set, tau, ws, nullptr, &s.grad);
  s.z = s.x + next_step_size(alpha0, mu, 0) * (s.x_tilde - s.x);
  return s;
}

NextState next_step(const NextState& s, const RoundInput& in, const LocalObjective& f,
                    const ConstraintSet& set, SurrogateWorkspace* ws, Flops* ops) {
  const Eigen::Index n = s.x.size();
  NextState out = s;
  out.x = mix(in, s.z, 0);
  out.grad = checked_gradient(f, out.x, s.k + 1, ops);
  out.y = mix(in, s.y, n) + out.grad - s.grad;
  out.pi_tilde = static_cast<double>(s.network_size) * out.y - out.grad;
  add_ops(ops, 2 * mix_ops(in, n) + 5 * static_cast<Flops>(n));
  if (!out.y.allFinite()) throw DivergenceError(s.k + 1, "non-finite gradient tracker");
  out.x_tilde = quadratic_surrogate_argmin(out.x, out.pi_tilde, f, set, s.tau, ws, ops, &out.grad);
  out.k = s.k + 1;
  out.z = out.x + next_step_size(s.alpha0, s.mu, out.k) * (out.x_tilde - out.x);
  add_ops(ops, 3 * static_cast<Flops>(n));
  if (!out.z.allFinite()) throw DivergenceError(out.k, "non-finite iterate");
  return out;
}

namespace {

class NnkNode final : public NodeProgram {
 public:
  NnkNode(ObjectivePtr f, NnkState s) : f_(std::move(f)), s_(std::move(s)) {}
  int phases() const override { return s_.K + 1; }
  Eigen::Index public_size(int) const override { return s_.x.size(); }
  void publish(int phase, double* out) const override {
    const Vector& v = phase == 0 ? s_.x : s_.d;
    Eigen::Map<Vector>(out, v.size()) = v;
  }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    if (in.phase == 0) s_ = nnk_outer_step(s_, in, *f_, &ops);
    else s_ = nnk_inner_step(s_, in, &ops);
    if (in.phase == s_.K) s_ = nnk_apply(s_, &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  NnkState s_;
};

class NextNode final : public NodeProgram {
 public:
  NextNode(ObjectivePtr f, const Vector& x0, double alpha0, double mu, double tau, int n_nodes,
           ConstraintSet set)
      : f_(std::move(f)), set_(std::move(set)) {
    s_ = next_init(x0, *f_, alpha0, mu, tau, n_nodes, set_, &ws_);
  }
  Eigen::Index public_size(int) const override { return 2 * s_.x.size(); }
  void publish(int, double* out) const override {
    const Eigen::Index n = s_.x.size();
    Eigen::Map<Vector>(out, n) = s_.z;
    Eigen::Map<Vector>(out + n, n) = s_.y;
  }
  Flops update(const RoundInput& in) override {
    Flops ops = 0;
    s_ = next_step(s_, in, *f_, set_, &ws_, &ops);
    return ops;
  }
  const Vector& estimate() const override { return s_.x; }

 private:
  ObjectivePtr f_;
  ConstraintSet set_;
  SurrogateWorkspace ws_;
  NextState s_;
};

}  // namespace

NodeList NnkAlgorithm::make_nodes(const RunContext& ctx) const {
  if (k_ < 0) throw ArgumentError("NN-K needs K >= 0");
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i) {
    if (!ctx.objectives[i]->constraints().empty() || (ctx.common && !ctx.common->empty()))
      throw ArgumentError("NN-K applies only to unconstrained problems");
    NnkState s;
    s.x = ctx.initial(i);
    s.alpha = alpha_;
    s.epsilon = epsilon_;
    s.K = k_;
    nodes.push_back(std::make_unique<NnkNode>(ctx.objectives[i], std::move(s)));
  }
  return nodes;
}

NodeList NextAlgorithm::make_nodes(const RunContext& ctx) const {
  NodeList nodes;
  for (int i = 0; i < ctx.size(); ++i) {
    const ConstraintSet& set = ctx.common ? *ctx.common : ctx.objectives[i]->constraints();
    nodes.push_back(std::make_unique<NextNode>(ctx.objectives[i], ctx.initial(i), alpha0_, mu_, tau_,
                                               ctx.size(), set));
  }
  return nodes;
}

}  // namespace dopt::newton
