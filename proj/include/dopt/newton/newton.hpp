#pragma once

#include <memory>

#include "dopt/core/executor.hpp"
#include "dopt/core/objective.hpp"

namespace dopt::newton {

// Network Newton-K. Phase 0 publishes x; phases 1..K publish d.
struct NnkState {
  Vector x;
  Matrix d_matrix;           // D = α∇²f + 2w̄_ii I
  Eigen::LLT<Matrix> d_llt;
  Vector g;                  // α∇f(x) + Σ_{N∪i} w̄_ij x_j
  Vector d;
  double alpha = 1.0;        // penalty weight on the local costs
  double epsilon = 1.0;      // outer step
  int K = 1;
  double wbar_ii = 0.0;      // 1 − w_ii
  int p = 0;                 // inner rounds completed
  bool factor_valid = false;
};

NnkState nnk_outer_step(const NnkState& s, const RoundInput& in, const LocalObjective& f,
                        Flops* ops = nullptr);
/// d^{p+1} = D⁻¹[w̄_ii d^p − g − Σ_{j∈N_i} w̄_ij d_j^p], with w̄_ij = −w_ij.
NnkState nnk_inner_step(const NnkState& s, const RoundInput& in, Flops* ops = nullptr);
/// x ← x + ε d.
NnkState nnk_apply(const NnkState& s, Flops* ops = nullptr);

struct SurrogateWorkspace {
  bool factor_valid = false;
  Eigen::LLT<Matrix> llt;
  Matrix hessian;
  solvers::SeparableWarmStart warm;
};

/// argmin over the set of (∇f(x_a) + π̃)ᵀ(x − x_a) + ½(x − x_a)ᵀ(∇²f(x_a) + τI)(x − x_a).
/// A negative τ selects 1e-6·(1 + ‖∇²f(x_a)‖∞).
Vector quadratic_surrogate_argmin(const Vector& x_anchor, const Vector& pi_tilde,
                                  const LocalObjective& f, const ConstraintSet& set, double tau,
                                  SurrogateWorkspace* ws = nullptr, Flops* ops = nullptr,
                                  const Vector* grad_at_anchor = nullptr);

double default_tau(const Matrix& hessian);

// NEXT with the quadratic surrogate. Publishes [z, y].
struct NextState {
  Vector x;
  Vector y;
  Vector z;
  Vector grad;      // ∇f(x)
  Vector pi_tilde;  // N·y − ∇f(x)
  Vector x_tilde;
  double alpha0 = 1.0;
  double mu = 1e-3;
  double tau = -1.0;
  int k = 0;
  int network_size = 1;
};

/// α⁰ / (1 + μk).
double next_step_size(double alpha0, double mu, int k);

NextState next_init(const Vector& x0, const LocalObjective& f, double alpha0, double mu,
                    double tau, int network_size, const ConstraintSet& set,
                    SurrogateWorkspace* ws = nullptr);
NextState next_step(const NextState& s, const RoundInput& in, const LocalObjective& f,
                    const ConstraintSet& set, SurrogateWorkspace* ws = nullptr,
                    Flops* ops = nullptr);

class NnkAlgorithm final : public Algorithm {
 public:
  NnkAlgorithm(double alpha, double epsilon, int K) : alpha_(alpha), epsilon_(epsilon), k_(K) {}
  std::string name() const override { return "nn"; }
  std::vector<std::string> required_capabilities() const override {
    return {capability::kGradient, capability::kHessian};
  }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double alpha_, epsilon_;
  int k_;
};

class NextAlgorithm final : public Algorithm {
 public:
  NextAlgorithm(double alpha0, double mu, double tau) : alpha0_(alpha0), mu_(mu), tau_(tau) {}
  std::string name() const override { return "next"; }
  std::vector<std::string> required_capabilities() const override {
    return {capability::kGradient, capability::kHessian};
  }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double alpha0_, mu_, tau_;
};

}  // namespace dopt::newton
