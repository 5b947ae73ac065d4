#pragma once

#include <array>
#include <memory>

#include "dopt/core/executor.hpp"
#include "dopt/core/objective.hpp"

namespace dopt::gradient {

// Publication layouts (what neighbors receive each round):
//   DGD [x]   EXTRA [x, x_prev]   canonical [x, z]   DIGing [x, y]   DDA [z]

struct DgdState {
  Vector x;
  double alpha0 = 0.0;
  int k = 0;
  bool decreasing = true;
};

/// α⁰ at k = 0, α⁰/√k afterwards; α⁰ throughout when the schedule is fixed.
double dgd_step_size(const DgdState& s);
DgdState dgd_step(const DgdState& s, const RoundInput& in, const LocalObjective& f,
                  Flops* ops = nullptr);

struct ExtraState {
  Vector x;
  Vector x_prev;
  Vector grad_prev;
  double alpha = 0.0;
  int k = 0;
  bool has_history = false;
};

/// x¹ = Σ_j w_ij x_j⁰ − α∇f(x⁰); sets up the history slots.
ExtraState extra_first_step(const ExtraState& s, const RoundInput& in, const LocalObjective& f,
                            Flops* ops = nullptr);
/// x^{k+1} = x^k + Σ w_ij x_j^k − Σ w̃_ij x_j^{k−1} − α[∇f(x^k) − ∇f(x^{k−1})],
/// w̃ = (I + W)/2.
ExtraState extra_step(const ExtraState& s, const RoundInput& in, const LocalObjective& f,
                      Flops* ops = nullptr);

struct DdaState {
  Vector z;
  Vector x;
  double alpha0 = 0.0;
  int k = 0;
};

double dda_step_size(const DdaState& s);
/// argmin over the set of xᵀz + ½‖x‖²/α.
Vector dda_prox(const Vector& z, double alpha, const ConstraintSet& set,
                solvers::SeparableWarmStart* warm = nullptr, Flops* ops = nullptr);
DdaState dda_step(const DdaState& s, const RoundInput& in, const LocalObjective& f,
                  const ConstraintSet& set, solvers::SeparableWarmStart* warm = nullptr,
                  Flops* ops = nullptr);

struct CanonicalState {
  Vector x;
  Vector z;
  double alpha = 0.0;
  std::array<double, 4> zeta{0.5, 1.0, 0.0, 0.0};
};

/// x' = x + ζ₀z − ζ₁(x − Wx) + ζ₂(z − Wz) − α∇f((1−ζ₃)x + ζ₃Wx)
/// z' = z − (x − Wx)
CanonicalState canonical_step(const CanonicalState& s, const RoundInput& in,
                              const LocalObjective& f, Flops* ops = nullptr);

struct DigingState {
  Vector x;
  Vector y;
  Vector grad;
  double alpha = 0.0;
};

DigingState diging_init(const Vector& x0, double alpha, const LocalObjective& f);
/// x' = Wx − αy;  y' = Wy + ∇f(x') − ∇f(x)
DigingState diging_step(const DigingState& s, const RoundInput& in, const LocalObjective& f,
                        Flops* ops = nullptr);

class DgdAlgorithm final : public Algorithm {
 public:
  DgdAlgorithm(double alpha0, bool decreasing = true) : alpha0_(alpha0), decreasing_(decreasing) {}
  std::string name() const override { return "dgd"; }
  std::vector<std::string> required_capabilities() const override { return {capability::kGradient}; }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double alpha0_;
  bool decreasing_;
};

class ExtraAlgorithm final : public Algorithm {
 public:
  explicit ExtraAlgorithm(double alpha) : alpha_(alpha) {}
  std::string name() const override { return "extra"; }
  std::vector<std::string> required_capabilities() const override { return {capability::kGradient}; }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double alpha_;
};

class DdaAlgorithm final : public Algorithm {
 public:
  explicit DdaAlgorithm(double alpha0) : alpha0_(alpha0) {}
  std::string name() const override { return "dda"; }
  std::vector<std::string> required_capabilities() const override { return {capability::kGradient}; }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double alpha0_;
};

class CanonicalAlgorithm final : public Algorithm {
 public:
  CanonicalAlgorithm(double alpha, std::array<double, 4> zeta) : alpha_(alpha), zeta_(zeta) {}
  std::string name() const override { return "canonical"; }
  std::vector<std::string> required_capabilities() const override { return {capability::kGradient}; }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double alpha_;
  std::array<double, 4> zeta_;
};

class DigingAlgorithm final : public Algorithm {
 public:
  explicit DigingAlgorithm(double alpha) : alpha_(alpha) {}
  std::string name() const override { return "diging"; }
  std::vector<std::string> required_capabilities() const override { return {capability::kGradient}; }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double alpha_;
};

}  // namespace dopt::gradient
