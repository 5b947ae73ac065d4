#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "dopt/core/executor.hpp"
#include "dopt/core/objective.hpp"

namespace dopt::admm {

// Consensus ADMM. Publishes x.
struct CadmmState {
  Vector x;
  Vector y;
  double rho = 1.0;
  // Dual increment is dual_step_ratio·ρ·Σ_j (x_i − x_j). The default 0.5
  // matches the ρ/2 penalty of the primal step; 1.0 is the unreconciled form.
  double dual_step_ratio = 0.5;
};

/// y ← y + rρ Σ_j (x_i − x_j), then
/// x ← argmin f(x) + xᵀy + (ρ/2) Σ_j ‖x − ½(x_i + x_j)‖².
CadmmState cadmm_step(const CadmmState& s, const RoundInput& in, const LocalObjective& f,
                      ArgminWorkspace* ws = nullptr, Flops* ops = nullptr);

// SOVA. Node i holds a reduced vector x_i; for neighbor j the pair
// (Φ_ij, Φ_ji) maps x_i and x_j into their shared space. Publishes x_i.
struct SovaState {
  Vector x;
  Vector y;
  double rho = 1.0;
  std::vector<std::pair<Matrix, Matrix>> maps;  // aligned with the peer order
};

/// y ← y + ρ Σ_j Φ_ijᵀ(Φ_ij x_i − Φ_ji x_j), then
/// x ← argmin f(x) + xᵀy + ρ Σ_j ‖Φ_ij x − ½(Φ_ij x_i + Φ_ji x_j)‖².
SovaState sova_step(const SovaState& s, const RoundInput& in, const LocalObjective& f,
                    ArgminWorkspace* ws = nullptr, Flops* ops = nullptr);

/// Σ over edges of ‖Φ_ij x_i − Φ_ji x_j‖ (each edge counted once).
double mapped_agreement_residual(const std::vector<Vector>& xs,
                                 const std::vector<std::vector<std::pair<Matrix, Matrix>>>& maps,
                                 const std::vector<std::vector<int>>& neighbors);

class CadmmAlgorithm final : public Algorithm {
 public:
  explicit CadmmAlgorithm(double rho, double dual_step_ratio = 0.5)
      : rho_(rho), ratio_(dual_step_ratio) {}
  std::string name() const override { return "cadmm"; }
  std::vector<std::string> required_capabilities() const override { return {capability::kArgmin}; }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double rho_, ratio_;
};

class SovaAlgorithm final : public Algorithm {
 public:
  explicit SovaAlgorithm(double rho) : rho_(rho) {}
  std::string name() const override { return "sova"; }
  std::vector<std::string> required_capabilities() const override { return {capability::kArgmin}; }
  NodeList make_nodes(const RunContext& ctx) const override;

 private:
  double rho_;
};

}  // namespace dopt::admm
