#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopt/core/constraints.hpp"
#include "dopt/core/types.hpp"
#include "dopt/solvers/qp.hpp"

namespace dopt {

namespace capability {
inline constexpr const char* kGradient = "gradient";
inline constexpr const char* kHessian = "hessian";
inline constexpr const char* kArgmin = "argmin";
}  // namespace capability

// Convex quadratic added to f inside penalized_argmin:
//   ½ xᵀ(isotropic·I + general)x + linearᵀx
struct ProxTerm {
  double isotropic = 0.0;
  Matrix general;  // empty when unused
  Vector linear;
};

struct ArgminResult {
  Vector x;
  double residual = 0.0;
  int iterations = 0;
  Flops flops = 0;
};

// Per-node scratch owned by the caller (factor caches, warm starts).
class ArgminWorkspace {
 public:
  virtual ~ArgminWorkspace() = default;
};

class LocalObjective {
 public:
  virtual ~LocalObjective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  virtual bool has_hessian() const { return false; }
  virtual Matrix hessian(const Vector& x) const;
  // True when the Hessian does not depend on x.
  virtual bool hessian_is_constant() const { return false; }

  virtual bool has_argmin() const { return false; }
  virtual ArgminResult penalized_argmin(const ProxTerm& prox, const Vector& warm,
                                        ArgminWorkspace* ws) const;
  virtual std::unique_ptr<ArgminWorkspace> make_workspace() const { return nullptr; }

  virtual const ConstraintSet& constraints() const;

  virtual Flops gradient_flops() const = 0;
  virtual Flops hessian_flops() const { return 0; }

  virtual nlohmann::json to_json() const = 0;

  bool has_capability(const std::string& cap) const;
};

using ObjectivePtr = std::shared_ptr<const LocalObjective>;

/// f(x) = ½ xᵀ M x − bᵀ x + c over an optional constraint set.
class QuadraticObjective final : public LocalObjective {
 public:
  QuadraticObjective(Matrix m, Vector b, double c = 0.0, ConstraintSet cons = {});

  Eigen::Index dim() const override { return b_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector&) const override { return m_; }
  bool hessian_is_constant() const override { return true; }
  bool has_argmin() const override { return true; }
  ArgminResult penalized_argmin(const ProxTerm& prox, const Vector& warm,
                                ArgminWorkspace* ws) const override;
  std::unique_ptr<ArgminWorkspace> make_workspace() const override;
  const ConstraintSet& constraints() const override { return cons_; }
  Flops gradient_flops() const override;
  Flops hessian_flops() const override { return 0; }
  nlohmann::json to_json() const override;

  const Matrix& m() const { return m_; }
  const Vector& b() const { return b_; }
  double c() const { return c_; }
  bool diagonal() const { return diagonal_; }

 private:
  Matrix m_;
  Vector b_;
  double c_;
  ConstraintSet cons_;
  bool diagonal_;
  int nnz_;
};

/// Caches a dense factorization and a QP warm start across calls with the
/// same penalty.
class QuadraticWorkspace : public ArgminWorkspace {
 public:
  double isotropic = std::numeric_limits<double>::quiet_NaN();
  Matrix general;
  Eigen::LLT<Matrix> llt;
  solvers::SeparableWarmStart warm;
};

/// Gradient that raises DivergenceError when any entry is non-finite.
Vector checked_gradient(const LocalObjective& f, const Vector& x, int iteration,
                        Flops* ops = nullptr);

inline void add_ops(Flops* ops, Flops v) {
  if (ops) *ops += v;
}

struct Anchor {
  double weight;
  Vector point;
};

/// argmin f(x) + yᵀx + Σ (ρ·w/2)‖x − v‖² over the objective's constraints.
ArgminResult local_penalized_argmin(const LocalObjective& f, const Vector& y,
                                    const std::vector<Anchor>& anchors, double rho,
                                    const Vector& warm = {}, ArgminWorkspace* ws = nullptr);

}  // namespace dopt
