#include "dopt/core/objective.hpp"

#include <cmath>

#include "dopt/core/json_io.hpp"

namespace dopt {

Matrix LocalObjective::hessian(const Vector&) const {
  throw CapabilityError(-1, capability::kHessian);
}

ArgminResult LocalObjective::penalized_argmin(const ProxTerm&, const Vector&,
                                              ArgminWorkspace*) const {
  throw CapabilityError(-1, capability::kArgmin);
}

const ConstraintSet& LocalObjective::constraints() const {
  static const ConstraintSet none;
  return none;
}

bool LocalObjective::has_capability(const std::string& cap) const {
  if (cap == capability::kGradient) return true;
  if (cap == capability::kHessian) return has_hessian();
  if (cap == capability::kArgmin) return has_argmin();
  return false;
}

QuadraticObjective::QuadraticObjective(Matrix m, Vector b, double c, ConstraintSet cons)
    : m_(std::move(m)), b_(std::move(b)), c_(c), cons_(std::move(cons)) {
  if (m_.rows() != m_.cols() || m_.rows() != b_.size())
    throw ArgumentError("quadratic objective dimensions disagree");
  if (!(m_ - m_.transpose()).isZero(1e-12 * (1.0 + m_.cwiseAbs().maxCoeff())))
    throw ArgumentError("quadratic objective matrix is not symmetric");
  m_ = 0.5 * (m_ + m_.transpose());
  const Vector d = m_.diagonal();
  diagonal_ = (m_ - Matrix(d.asDiagonal())).isZero(0.0);
  nnz_ = static_cast<int>((m_.array() != 0.0).count());
}

double QuadraticObjective::value(const Vector& x) const {
  return 0.5 * x.dot(m_ * x) - b_.dot(x) + c_;
}

Vector QuadraticObjective::gradient(const Vector& x) const {
  if (diagonal_) return m_.diagonal().cwiseProduct(x) - b_;
  return m_ * x - b_;
}

Flops QuadraticObjective::gradient_flops() const {
  return diagonal_ ? static_cast<Flops>(3 * dim()) : static_cast<Flops>(2 * nnz_ + dim());
}

std::unique_ptr<ArgminWorkspace> QuadraticObjective::make_workspace() const {
  return std::make_unique<QuadraticWorkspace>();
}

ArgminResult QuadraticObjective::penalized_argmin(const ProxTerm& prox, const Vector&,
                                                  ArgminWorkspace* ws) const {
  const Eigen::Index n = dim();
  Vector c = -b_;
  if (prox.linear.size()) {
    if (prox.linear.size() != n) throw ArgumentError("prox linear term has wrong size");
    c += prox.linear;
  }
  auto* qw = dynamic_cast<QuadraticWorkspace*>(ws);
  ArgminResult out;

  if (cons_.empty()) {
    const bool cached = qw && qw->isotropic == prox.isotropic &&
                        qw->general.rows() == prox.general.rows() &&
                        (prox.general.size() == 0 || qw->general == prox.general);
    Eigen::LLT<Matrix> local;
    Eigen::LLT<Matrix>* llt = qw ? &qw->llt : &local;
    if (!cached) {
      Matrix h = m_;
      h.diagonal().array() += prox.isotropic;
      if (prox.general.size()) h += prox.general;
      llt->compute(h);
      if (llt->info() != Eigen::Success) {
        if (qw) qw->isotropic = std::numeric_limits<double>::quiet_NaN();
        throw SolverError("penalized quadratic is not strictly convex", kInf);
      }
      out.flops += flops::cholesky(n);
      if (qw) {
        qw->isotropic = prox.isotropic;
        qw->general = prox.general;
      }
    }
    out.x = llt->solve(-c);
    out.flops += flops::chol_solve(n) + static_cast<Flops>(n);
    out.iterations = 1;
    return out;
  }

  Matrix h = m_;
  h.diagonal().array() += prox.isotropic;
  if (prox.general.size()) h += prox.general;
  solvers::QpOptions opts;
  opts.tolerance = 1e-9;
  const auto sol = solvers::minimize_quadratic(h, c, cons_, opts, qw ? &qw->warm : nullptr);
  out.x = sol.x;
  out.residual = sol.kkt_residual;
  out.iterations = sol.iterations;
  out.flops = sol.flops;
  return out;
}

nlohmann::json QuadraticObjective::to_json() const {
  nlohmann::json j;
  j["type"] = "quadratic";
  j["m"] = matrix_to_json(m_);
  j["b"] = vector_to_json(b_);
  j["c"] = c_;
  j["constraints"] = cons_;
  return j;
}

Vector checked_gradient(const LocalObjective& f, const Vector& x, int iteration, Flops* ops) {
  if (!x.allFinite()) throw DivergenceError(iteration, "non-finite iterate");
  Vector g = f.gradient(x);
  add_ops(ops, f.gradient_flops());
  if (!g.allFinite()) throw DivergenceError(iteration, "non-finite gradient");
  return g;
}

ArgminResult local_penalized_argmin(const LocalObjective& f, const Vector& y,
                                    const std::vector<Anchor>& anchors, double rho,
                                    const Vector& warm, ArgminWorkspace* ws) {
  if (!(rho > 0.0)) throw ArgumentError("penalty weight must be positive");
  const Eigen::Index n = f.dim();
  ProxTerm prox;
  prox.linear = y.size() ? y : Vector::Zero(n);
  for (const auto& a : anchors) {
    if (a.point.size() != n) throw ArgumentError("anchor has wrong dimension");
    prox.isotropic += rho * a.weight;
    prox.linear -= rho * a.weight * a.point;
  }
  return f.penalized_argmin(prox, warm.size() ? warm : Vector(Vector::Zero(n)), ws);
}

}  // namespace dopt
