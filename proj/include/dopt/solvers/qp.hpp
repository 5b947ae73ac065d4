#pragma once

#include "dopt/core/constraints.hpp"
#include "dopt/core/types.hpp"

namespace dopt::solvers {

/// minimize ½ xᵀ H x + cᵀ x  subject to  A x = b,  lower <= x <= upper.
struct QuadraticProgram {
  SparseMatrix hessian;  // symmetric, both triangles stored
  Vector linear;
  ConstraintSet constraints;

  Eigen::Index dim() const { return linear.size(); }
};

struct QpOptions {
  double tolerance = 1e-10;
  int max_iterations = 200;
  bool polish = true;
};

struct QpSolution {
  Vector x;
  Vector eq_multipliers;     // y in  H x + c - Aᵀ y - z = 0
  Vector bound_multipliers;  // z, >= 0 at active lower bounds, <= 0 at upper
  double kkt_residual = 0.0;
  int iterations = 0;
  Flops flops = 0;
};

/// Max-norm KKT residual: stationarity, primal feasibility, dual sign and
/// complementarity.
double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol);

/// Primal-dual interior point (Mehrotra predictor-corrector) on the sparse
/// quasidefinite KKT system, followed by an active-set polish. Throws
/// SolverError when the tolerance is not met.
QpSolution solve_qp_interior_point(const QuadraticProgram& qp, const QpOptions& opts = {});

/// Warm-start state for the separable solver (equality multipliers).
struct SeparableWarmStart {
  Vector eq_multipliers;
};

/// Semismooth Newton on the dual for a strictly convex diagonal Hessian.
/// Each primal iterate is the box-clipped minimizer for the current
/// multipliers, so stationarity and bound complementarity hold exactly and
/// only `A x = b` is driven to tolerance.
QpSolution solve_qp_separable(const Vector& diag_hessian, const Vector& linear,
                              const ConstraintSet& constraints, const QpOptions& opts = {},
                              SeparableWarmStart* warm = nullptr);

/// Dispatch: unconstrained dense solve, box-only diagonal clip, separable
/// dual Newton, or interior point.
QpSolution minimize_quadratic(const Matrix& hessian, const Vector& linear,
                              const ConstraintSet& constraints, const QpOptions& opts = {},
                              SeparableWarmStart* warm = nullptr);

}  // namespace dopt::solvers
