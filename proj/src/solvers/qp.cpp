#include "dopt/solvers/qp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

namespace dopt::solvers {

namespace {

using Triplet = Eigen::Triplet<double>;
using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

Flops factor_flops(const Ldlt& f) {
  const SparseMatrix l = f.matrixL();
  Flops total = 0;
  for (int k = 0; k < l.outerSize(); ++k) {
    const Flops c = static_cast<Flops>(l.outerIndexPtr()[k + 1] - l.outerIndexPtr()[k]);
    total += c * c + c;
  }
  return total;
}

Flops solve_flops(const Ldlt& f) {
  const SparseMatrix l = f.matrixL();
  return static_cast<Flops>(4 * l.nonZeros() + l.rows());
}

void append_sparse(std::vector<Triplet>& trips, const SparseMatrix& m, Eigen::Index row_off,
                   Eigen::Index col_off, bool transpose = false) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (transpose) trips.emplace_back(col_off + it.col(), row_off + it.row(), it.value());
      else trips.emplace_back(row_off + it.row(), col_off + it.col(), it.value());
    }
  }
}

struct Bounds {
  Vector lo, hi;
  std::vector<char> has_lo, has_hi;
  int count = 0;
};

Bounds make_bounds(const ConstraintSet& c, Eigen::Index n) {
  Bounds b;
  b.lo = c.has_box() ? c.lower() : Vector::Constant(n, -kInf);
  b.hi = c.has_box() ? c.upper() : Vector::Constant(n, kInf);
  b.has_lo.assign(n, 0);
  b.has_hi.assign(n, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    b.has_lo[i] = std::isfinite(b.lo[i]);
    b.has_hi[i] = std::isfinite(b.hi[i]);
    b.count += b.has_lo[i] + b.has_hi[i];
  }
  return b;
}

// Moves coordinates with lo == hi out of the box and into the equality rows,
// since an interior point cannot sit strictly between them.
QuadraticProgram fold_fixed_variables(const QuadraticProgram& qp) {
  const ConstraintSet& c = qp.constraints;
  if (!c.has_box()) return qp;
  const Eigen::Index n = qp.dim();
  std::vector<Eigen::Index> fixed;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::isfinite(c.lower()[i]) && c.upper()[i] - c.lower()[i] <= 1e-14 * (1.0 + std::abs(c.lower()[i])))
      fixed.push_back(i);
  if (fixed.empty()) return qp;
  Vector lo = c.lower(), hi = c.upper();
  const Eigen::Index m0 = c.eq_matrix().rows();
  const Eigen::Index m = m0 + static_cast<Eigen::Index>(fixed.size());
  std::vector<Triplet> trips;
  if (m0) append_sparse(trips, c.eq_matrix(), 0, 0);
  Vector b(m);
  if (m0) b.head(m0) = c.eq_rhs();
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const Eigen::Index i = fixed[k];
    trips.emplace_back(m0 + static_cast<Eigen::Index>(k), i, 1.0);
    b[m0 + static_cast<Eigen::Index>(k)] = 0.5 * (lo[i] + hi[i]);
    lo[i] = -kInf;
    hi[i] = kInf;
  }
  SparseMatrix a(m, n);
  a.setFromTriplets(trips.begin(), trips.end());
  QuadraticProgram out{qp.hessian, qp.linear, ConstraintSet()};
  out.constraints.set_box(lo, hi).set_affine(std::move(a), std::move(b));
  return out;
}

// Regularised quasidefinite solve [K + δ blocks] with refinement against the
// exact matrix.
class KktSolver {
 public:
  KktSolver(const SparseMatrix& h, const Vector& sigma, const SparseMatrix& a, double delta)
      : n_(h.rows()), m_(a.rows()) {
    std::vector<Triplet> trips;
    trips.reserve(h.nonZeros() + 2 * a.nonZeros() + n_ + m_);
    append_sparse(trips, h, 0, 0);
    for (Eigen::Index i = 0; i < n_; ++i) trips.emplace_back(i, i, sigma[i]);
    append_sparse(trips, a, n_, 0);
    append_sparse(trips, a, n_, 0, true);
    exact_.resize(n_ + m_, n_ + m_);
    exact_.setFromTriplets(trips.begin(), trips.end());
    for (Eigen::Index i = 0; i < n_; ++i) trips.emplace_back(i, i, delta);
    for (Eigen::Index i = 0; i < m_; ++i) trips.emplace_back(n_ + i, n_ + i, -delta);
    SparseMatrix reg(n_ + m_, n_ + m_);
    reg.setFromTriplets(trips.begin(), trips.end());
    ldlt_.compute(reg);
    ok_ = ldlt_.info() == Eigen::Success;
    if (ok_) flops_ += factor_flops(ldlt_);
  }

  bool ok() const { return ok_; }
  Flops flops() const { return flops_; }

  Vector solve(const Vector& rhs) {
    Vector sol = ldlt_.solve(rhs);
    flops_ += solve_flops(ldlt_);
    double best = (rhs - exact_ * sol).lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 4 && best > 0.0; ++it) {
      const Vector r = rhs - exact_ * sol;
      const Vector cand = sol + ldlt_.solve(r);
      flops_ += solve_flops(ldlt_) + 2 * static_cast<Flops>(exact_.nonZeros());
      const double res = (rhs - exact_ * cand).lpNorm<Eigen::Infinity>();
      if (!(res < best)) break;
      best = res;
      sol = cand;
    }
    return sol;
  }

 private:
  Eigen::Index n_, m_;
  SparseMatrix exact_;
  Ldlt ldlt_;
  bool ok_ = false;
  Flops flops_ = 0;
};

double max_step(const Vector& v, const Vector& dv, const std::vector<char>& mask) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (mask[i] && dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

double scale_of(const QuadraticProgram& qp) {
  double s = qp.linear.size() ? qp.linear.lpNorm<Eigen::Infinity>() : 0.0;
  if (qp.constraints.has_equalities() && qp.constraints.eq_rhs().size())
    s = std::max(s, qp.constraints.eq_rhs().lpNorm<Eigen::Infinity>());
  return 1.0 + s;
}

// Fixes the identified active bounds and solves the remaining equality QP.
bool polish(const QuadraticProgram& qp, const Bounds& bd, const Vector& x_ipm, const Vector& zl,
            const Vector& zu, double ratio, QpSolution& out) {
  const Eigen::Index n = qp.dim();
  const ConstraintSet& c = qp.constraints;
  const Eigen::Index m = c.eq_matrix().rows();
  Vector x = x_ipm;
  std::vector<Eigen::Index> free_idx;
  std::vector<Eigen::Index> pos(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sl = bd.has_lo[i] ? x_ipm[i] - bd.lo[i] : kInf;
    const double su = bd.has_hi[i] ? bd.hi[i] - x_ipm[i] : kInf;
    const bool act_lo = bd.has_lo[i] && zl[i] > ratio * sl;
    const bool act_hi = bd.has_hi[i] && zu[i] > ratio * su;
    if (act_lo && (!act_hi || zl[i] >= zu[i])) x[i] = bd.lo[i];
    else if (act_hi) x[i] = bd.hi[i];
    else {
      pos[i] = static_cast<Eigen::Index>(free_idx.size());
      free_idx.push_back(i);
    }
  }
  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  Vector xfix = x;
  for (Eigen::Index i : free_idx) xfix[i] = 0.0;

  std::vector<Triplet> ht, at;
  for (int k = 0; k < qp.hessian.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(qp.hessian, k); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) ht.emplace_back(pos[it.row()], pos[it.col()], it.value());
  if (m) {
    for (int k = 0; k < c.eq_matrix().outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(c.eq_matrix(), k); it; ++it)
        if (pos[it.col()] >= 0) at.emplace_back(it.row(), pos[it.col()], it.value());
  }
  SparseMatrix hf(nf, nf), af(m, nf);
  hf.setFromTriplets(ht.begin(), ht.end());
  af.setFromTriplets(at.begin(), at.end());

  const Vector grad_fix = qp.hessian * xfix + qp.linear;
  Vector rhs(nf + m);
  for (Eigen::Index k = 0; k < nf; ++k) rhs[k] = -grad_fix[free_idx[k]];
  if (m) rhs.tail(m) = c.eq_rhs() - c.eq_matrix() * xfix;

  KktSolver kkt(hf, Vector::Zero(nf), af, 1e-11);
  if (!kkt.ok()) return false;
  const Vector sol = kkt.solve(rhs);
  for (Eigen::Index k = 0; k < nf; ++k) x[free_idx[k]] = sol[k];
  out.x = x;
  out.eq_multipliers = m ? Vector(-sol.tail(m)) : Vector();
  Vector z = qp.hessian * x + qp.linear;
  if (m) z -= c.eq_matrix().transpose() * out.eq_multipliers;
  for (Eigen::Index i : free_idx) z[i] = 0.0;
  out.bound_multipliers = z;
  out.flops += kkt.flops();
  return true;
}

}  // namespace

double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol) {
  const Eigen::Index n = qp.dim();
  const ConstraintSet& c = qp.constraints;
  Vector stat = qp.hessian * sol.x + qp.linear - sol.bound_multipliers;
  if (c.has_equalities()) stat -= c.eq_matrix().transpose() * sol.eq_multipliers;
  double r = n ? stat.lpNorm<Eigen::Infinity>() : 0.0;
  r = std::max(r, c.violation(sol.x));
  const Bounds bd = make_bounds(c, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = sol.bound_multipliers[i];
    if (z > 0.0) {
      r = std::max(r, bd.has_lo[i] ? std::min(z, std::abs(sol.x[i] - bd.lo[i])) : z);
    } else if (z < 0.0) {
      r = std::max(r, bd.has_hi[i] ? std::min(-z, std::abs(bd.hi[i] - sol.x[i])) : -z);
    }
  }
  return r;
}

QpSolution solve_qp_interior_point(const QuadraticProgram& input, const QpOptions& opts) {
  const QuadraticProgram qp = fold_fixed_variables(input);
  const Eigen::Index n = qp.dim();
  const ConstraintSet& c = qp.constraints;
  const Eigen::Index m = c.eq_matrix().rows();
  const SparseMatrix a = m ? c.eq_matrix() : SparseMatrix(0, n);
  const Vector b = m ? c.eq_rhs() : Vector();
  const Bounds bd = make_bounds(c, n);
  const double scale = scale_of(qp);
  const double tol = opts.tolerance * scale;

  Vector x(n), zl = Vector::Zero(n), zu = Vector::Zero(n), y = Vector::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (bd.has_lo[i] && bd.has_hi[i]) x[i] = 0.5 * (bd.lo[i] + bd.hi[i]);
    else if (bd.has_lo[i]) x[i] = std::max(0.0, bd.lo[i] + 1.0);
    else if (bd.has_hi[i]) x[i] = std::min(0.0, bd.hi[i] - 1.0);
    else x[i] = 0.0;
    if (bd.has_lo[i]) zl[i] = 1.0;
    if (bd.has_hi[i]) zu[i] = 1.0;
  }

  QpSolution best;
  Flops flops = 0;
  int iter = 0;
  double delta = 1e-9;
  Vector sl(n), su(n);
  auto slacks = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      sl[i] = bd.has_lo[i] ? x[i] - bd.lo[i] : 1.0;
      su[i] = bd.has_hi[i] ? bd.hi[i] - x[i] : 1.0;
    }
  };
  auto mu_of = [&] {
    if (bd.count == 0) return 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bd.has_lo[i]) s += sl[i] * zl[i];
      if (bd.has_hi[i]) s += su[i] * zu[i];
    }
    return s / bd.count;
  };

  for (; iter < opts.max_iterations; ++iter) {
    slacks();
    const double mu = mu_of();
    Vector rd = qp.hessian * x + qp.linear - zl + zu;
    if (m) rd -= a.transpose() * y;
    const Vector rp = m ? Vector(a * x - b) : Vector();
    flops += 2 * static_cast<Flops>(qp.hessian.nonZeros() + 2 * a.nonZeros()) + 6 * n;
    const double rd_n = n ? rd.lpNorm<Eigen::Infinity>() : 0.0;
    const double rp_n = m ? rp.lpNorm<Eigen::Infinity>() : 0.0;
    double comp = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bd.has_lo[i]) comp = std::max(comp, std::min(zl[i], sl[i]));
      if (bd.has_hi[i]) comp = std::max(comp, std::min(zu[i], su[i]));
    }
    if (rd_n <= tol && rp_n <= tol && comp <= 0.1 * tol) break;

    Vector sigma(n);
    for (Eigen::Index i = 0; i < n; ++i)
      sigma[i] = (bd.has_lo[i] ? zl[i] / sl[i] : 0.0) + (bd.has_hi[i] ? zu[i] / su[i] : 0.0);
    auto kkt_ptr = std::make_unique<KktSolver>(qp.hessian, sigma, a, delta);
    while (!kkt_ptr->ok() && delta < 1e-2) {
      delta *= 100.0;
      kkt_ptr = std::make_unique<KktSolver>(qp.hessian, sigma, a, delta);
    }
    if (!kkt_ptr->ok()) break;
    KktSolver& kkt = *kkt_ptr;

    auto direction = [&](const Vector& rcl, const Vector& rcu, Vector& dx, Vector& dy, Vector& dzl,
                         Vector& dzu) {
      Vector rhs(n + m);
      for (Eigen::Index i = 0; i < n; ++i) {
        double v = -rd[i];
        if (bd.has_lo[i]) v += rcl[i] / sl[i];
        if (bd.has_hi[i]) v -= rcu[i] / su[i];
        rhs[i] = v;
      }
      if (m) rhs.tail(m) = -rp;
      const Vector sol = kkt.solve(rhs);
      dx = sol.head(n);
      dy = m ? Vector(-sol.tail(m)) : Vector();
      dzl = Vector::Zero(n);
      dzu = Vector::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (bd.has_lo[i]) dzl[i] = (rcl[i] - zl[i] * dx[i]) / sl[i];
        if (bd.has_hi[i]) dzu[i] = (rcu[i] + zu[i] * dx[i]) / su[i];
      }
    };

    auto step_lengths = [&](const Vector& dx, const Vector& dzl, const Vector& dzu) {
      double ap = 1.0, ad = 1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (bd.has_lo[i] && dx[i] < 0.0) ap = std::min(ap, -sl[i] / dx[i]);
        if (bd.has_hi[i] && dx[i] > 0.0) ap = std::min(ap, su[i] / dx[i]);
      }
      ad = std::min(max_step(zl, dzl, bd.has_lo), max_step(zu, dzu, bd.has_hi));
      return std::pair{ap, ad};
    };

    Vector rcl = Vector::Zero(n), rcu = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (bd.has_lo[i]) rcl[i] = -sl[i] * zl[i];
      if (bd.has_hi[i]) rcu[i] = -su[i] * zu[i];
    }
    Vector dx, dy, dzl, dzu;
    direction(rcl, rcu, dx, dy, dzl, dzu);
    if (bd.count > 0) {
      auto [ap, ad] = step_lengths(dx, dzl, dzu);
      double mu_aff = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (bd.has_lo[i]) mu_aff += (sl[i] + ap * dx[i]) * (zl[i] + ad * dzl[i]);
        if (bd.has_hi[i]) mu_aff += (su[i] - ap * dx[i]) * (zu[i] + ad * dzu[i]);
      }
      mu_aff /= bd.count;
      const double s = std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3.0);
      const double sig = std::min(1.0, s);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (bd.has_lo[i]) rcl[i] = sig * mu - sl[i] * zl[i] - dx[i] * dzl[i];
        if (bd.has_hi[i]) rcu[i] = sig * mu - su[i] * zu[i] + dx[i] * dzu[i];
      }
      direction(rcl, rcu, dx, dy, dzl, dzu);
    }
    auto [ap, ad] = step_lengths(dx, dzl, dzu);
    const double eta = 0.995;
    ap = std::min(1.0, eta * ap);
    ad = std::min(1.0, eta * ad);
    if (bd.count == 0) ap = ad = 1.0;
    // Split step lengths break dual feasibility when the Hessian couples x and z.
    if (qp.hessian.nonZeros() > 0) ap = ad = std::min(ap, ad);
    Vector x_new, zl_new, zu_new;
    bool interior = false;
    for (int cut = 0; cut < 30; ++cut) {
      if (cut > 0) ap *= 0.5, ad *= 0.5;
      x_new = x + ap * dx;
      zl_new = zl + ad * dzl;
      zu_new = zu + ad * dzu;
      interior = all_finite(x_new) && all_finite(zl_new) && all_finite(zu_new);
      for (Eigen::Index i = 0; interior && i < n; ++i)
        interior = (!bd.has_lo[i] || (x_new[i] > bd.lo[i] && zl_new[i] > 0.0)) &&
                   (!bd.has_hi[i] || (x_new[i] < bd.hi[i] && zu_new[i] > 0.0));
      if (interior) break;
    }
    if (!interior) break;
    x = x_new;
    if (m) y += ad * dy;
    zl = zl_new;
    zu = zu_new;
    flops += kkt.flops() + 20 * static_cast<Flops>(n);
  }

  QpSolution ipm;
  ipm.x = x;
  ipm.eq_multipliers = y;
  ipm.bound_multipliers = zl - zu;
  ipm.iterations = iter;
  ipm.kkt_residual = kkt_residual(qp, ipm);
  best = ipm;

  if (opts.polish && bd.count > 0) {
    // Weakly active bounds stay free under the stricter ratio.
    for (double ratio : {1.0, 100.0}) {
      QpSolution pol;
      if (!polish(qp, bd, x, zl, zu, ratio, pol)) continue;
      pol.iterations = iter;
      pol.kkt_residual = kkt_residual(qp, pol);
      flops += pol.flops;
      // Multipliers are not unique when an active bound is also pinned by equality rows.
      QpSolution mixed = ipm;
      mixed.x = pol.x;
      mixed.kkt_residual = kkt_residual(qp, mixed);
      if (pol.kkt_residual < best.kkt_residual) best = pol;
      if (mixed.kkt_residual < best.kkt_residual) best = mixed;
    }
  }
  best.flops = flops;
  // Report multipliers against the caller's equality rows only.
  if (input.constraints.has_equalities()) {
    const Eigen::Index m_in = input.constraints.eq_matrix().rows();
    Vector z = best.bound_multipliers;
    const Vector y_all = best.eq_multipliers;
    if (m > m_in) {
      // Multipliers of folded fixed coordinates become bound multipliers.
      z += c.eq_matrix().bottomRows(m - m_in).transpose() * y_all.tail(m - m_in);
    }
    best.eq_multipliers = y_all.head(m_in);
    best.bound_multipliers = z;
  } else if (m > 0) {
    best.bound_multipliers += c.eq_matrix().transpose() * best.eq_multipliers;
    best.eq_multipliers = Vector();
  }
  best.kkt_residual = kkt_residual(input, best);
  if (!(best.kkt_residual <= tol * 10.0) || !all_finite(best.x))
    throw SolverError("interior point did not reach tolerance", best.kkt_residual, best.x);
  return best;
}

QpSolution solve_qp_separable(const Vector& d, const Vector& c, const ConstraintSet& cons,
                              const QpOptions& opts, SeparableWarmStart* warm) {
  const Eigen::Index n = c.size();
  if (d.size() != n) throw ArgumentError("diagonal Hessian has wrong size");
  if (!(d.minCoeff() > 0.0)) throw ArgumentError("separable solver needs a positive diagonal");
  const Vector lo = cons.has_box() ? cons.lower() : Vector::Constant(n, -kInf);
  const Vector hi = cons.has_box() ? cons.upper() : Vector::Constant(n, kInf);
  const Vector dinv = d.cwiseInverse();
  QpSolution sol;

  if (!cons.has_equalities()) {
    sol.x = (-c.cwiseProduct(dinv)).cwiseMax(lo).cwiseMin(hi);
    sol.bound_multipliers = d.cwiseProduct(sol.x) + c;
    sol.flops = 4 * static_cast<Flops>(n);
    sol.kkt_residual = 0.0;
    return sol;
  }

  const SparseMatrix& a = cons.eq_matrix();
  const Vector& b = cons.eq_rhs();
  const Eigen::Index m = a.rows();
  const SparseMatrix at = a.transpose();
  const double tol = opts.tolerance * (1.0 + (m ? b.lpNorm<Eigen::Infinity>() : 0.0));
  Vector y = (warm && warm->eq_multipliers.size() == m) ? warm->eq_multipliers : Vector::Zero(m);

  Vector x(n), unclipped(n);
  auto primal = [&](const Vector& yy) {
    unclipped = (at * yy - c).cwiseProduct(dinv);
    x = unclipped.cwiseMax(lo).cwiseMin(hi);
  };
  auto dual_value = [&](const Vector& yy) {
    return 0.5 * x.dot(d.cwiseProduct(x)) + c.dot(x) - yy.dot(a * x - b);
  };

  Flops flops = 0;
  const Flops nnz = static_cast<Flops>(a.nonZeros());
  primal(y);
  Vector r = b - a * x;
  double res = r.lpNorm<Eigen::Infinity>();
  double best_res = res;
  Vector best_x = x;
  const int max_it = opts.max_iterations;
  int it = 0;
  Ldlt ldlt;
  bool analyzed = false;
  for (; it < max_it && res > tol; ++it) {
    Vector jd(n);
    for (Eigen::Index i = 0; i < n; ++i) jd[i] = (unclipped[i] > lo[i] && unclipped[i] < hi[i]) ? dinv[i] : 0.0;
    SparseMatrix mtx = a * jd.asDiagonal() * at;
    double diag_max = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) diag_max = std::max(diag_max, mtx.coeff(i, i));
    const double eps = 1e-10 * (1.0 + diag_max);
    for (Eigen::Index i = 0; i < m; ++i) mtx.coeffRef(i, i) += eps;
    if (!analyzed) {
      ldlt.analyzePattern(mtx);
      analyzed = true;
    }
    ldlt.factorize(mtx);
    if (ldlt.info() != Eigen::Success) {
      ldlt.compute(mtx);
      if (ldlt.info() != Eigen::Success) break;
    }
    const Vector dy = ldlt.solve(r);
    flops += 4 * nnz + factor_flops(ldlt) + solve_flops(ldlt) + 6 * static_cast<Flops>(n);

    const double g0 = dual_value(y);
    const double slope = r.dot(dy);
    double t = 1.0;
    Vector y_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      y_new = y + t * dy;
      primal(y_new);
      flops += 2 * nnz + 6 * static_cast<Flops>(n);
      if (dual_value(y_new) >= g0 + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      primal(y);
      break;
    }
    y = y_new;
    r = b - a * x;
    res = r.lpNorm<Eigen::Infinity>();
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (y.lpNorm<Eigen::Infinity>() > 1e14) break;
  }
  if (!(res <= tol)) throw SolverError("separable QP did not converge", best_res, best_x);
  if (warm) warm->eq_multipliers = y;
  sol.x = x;
  sol.eq_multipliers = y;
  sol.bound_multipliers = d.cwiseProduct(x) + c - at * y;
  for (Eigen::Index i = 0; i < n; ++i)
    if (unclipped[i] > lo[i] && unclipped[i] < hi[i]) sol.bound_multipliers[i] = 0.0;
  sol.iterations = it;
  sol.flops = flops;
  sol.kkt_residual = res;
  return sol;
}

QpSolution minimize_quadratic(const Matrix& h, const Vector& c, const ConstraintSet& cons,
                              const QpOptions& opts, SeparableWarmStart* warm) {
  const Eigen::Index n = c.size();
  if (h.rows() != n || h.cols() != n) throw ArgumentError("Hessian and linear term differ in size");
  if (cons.empty()) {
    Eigen::LLT<Matrix> llt(h);
    if (llt.info() != Eigen::Success) throw SolverError("unconstrained quadratic is not strictly convex", kInf);
    QpSolution sol;
    sol.x = llt.solve(-c);
    sol.bound_multipliers = Vector::Zero(n);
    sol.flops = flops::cholesky(n) + flops::chol_solve(n);
    sol.kkt_residual = (h * sol.x + c).lpNorm<Eigen::Infinity>();
    return sol;
  }
  const Vector diag = h.diagonal();
  const bool is_diag = (h - Matrix(diag.asDiagonal())).isZero(0.0);
  // The dual Newton stalls on badly scaled diagonals.
  if (is_diag && diag.minCoeff() > 0.0 && diag.maxCoeff() <= 1e4 * diag.minCoeff()) {
    try {
      return solve_qp_separable(diag, c, cons, opts, warm);
    } catch (const SolverError&) {
      if (warm) warm->eq_multipliers = Vector();
    }
  }
  QuadraticProgram qp{h.sparseView(), c, cons};
  return solve_qp_interior_point(qp, opts);
}

}  // namespace dopt::solvers
