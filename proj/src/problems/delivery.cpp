#include "dopt/problems/delivery.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace dopt::problems {

namespace {

struct Row {
  std::vector<std::pair<Eigen::Index, double>> coef;
  double rhs = 0.0;
  std::vector<int> robots;
};

ConstraintSet assemble(const std::vector<const Row*>& rows, Eigen::Index n, const Vector& lo,
                       const Vector& hi) {
  ConstraintSet cons;
  if (!rows.empty()) {
    std::vector<Eigen::Triplet<double>> trip;
    Vector rhs(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      for (const auto& [c, v] : rows[k]->coef) trip.emplace_back(static_cast<int>(k), static_cast<int>(c), v);
      rhs[static_cast<Eigen::Index>(k)] = rows[k]->rhs;
    }
    SparseMatrix a(static_cast<Eigen::Index>(rows.size()), n);
    a.setFromTriplets(trip.begin(), trip.end());
    cons.set_affine(std::move(a), std::move(rhs));
  }
  if (lo.size()) cons.set_box(lo, hi);
  return cons;
}

struct Layout {
  const DeliveryInstance& inst;
  std::vector<Row> rows;
  Vector lo, hi;

  void dynamics(int r) {
    const int cd = inst.control_dim(r);
    const double dt = inst.dt;
    for (int t = 0; t < inst.steps; ++t) {
      const Eigen::Index x0 = inst.state_index(r, t), x1 = inst.state_index(r, t + 1);
      const Eigen::Index u = inst.control_index(r, t);
      for (int c = 0; c < cd; ++c) {
        // p' = p + dt v + ½dt² u
        rows.push_back({{{x1 + c, 1.0}, {x0 + c, -1.0}, {x0 + cd + c, -dt}, {u + c, -0.5 * dt * dt}}, 0.0, {r}});
        // v' = v + dt u
        rows.push_back({{{x1 + cd + c, 1.0}, {x0 + cd + c, -1.0}, {u + c, -dt}}, 0.0, {r}});
      }
    }
  }

  void fix_state(int r, int t, const Vector& s) {
    const Eigen::Index x = inst.state_index(r, t);
    for (int c = 0; c < inst.state_dim(r); ++c) rows.push_back({{{x + c, 1.0}}, s[c], {r}});
  }

  void meeting(const Meeting& m) {
    const int g = inst.aerial + m.ground;
    const Eigen::Index xa = inst.state_index(m.aerial, m.time), xg = inst.state_index(g, m.time);
    for (int c = 0; c < 2; ++c) rows.push_back({{{xa + c, 1.0}, {xg + c, -1.0}}, 0.0, {m.aerial, g}});
    rows.push_back({{{xa + 2, 1.0}}, 0.0, {m.aerial, g}});
  }
};

ConstraintSet subset(const std::vector<Row>& rows, const std::set<int>& robots, const DeliveryInstance& inst,
                     const Vector& lo, const Vector& hi) {
  std::vector<const Row*> keep;
  for (const auto& row : rows)
    if (std::all_of(row.robots.begin(), row.robots.end(), [&](int r) { return robots.count(r) > 0; }))
      keep.push_back(&row);
  Vector l = Vector::Constant(inst.dim(), -kInf), h = Vector::Constant(inst.dim(), kInf);
  for (int r : robots) {
    const Eigen::Index a = inst.offsets[r], len = inst.offsets[r + 1] - a;
    if (lo.size()) l.segment(a, len) = lo.segment(a, len);
    if (hi.size()) h.segment(a, len) = hi.segment(a, len);
  }
  return assemble(keep, inst.dim(), lo.size() ? l : Vector(), hi.size() ? h : Vector());
}

}  // namespace

QuadraticObjective DeliveryInstance::local_objective(int r) const {
  const Eigen::Index n = dim();
  Matrix m = Matrix::Zero(n, n);
  const Eigen::Index u = control_index(r, 0);
  for (Eigen::Index k = 0; k < control_weights[r].size(); ++k) m(u + k, u + k) = 2.0 * control_weights[r][k];
  return QuadraticObjective(m, Vector::Zero(n), 0.0, local[r]);
}

double DeliveryInstance::global_cost(const Vector& z) const {
  double f = 0.0;
  for (int r = 0; r < robots(); ++r) {
    const Vector u = z.segment(control_index(r, 0), control_weights[r].size());
    f += u.dot(control_weights[r].cwiseProduct(u));
  }
  return f;
}

solvers::QuadraticProgram DeliveryInstance::global_program() const {
  solvers::QuadraticProgram qp;
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < robots(); ++r) {
    const Eigen::Index u = control_index(r, 0);
    for (Eigen::Index k = 0; k < control_weights[r].size(); ++k)
      trip.emplace_back(static_cast<int>(u + k), static_cast<int>(u + k), 2.0 * control_weights[r][k]);
  }
  qp.hessian = SparseMatrix(dim(), dim());
  qp.hessian.setFromTriplets(trip.begin(), trip.end());
  qp.linear = Vector::Zero(dim());
  qp.constraints = common;
  return qp;
}

DeliveryInstance build_delivery_instance(const DeliveryOptions& o) {
  if (o.aerial < 1 || o.ground < 1) throw ArgumentError("delivery needs aerial and ground robots");
  if (o.steps < 2) throw ArgumentError("delivery needs T >= 2");
  if (!(o.dt > 0.0)) throw ArgumentError("delivery needs dt > 0");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DeliveryInstance inst;
  inst.aerial = o.aerial;
  inst.ground = o.ground;
  inst.steps = o.steps;
  inst.dt = o.dt;
  inst.offsets.push_back(0);
  for (int r = 0; r < inst.robots(); ++r)
    inst.offsets.push_back(inst.offsets.back() + inst.state_dim(r) * (o.steps + 1) + inst.control_dim(r) * o.steps);

  for (int r = 0; r < inst.robots(); ++r) {
    const int cd = inst.control_dim(r);
    Vector q(cd * o.steps);
    for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = 0.5 + unit(rng);
    inst.control_weights.push_back(q);
    Vector s = Vector::Zero(inst.state_dim(r)), f = Vector::Zero(inst.state_dim(r));
    for (int c = 0; c < 2; ++c) {
      s[c] = 0.1 + 0.8 * unit(rng);
      f[c] = 0.1 + 0.8 * unit(rng);
    }
    if (r < o.aerial) s[2] = f[2] = o.station_height;
    inst.start.push_back(s);
    inst.finish.push_back(f);
  }

  if (!o.meetings.empty()) {
    inst.meetings = o.meetings;
  } else if (o.default_meetings) {
    for (int i = 0; i < o.aerial; ++i) inst.meetings.push_back({i, i % o.ground, 1 + (2 + i) % (o.steps - 1)});
  }
  for (const auto& m : inst.meetings) {
    if (m.aerial < 0 || m.aerial >= o.aerial || m.ground < 0 || m.ground >= o.ground || m.time < 1 ||
        m.time >= o.steps)
      throw ArgumentError("meeting (aerial " + std::to_string(m.aerial) + ", ground " + std::to_string(m.ground) +
                          ", t " + std::to_string(m.time) + ") is out of range");
  }

  Layout lay{inst, {}, {}, {}};
  for (int r = 0; r < inst.robots(); ++r) {
    lay.dynamics(r);
    lay.fix_state(r, 0, inst.start[r]);
    lay.fix_state(r, o.steps, inst.finish[r]);
  }
  for (const auto& m : inst.meetings) lay.meeting(m);

  if (o.boxes) {
    lay.lo = Vector::Constant(inst.dim(), -kInf);
    lay.hi = Vector::Constant(inst.dim(), kInf);
    for (int r = 0; r < inst.robots(); ++r) {
      const int cd = inst.control_dim(r);
      for (int t = 0; t < o.steps; ++t) {
        lay.lo.segment(inst.control_index(r, t), cd).setConstant(-o.control_max);
        lay.hi.segment(inst.control_index(r, t), cd).setConstant(o.control_max);
      }
      for (int t = 0; t <= o.steps; ++t) {
        const Eigen::Index x = inst.state_index(r, t);
        if (r < o.aerial) {
          lay.lo[x + 2] = 0.0;
          lay.hi[x + 2] = o.aerial_height_max;
        } else {
          lay.lo.segment(x, 2).setZero();
          lay.hi.segment(x, 2).setOnes();
          lay.lo.segment(x + 2, 2).setConstant(-o.ground_speed_max);
          lay.hi.segment(x + 2, 2).setConstant(o.ground_speed_max);
        }
      }
    }
  }

  std::vector<const Row*> all;
  for (const auto& row : lay.rows) all.push_back(&row);
  inst.common = assemble(all, inst.dim(), lay.lo, lay.hi);
  for (int r = 0; r < inst.robots(); ++r) {
    // Own rows plus every meeting the robot takes part in.
    std::vector<const Row*> own;
    for (const auto& row : lay.rows)
      if (std::find(row.robots.begin(), row.robots.end(), r) != row.robots.end()) own.push_back(&row);
    Vector l, h;
    if (lay.lo.size()) {
      l = Vector::Constant(inst.dim(), -kInf);
      h = Vector::Constant(inst.dim(), kInf);
      const Eigen::Index a = inst.offsets[r], len = inst.offsets[r + 1] - a;
      l.segment(a, len) = lay.lo.segment(a, len);
      h.segment(a, len) = lay.hi.segment(a, len);
    }
    inst.local.push_back(assemble(own, inst.dim(), l, h));
  }

  // Each meeting pair must be schedulable on its own.
  std::set<std::pair<int, int>> pairs;
  for (const auto& m : inst.meetings) pairs.insert({m.aerial, m.ground});
  for (const auto& [a, g] : pairs) {
    solvers::QuadraticProgram qp;
    qp.hessian = SparseMatrix(inst.dim(), inst.dim());
    qp.hessian.setIdentity();
    qp.linear = Vector::Zero(inst.dim());
    qp.constraints = subset(lay.rows, {a, o.aerial + g}, inst, lay.lo, lay.hi);
    try {
      const auto sol = solvers::solve_qp_interior_point(qp);
      if (qp.constraints.violation(sol.x) > 1e-8) throw SolverError("infeasible", qp.constraints.violation(sol.x));
    } catch (const SolverError&) {
      throw Error("meeting schedule is infeasible for aerial " + std::to_string(a) + " and ground " +
                  std::to_string(g));
    }
  }
  inst.solution = centralized_qp_solve(inst);
  return inst;
}

Vector centralized_qp_solve(const DeliveryInstance& inst) {
  const auto qp = inst.global_program();
  solvers::QpOptions opts;
  opts.tolerance = 1e-10;
  solvers::QpSolution sol;
  try {
    sol = solvers::solve_qp_interior_point(qp, opts);
  } catch (const SolverError& e) {
    throw SolverError("delivery problem is infeasible or ill posed", e.residual(), e.best_iterate());
  }
  if (sol.kkt_residual >= 1e-8) throw SolverError("delivery oracle missed the KKT tolerance", sol.kkt_residual, sol.x);
  return sol.x;
}

ProblemInstance delivery_problem(const DeliveryInstance& inst, double comm_radius) {
  ProblemInstance p;
  p.kind = "delivery";
  for (int r = 0; r < inst.robots(); ++r)
    p.objectives.push_back(std::make_shared<QuadraticObjective>(inst.local_objective(r)));
  p.reference = inst.solution;
  p.common = inst.common;
  std::vector<Point2> pos;
  for (const auto& s : inst.start) pos.emplace_back(s[0], s[1]);
  const double radius = comm_radius > 0.0 ? comm_radius : connecting_radius(pos);
  p.graph = range_limited_graph(pos, radius);
  nlohmann::json meet = nlohmann::json::array();
  for (const auto& m : inst.meetings) meet.push_back({m.aerial, m.ground, m.time});
  p.meta = {{"aerial", inst.aerial}, {"ground", inst.ground}, {"steps", inst.steps},
            {"dt", inst.dt}, {"meetings", meet}, {"n", inst.dim()}};
  return p;
}

}  // namespace dopt::problems
