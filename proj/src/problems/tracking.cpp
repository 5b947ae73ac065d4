#include "dopt/problems/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dopt::problems {

namespace {

// Accumulates Σ ‖z − H x‖²_Λ as ½ xᵀ M x − bᵀ x + c.
struct LsqAccumulator {
  Matrix m;
  Vector b;
  double c = 0.0;

  explicit LsqAccumulator(Eigen::Index n) : m(Matrix::Zero(n, n)), b(Vector::Zero(n)) {}

  // Residual z − Σ_k blocks[k].second · x[blocks[k].first : +4].
  void add(const std::vector<std::pair<Eigen::Index, Matrix>>& blocks, const Vector& z,
           const Matrix& lambda) {
    for (const auto& [ci, hi] : blocks) {
      b.segment(ci, hi.cols()) += 2.0 * hi.transpose() * lambda * z;
      for (const auto& [cj, hj] : blocks)
        m.block(ci, cj, hi.cols(), hj.cols()) += 2.0 * hi.transpose() * lambda * hj;
    }
    c += z.dot(lambda * z);
  }
};

Eigen::Vector2d position_at(const Vector& truth, int t) {
  return truth.segment<2>(4 * t);
}

}  // namespace

Matrix tracking_dynamics(double dt) {
  Matrix a = Matrix::Identity(4, 4);
  a(0, 2) = dt;
  a(1, 3) = dt;
  return a;
}

Matrix tracking_observation() {
  Matrix c = Matrix::Zero(2, 4);
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  return c;
}

Matrix selection_matrix(int steps, const std::vector<int>& times) {
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(times.size()), steps);
  for (std::size_t r = 0; r < times.size(); ++r) {
    if (times[r] < 0 || times[r] >= steps) throw ArgumentError("observation time out of range");
    g(static_cast<Eigen::Index>(r), times[r]) = 1.0;
  }
  return g;
}

Matrix prior_dynamics_matrix(int steps, const Matrix& a) {
  const Eigen::Index n = 4 * steps;
  Matrix p = Matrix::Identity(n, n);
  for (int t = 1; t < steps; ++t) p.block(4 * t, 4 * (t - 1), 4, 4) = -a;
  return p;
}

Vector TrackingInstance::block_z(int i) const {
  const auto& obs = obs_times[i];
  Vector z = Vector::Zero(dim() + 2 * static_cast<Eigen::Index>(obs.size()));
  z.head(4) = mu0;
  for (std::size_t r = 0; r < obs.size(); ++r) z.segment<2>(dim() + 2 * static_cast<Eigen::Index>(r)) = measurements[i][r];
  return z;
}

Matrix TrackingInstance::block_h(int i) const {
  const auto& obs = obs_times[i];
  const Eigen::Index m = 2 * static_cast<Eigen::Index>(obs.size());
  Matrix h(dim() + m, dim());
  h.topRows(dim()) = prior_dynamics_matrix(steps, A);
  h.bottomRows(m).setZero();
  for (std::size_t r = 0; r < obs.size(); ++r)
    h.block(dim() + 2 * static_cast<Eigen::Index>(r), 4 * obs[r], 2, 4) = C;
  return h;
}

Matrix TrackingInstance::block_w(int i) const {
  const Eigen::Index m = 2 * static_cast<Eigen::Index>(obs_times[i].size());
  Matrix w = Matrix::Zero(dim() + m, dim() + m);
  w.block(0, 0, 4, 4) = sigma0;
  for (int t = 1; t < steps; ++t) w.block(4 * t, 4 * t, 4, 4) = Q;
  for (Eigen::Index r = 0; r < m / 2; ++r) w.block(dim() + 2 * r, dim() + 2 * r, 2, 2) = R;
  return w;
}

QuadraticObjective TrackingInstance::local_objective(int i) const {
  const double nn = static_cast<double>(robots);
  LsqAccumulator acc(dim());
  const Matrix i4 = Matrix::Identity(4, 4);
  acc.add({{0, i4}}, mu0, sigma0.inverse() / nn);
  const Matrix q_inv = Q.inverse() / nn;
  for (int t = 0; t + 1 < steps; ++t) acc.add({{4 * t, -A}, {4 * (t + 1), i4}}, Vector::Zero(4), q_inv);
  const Matrix r_inv = R.inverse();
  for (std::size_t r = 0; r < obs_times[i].size(); ++r)
    acc.add({{4 * obs_times[i][r], C}}, measurements[i][r], r_inv);
  return QuadraticObjective(acc.m, acc.b, acc.c);
}

double TrackingInstance::global_cost(const Vector& x) const {
  const Matrix s_inv = sigma0.inverse(), q_inv = Q.inverse(), r_inv = R.inverse();
  const Vector e0 = x.head(4) - mu0;
  double f = e0.dot(s_inv * e0);
  for (int t = 0; t + 1 < steps; ++t) {
    const Vector e = x.segment<4>(4 * (t + 1)) - A * x.segment<4>(4 * t);
    f += e.dot(q_inv * e);
  }
  for (int i = 0; i < robots; ++i) {
    for (std::size_t r = 0; r < obs_times[i].size(); ++r) {
      const Vector e = measurements[i][r] - C * x.segment<4>(4 * obs_times[i][r]);
      f += e.dot(r_inv * e);
    }
  }
  return f;
}

TrackingInstance build_tracking_instance(const TrackingOptions& o) {
  if (o.robots < 1) throw ArgumentError("tracking needs at least one robot");
  if (o.steps < 2) throw ArgumentError("tracking needs T >= 2");
  if (!(o.dt > 0.0)) throw ArgumentError("tracking needs dt > 0");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TrackingInstance inst;
  inst.robots = o.robots;
  inst.steps = o.steps;
  inst.dt = o.dt;
  inst.A = tracking_dynamics(o.dt);
  inst.C = tracking_observation();
  inst.Q = o.process_weight * Matrix::Identity(4, 4);
  inst.R = o.meas_noise * Matrix::Identity(2, 2);
  inst.sigma0 = o.prior_cov * Matrix::Identity(4, 4);

  const int T = o.steps;
  inst.truth = Vector(4 * T);
  if (o.constant_velocity) {
    const double th = 2.0 * std::numbers::pi * unit(rng);
    Vector s(4);
    s << 0.2 + 0.6 * unit(rng), 0.2 + 0.6 * unit(rng), o.speed * std::cos(th), o.speed * std::sin(th);
    for (int t = 0; t < T; ++t) {
      inst.truth.segment<4>(4 * t) = s;
      s = inst.A * s;
    }
  } else {
    // Unicycle steering toward three waypoints in turn.
    Eigen::Vector2d p(0.2 + 0.6 * unit(rng), 0.2 + 0.6 * unit(rng));
    double th = 2.0 * std::numbers::pi * unit(rng);
    std::vector<Eigen::Vector2d> way(3);
    for (auto& w : way) w = Eigen::Vector2d(0.1 + 0.8 * unit(rng), 0.1 + 0.8 * unit(rng));
    std::size_t target = 0;
    for (int t = 0; t < T; ++t) {
      inst.truth.segment<2>(4 * t) = p;
      inst.truth.segment<2>(4 * t + 2) = o.speed * Eigen::Vector2d(std::cos(th), std::sin(th));
      const Eigen::Vector2d to = way[target] - p;
      if (to.norm() < o.speed * o.dt) target = (target + 1) % way.size();
      double err = std::atan2(to.y(), to.x()) - th;
      err = std::atan2(std::sin(err), std::cos(err));
      const double lim = o.turn_rate * o.dt;
      th += std::clamp(err, -lim, lim);
      p += o.speed * o.dt * Eigen::Vector2d(std::cos(th), std::sin(th));
    }
  }

  // Robots hover near the track so each one sees the target for a while.
  inst.robot_positions.resize(o.robots);
  for (int i = 0; i < o.robots; ++i) {
    const int ti = std::min(T - 1, static_cast<int>((i + 0.5) * T / o.robots));
    const double r = 0.5 * o.sensing_range * std::sqrt(unit(rng));
    const double a = 2.0 * std::numbers::pi * unit(rng);
    inst.robot_positions[i] = position_at(inst.truth, ti) + r * Eigen::Vector2d(std::cos(a), std::sin(a));
  }

  inst.mu0 = inst.truth.head(4);
  if (!o.noise_free)
    for (int k = 0; k < 4; ++k) inst.mu0[k] += std::sqrt(o.prior_cov) * gauss(rng);

  inst.obs_times.assign(o.robots, {});
  inst.measurements.assign(o.robots, {});
  for (int i = 0; i < o.robots; ++i) {
    for (int t = 0; t < T; ++t) {
      if ((position_at(inst.truth, t) - inst.robot_positions[i]).norm() > o.sensing_range) continue;
      Eigen::Vector2d y = position_at(inst.truth, t);
      if (!o.noise_free) {
        y.x() += std::sqrt(o.meas_noise) * gauss(rng);
        y.y() += std::sqrt(o.meas_noise) * gauss(rng);
      }
      inst.obs_times[i].push_back(t);
      inst.measurements[i].push_back(y);
    }
  }
  inst.warnings = tracking_warnings(inst);
  inst.solution = centralized_lls_solve(inst);
  return inst;
}

std::vector<std::string> tracking_warnings(const TrackingInstance& inst) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < inst.obs_times.size(); ++i)
    if (inst.obs_times[i].empty()) out.push_back("robot " + std::to_string(i) + " never observes the target");
  return out;
}

Vector centralized_lls_solve(const TrackingInstance& inst) {
  // Stacked H, W over the prior, every dynamics term and every measurement.
  const Eigen::Index n = inst.dim();
  Eigen::Index meas = 0;
  for (const auto& o : inst.obs_times) meas += 2 * static_cast<Eigen::Index>(o.size());
  Matrix h = Matrix::Zero(n + meas, n);
  Vector z = Vector::Zero(n + meas);
  Vector w_inv(n + meas);
  h.topRows(n) = prior_dynamics_matrix(inst.steps, inst.A);
  z.head(4) = inst.mu0;
  w_inv.head(4) = inst.sigma0.diagonal().cwiseInverse();
  for (int t = 1; t < inst.steps; ++t) w_inv.segment<4>(4 * t) = inst.Q.diagonal().cwiseInverse();
  Eigen::Index row = n;
  for (int i = 0; i < inst.robots; ++i) {
    for (std::size_t r = 0; r < inst.obs_times[i].size(); ++r) {
      h.block(row, 4 * inst.obs_times[i][r], 2, 4) = inst.C;
      z.segment<2>(row) = inst.measurements[i][r];
      w_inv.segment<2>(row) = inst.R.diagonal().cwiseInverse();
      row += 2;
    }
  }
  const Matrix normal = h.transpose() * w_inv.asDiagonal() * h;
  const Vector rhs = h.transpose() * w_inv.asDiagonal() * z;
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) throw SolverError("tracking normal equations are singular", kInf);
  Vector x = llt.solve(rhs);
  // One refinement pass.
  x += llt.solve(rhs - normal * x);
  return x;
}

ProblemInstance tracking_problem(const TrackingInstance& inst, double comm_radius) {
  ProblemInstance p;
  p.kind = "tracking";
  for (int i = 0; i < inst.robots; ++i)
    p.objectives.push_back(std::make_shared<QuadraticObjective>(inst.local_objective(i)));
  p.reference = inst.solution;
  p.ground_truth = inst.truth;
  p.warnings = inst.warnings;
  if (inst.robots >= 2) {
    const double radius = comm_radius > 0.0 ? comm_radius : connecting_radius(inst.robot_positions);
    p.graph = range_limited_graph(inst.robot_positions, radius);
  } else {
    p.graph = CommGraph(1, {}, inst.robot_positions);
  }
  p.meta = {{"robots", inst.robots}, {"steps", inst.steps}, {"dt", inst.dt}, {"n", inst.dim()}};
  return p;
}

ProblemInstance tracking_window_problem(const TrackingInstance& inst, int windows) {
  const int T = inst.steps;
  if (windows < 2) throw ArgumentError("window split needs at least two windows");
  if (T - 1 < windows) throw ArgumentError("window split needs T − 1 >= windows");
  std::vector<int> bound(windows + 1);
  for (int i = 0; i <= windows; ++i)
    bound[i] = static_cast<int>(std::lround(static_cast<double>(i) * (T - 1) / windows));

  // Measurements grouped by time.
  std::vector<std::vector<Eigen::Vector2d>> by_time(T);
  for (int i = 0; i < inst.robots; ++i)
    for (std::size_t r = 0; r < inst.obs_times[i].size(); ++r)
      by_time[inst.obs_times[i][r]].push_back(inst.measurements[i][r]);

  ProblemInstance p;
  p.kind = "tracking_windows";
  p.reference = inst.solution;
  p.ground_truth = inst.truth;
  const Matrix i4 = Matrix::Identity(4, 4);
  const Matrix s_inv = inst.sigma0.inverse(), q_inv = inst.Q.inverse(), r_inv = inst.R.inverse();
  for (int w = 0; w < windows; ++w) {
    const int b0 = bound[w], b1 = bound[w + 1];
    const Eigen::Index len = b1 - b0 + 1;
    LsqAccumulator acc(4 * len);
    if (b0 == 0) acc.add({{0, i4}}, inst.mu0, s_inv);
    for (int t = b0; t < b1; ++t)
      acc.add({{4 * (t - b0), -inst.A}, {4 * (t + 1 - b0), i4}}, Vector::Zero(4), q_inv);
    for (int t = b0; t <= b1; ++t) {
      const bool shared = (t == b0 && w > 0) || (t == b1 && w + 1 < windows);
      for (const auto& y : by_time[t]) acc.add({{4 * (t - b0), inst.C}}, y, (shared ? 0.5 : 1.0) * r_inv);
    }
    Eigen::LLT<Matrix> chk(acc.m);
    if (chk.info() != Eigen::Success)
      throw Error("window " + std::to_string(w) + " has too few measurements to be well posed");
    p.objectives.push_back(std::make_shared<QuadraticObjective>(acc.m, acc.b, acc.c));
    p.node_references.push_back(inst.solution.segment(4 * b0, 4 * len));
  }
  p.graph = chain_graph(windows);
  p.maps.assign(windows, {});
  auto selector = [](Eigen::Index len, Eigen::Index step) {
    Matrix s = Matrix::Zero(4, 4 * len);
    s.block(0, 4 * step, 4, 4).setIdentity();
    return s;
  };
  for (int w = 0; w < windows; ++w) {
    const Eigen::Index len = bound[w + 1] - bound[w] + 1;
    if (w > 0) {
      const Eigen::Index plen = bound[w] - bound[w - 1] + 1;
      p.maps[w].emplace_back(selector(len, 0), selector(plen, plen - 1));
    }
    if (w + 1 < windows) {
      const Eigen::Index nlen = bound[w + 2] - bound[w + 1] + 1;
      p.maps[w].emplace_back(selector(len, len - 1), selector(nlen, 0));
    }
  }
  p.meta = {{"windows", windows}, {"steps", T}, {"bounds", bound}};
  return p;
}

}  // namespace dopt::problems
