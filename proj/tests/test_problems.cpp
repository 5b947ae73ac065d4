#include <doctest.h>

#include <Eigen/QR>

#include "dopt/bench/registry.hpp"
#include "dopt/problems/delivery.hpp"
#include "dopt/problems/mapping.hpp"
#include "dopt/problems/tracking.hpp"
#include "support.hpp"

using namespace dopt;
using namespace dopt::problems;
using dopt::testing::numeric_gradient;
using dopt::testing::serial;

namespace {

TrackingInstance small_tracking(std::uint64_t seed = 1, int robots = 10, int steps = 16) {
  TrackingOptions o;
  o.robots = robots;
  o.steps = steps;
  o.seed = seed;
  return build_tracking_instance(o);
}

// Whitened least squares built row by row from the raw instance data.
Vector tracking_oracle(const TrackingInstance& inst) {
  const Eigen::Index n = 4 * inst.steps;
  std::vector<Vector> rows;
  std::vector<double> rhs;
  auto add = [&](const Matrix& blocks, Eigen::Index col, const Vector& target, const Matrix& cov, const Matrix* prev,
                 Eigen::Index prev_col) {
    const Matrix wh = cov.inverse().llt().matrixU();
    for (Eigen::Index r = 0; r < blocks.rows(); ++r) {
      Vector row = Vector::Zero(n);
      double b = 0.0;
      for (Eigen::Index k = 0; k < blocks.rows(); ++k) {
        row.segment(col, blocks.cols()) += wh(r, k) * blocks.row(k).transpose();
        if (prev) row.segment(prev_col, prev->cols()) -= wh(r, k) * prev->row(k).transpose();
        b += wh(r, k) * target(k);
      }
      rows.push_back(row);
      rhs.push_back(b);
    }
  };
  add(Matrix::Identity(4, 4), 0, inst.mu0, inst.sigma0, nullptr, 0);
  for (int t = 1; t < inst.steps; ++t) add(Matrix::Identity(4, 4), 4 * t, Vector::Zero(4), inst.Q, &inst.A, 4 * (t - 1));
  for (int i = 0; i < inst.robots; ++i)
    for (std::size_t r = 0; r < inst.obs_times[i].size(); ++r)
      add(inst.C, 4 * inst.obs_times[i][r], inst.measurements[i][r], inst.R, nullptr, 0);
  Matrix a(static_cast<Eigen::Index>(rows.size()), n);
  Vector b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    a.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    b(static_cast<Eigen::Index>(k)) = rhs[k];
  }
  return a.colPivHouseholderQr().solve(b);
}

void check_gradient(const LocalObjective& f, const Vector& x) {
  const Vector g = f.gradient(x);
  const Vector fd = numeric_gradient([&](const Vector& v) { return f.value(v); }, x);
  CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
  if (f.has_hessian()) {
    const Matrix h = f.hessian(x);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const Vector col = numeric_gradient([&](const Vector& v) { return f.gradient(v)(j); }, x);
      CHECK((h.row(j).transpose() - col).norm() <= 1e-5 * std::max(1.0, h.row(j).norm()));
    }
  }
}

}  // namespace

TEST_CASE("tracking model matrices") {
  Matrix a(4, 4);
  a << 1, 0, 0.1, 0, 0, 1, 0, 0.1, 0, 0, 1, 0, 0, 0, 0, 1;
  CHECK(tracking_dynamics(0.1) == a);
  const auto inst = small_tracking();
  CHECK(inst.Q == 0.05 * Matrix::Identity(4, 4));
  CHECK(inst.A == a);
  const Matrix g = selection_matrix(3, {1});
  CHECK(g == (Matrix(1, 3) << 0, 1, 0).finished());
  const Matrix c = tracking_observation();
  Matrix kron = Matrix::Zero(2, 12);
  for (int t = 0; t < 3; ++t) kron.block(0, 4 * t, 2, 4) = g(0, t) * c;
  Matrix expect = Matrix::Zero(2, 12);
  expect.block(0, 4, 2, 4) = c;
  CHECK(kron == expect);
}

TEST_CASE("tracking block construction") {
  const auto inst = small_tracking(3);
  for (int i = 0; i < inst.robots; ++i) {
    const Matrix h = inst.block_h(i);
    CHECK(Eigen::ColPivHouseholderQR<Matrix>(h).rank() == inst.dim());
    const Matrix g = selection_matrix(inst.steps, inst.obs_times[i]);
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (int t = 0; t < inst.steps; ++t)
        CHECK(h.block(inst.dim() + 2 * r, 4 * t, 2, 4) == g(r, t) * inst.C);
    CHECK(h.topRows(inst.dim()) == prior_dynamics_matrix(inst.steps, inst.A));
    const Matrix w = inst.block_w(i);
    CHECK(w.topLeftCorner(4, 4) == inst.sigma0);
    for (int t = 1; t < inst.steps; ++t) CHECK(w.block(4 * t, 4 * t, 4, 4) == inst.Q);
    CHECK(inst.block_z(i).head(4) == inst.mu0);
  }
}

TEST_CASE("tracking oracle solves the normal equations") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto inst = small_tracking(seed);
    const Vector oracle = tracking_oracle(inst);
    CHECK((inst.solution - oracle).norm() <= 1e-9 * (1.0 + oracle.norm()));
    // Global gradient vanishes.
    const Vector g = numeric_gradient([&](const Vector& v) { return inst.global_cost(v); }, inst.solution, 1e-5);
    CHECK(g.cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("tracking local costs sum to the global cost") {
  const auto inst = small_tracking(4);
  std::vector<QuadraticObjective> fs;
  for (int i = 0; i < inst.robots; ++i) fs.push_back(inst.local_objective(i));
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vector x = dopt::testing::random_vector(inst.dim(), rng);
    double sum = 0.0;
    for (const auto& f : fs) sum += f.value(x);
    const double g = inst.global_cost(x);
    CHECK(std::abs(sum - g) <= 1e-10 * std::max(1.0, std::abs(g)));
  }
  for (int i = 0; i < 3; ++i) check_gradient(fs[i], dopt::testing::random_vector(inst.dim(), rng));
}

TEST_CASE("tracking consistency cases") {
  SUBCASE("noise-free linear truth is recovered") {
    TrackingOptions o;
    o.constant_velocity = true;
    o.noise_free = true;
    o.seed = 9;
    const auto inst = build_tracking_instance(o);
    CHECK((inst.solution - inst.truth).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("one robot seeing every step") {
    TrackingOptions o;
    o.robots = 1;
    o.steps = 8;
    o.sensing_range = 10.0;
    const auto inst = build_tracking_instance(o);
    CHECK(inst.obs_times[0].size() == 8);
    const auto f = inst.local_objective(0);
    CHECK((inst.solution - f.m().ldlt().solve(f.b())).norm() < 1e-9);
  }
  SUBCASE("blind robots produce warnings") {
    TrackingOptions o;
    auto inst = build_tracking_instance(o);
    CHECK(inst.warnings.empty());
    inst.obs_times[1].clear();
    inst.measurements[1].clear();
    const auto w = tracking_warnings(inst);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("robot 1") != std::string::npos);
    CHECK(std::isfinite(centralized_lls_solve(inst).norm()));
  }
}

TEST_CASE("delivery without boxes matches the equality-constrained KKT system") {
  DeliveryOptions o;
  o.boxes = false;
  const auto inst = build_delivery_instance(o);
  const auto qp = inst.global_program();
  const Eigen::Index n = inst.dim();
  const Matrix a = Matrix(qp.constraints.eq_matrix());
  const Eigen::Index m = a.rows();
  Matrix kkt = Matrix::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = Matrix(qp.hessian);
  kkt.topRightCorner(n, m) = a.transpose();
  kkt.bottomLeftCorner(m, n) = a;
  Vector rhs(n + m);
  rhs << -qp.linear, qp.constraints.eq_rhs();
  const Vector sol = kkt.fullPivLu().solve(rhs);
  CHECK((inst.solution - sol.head(n)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("delivery oracle feasibility and multipliers") {
  const auto inst = build_delivery_instance({});
  CHECK(inst.robots() == 5);
  CHECK(inst.common.violation(inst.solution) < 1e-8);
  for (int r = 0; r < inst.robots(); ++r) CHECK(inst.local[r].violation(inst.solution) < 1e-8);
  CHECK(inst.meetings.size() == 3);
  for (const auto& mt : inst.meetings) {
    const Vector pa = inst.solution.segment(inst.state_index(mt.aerial, mt.time), 3);
    const Vector pg = inst.solution.segment(inst.state_index(inst.aerial + mt.ground, mt.time), 2);
    CHECK((pa.head(2) - pg).norm() < 1e-8);
    CHECK(std::abs(pa(2)) < 1e-8);
  }
  const auto qp = inst.global_program();
  const auto sol = solvers::solve_qp_interior_point(qp);
  CHECK(solvers::kkt_residual(qp, sol) < 1e-8);
  const Vector& lo = qp.constraints.lower();
  const Vector& hi = qp.constraints.upper();
  for (Eigen::Index i = 0; i < sol.x.size(); ++i) {
    if (sol.bound_multipliers(i) > 1e-8) CHECK(std::abs(sol.x(i) - lo(i)) < 1e-8);
    if (sol.bound_multipliers(i) < -1e-8) CHECK(std::abs(sol.x(i) - hi(i)) < 1e-8);
  }
}

TEST_CASE("delivery binding box") {
  DeliveryOptions o;
  const auto loose = build_delivery_instance(o);
  double umax = 0.0;
  for (int r = 0; r < loose.robots(); ++r) {
    const Eigen::Index u = loose.control_index(r, 0), len = loose.control_weights[r].size();
    umax = std::max(umax, loose.solution.segment(u, len).cwiseAbs().maxCoeff());
  }
  REQUIRE(umax < o.control_max);
  o.control_max = 0.9 * umax;
  const auto inst = build_delivery_instance(o);
  const auto qp = inst.global_program();
  const auto sol = solvers::solve_qp_interior_point(qp);
  int active = 0;
  for (Eigen::Index i = 0; i < sol.x.size(); ++i) {
    if (std::abs(sol.x(i) - qp.constraints.upper()(i)) < 1e-9) {
      ++active;
      CHECK(sol.bound_multipliers(i) <= 1e-9);
    }
    if (std::abs(sol.x(i) - qp.constraints.lower()(i)) < 1e-9) {
      ++active;
      CHECK(sol.bound_multipliers(i) >= -1e-9);
    }
  }
  CHECK(active > 0);
  CHECK(inst.common.violation(inst.solution) < 1e-8);
}

TEST_CASE("delivery costs and constraint split") {
  const auto inst = build_delivery_instance({});
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const Vector z = dopt::testing::random_vector(inst.dim(), rng);
    double sum = 0.0;
    for (int r = 0; r < inst.robots(); ++r) sum += inst.local_objective(r).value(z);
    CHECK(std::abs(sum - inst.global_cost(z)) <= 1e-10 * std::max(1.0, inst.global_cost(z)));
  }
  check_gradient(inst.local_objective(0), dopt::testing::random_vector(inst.dim(), rng));
  // Meeting rows sit in both participants' local sets.
  const auto& mt = inst.meetings.front();
  Vector z = inst.solution;
  z(inst.state_index(mt.aerial, mt.time)) += 0.5;
  CHECK(inst.local[mt.aerial].violation(z) >= 0.5 - 1e-8);
  CHECK(inst.local[inst.aerial + mt.ground].violation(z) >= 0.5 - 1e-8);
}

TEST_CASE("infeasible meeting schedule names the pair") {
  DeliveryOptions o;
  o.control_max = 0.01;
  o.meetings = {{1, 0, 1}};
  try {
    build_delivery_instance(o);
    FAIL("expected an infeasible schedule");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("aerial 1") != std::string::npos);
    CHECK(what.find("ground 0") != std::string::npos);
  }
  o.meetings = {{0, 5, 2}};
  CHECK_THROWS_AS(build_delivery_instance(o), ArgumentError);
}

TEST_CASE("range mapping objective") {
  std::vector<RangeTerm> terms{{0, Point2(0.0, 0.0), 1.0, 1.5}, {0, Point2(1.0, 0.2), 0.7, 1.0},
                               {0, Point2(0.3, 1.1), 0.9, 0.5}};
  const RangeMappingObjective f(2, terms);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) check_gradient(f, dopt::testing::random_vector(4, rng));
  // Single-term gradient w²(‖p − x‖ − d)(x − p)/‖p − x‖.
  const RangeMappingObjective one(1, {terms[0]});
  const Vector x = (Vector(2) << 0.4, -0.8).finished();
  const double dist = x.norm();
  const Vector expect = 1.5 * 1.5 * (dist - 1.0) * x / dist;
  CHECK((one.gradient(x) - expect).norm() < 1e-14);
  // Landmark 1 is never measured.
  CHECK(f.gradient(dopt::testing::random_vector(4, rng)).tail(2).norm() == 0.0);
  // Singular point.
  const Vector at_p = Vector::Zero(2);
  CHECK(one.gradient(at_p).allFinite());
  CHECK(std::isfinite(one.value(at_p)));
  CHECK_THROWS_AS(RangeMappingObjective(1, {{0, Point2(0, 0), -1.0, 1.0}}), ArgumentError);
}

TEST_CASE("mapping oracle on a noise-free trilateration") {
  MappingInstance inst;
  inst.robots = 3;
  inst.landmarks = 1;
  inst.steps = 1;
  inst.landmark_truth = {Point2(0.6, 0.4)};
  inst.truth = (Vector(2) << 0.6, 0.4).finished();
  const std::vector<Point2> obs{Point2(0.0, 0.0), Point2(1.0, 0.0), Point2(0.2, 1.0)};
  for (int i = 0; i < 3; ++i) {
    inst.tracks.push_back({obs[i]});
    inst.track_centers.push_back(obs[i]);
    inst.terms.push_back({{0, obs[i], (obs[i] - inst.landmark_truth[0]).norm(), 1.0}});
  }
  const Vector x = centralized_mapping_solve(inst, 8);
  CHECK((x - inst.truth).norm() < 1e-8);
  CHECK_THROWS_AS(centralized_mapping_solve(inst, 4), ArgumentError);
}

TEST_CASE("mapping instances") {
  MappingOptions o;
  o.noise = 0.0;
  const auto clean = build_mapping_instance(o);
  const auto g = clean.global_objective();
  CHECK(g.value(clean.solution) < 1e-12);
  CHECK(g.gradient(clean.solution).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((clean.solution - clean.truth).cwiseAbs().maxCoeff() < 1e-6);
  for (const auto& ts : clean.terms)
    for (const auto& t : ts) CHECK(t.range >= 0.0);

  o.noise = 0.05;
  const auto noisy = build_mapping_instance(o);
  const auto gn = noisy.global_objective();
  CHECK(gn.gradient(noisy.solution).cwiseAbs().maxCoeff() < 1e-8);
  const double c8 = gn.value(centralized_mapping_solve(noisy, 8));
  const double c16 = gn.value(centralized_mapping_solve(noisy, 16));
  CHECK(c16 <= c8 * (1.0 + 1e-12));
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const Vector x = dopt::testing::random_vector(noisy.dim(), rng);
    double sum = 0.0;
    for (int i = 0; i < noisy.robots; ++i) sum += noisy.local_objective(i).value(x);
    CHECK(std::abs(sum - gn.value(x)) <= 1e-10 * std::max(1.0, gn.value(x)));
  }
  check_gradient(noisy.local_objective(0), dopt::testing::random_vector(noisy.dim(), rng));

  o.sensing_radius = 1e-4;
  CHECK_THROWS_AS(build_mapping_instance(o), Error);
}

TEST_CASE("connecting radius") {
  const auto inst = small_tracking(5);
  const double r = connecting_radius(inst.robot_positions);
  CHECK_NOTHROW(range_limited_graph(inst.robot_positions, r));
  CHECK_NOTHROW(range_limited_graph(inst.robot_positions, r / 1.25 * (1.0 + 1e-12)));
  CHECK_THROWS_AS(range_limited_graph(inst.robot_positions, r / 1.25 * (1.0 - 1e-9)), DisconnectedError);
}

TEST_CASE("instance json round trip reproduces traces") {
  const auto tracking = tracking_problem(small_tracking(6));
  DeliveryOptions d;
  const auto delivery = delivery_problem(build_delivery_instance(d));
  const auto mapping = mapping_problem(build_mapping_instance({}));
  const std::vector<std::pair<const ProblemInstance*, std::string>> cases{
      {&tracking, "extra"}, {&delivery, "cadmm"}, {&mapping, "cadmm"}};
  for (const auto& [inst, algo] : cases) {
    const auto text = instance_to_json(*inst).dump();
    const auto back = instance_from_json(nlohmann::json::parse(text));
    CHECK(back.kind == inst->kind);
    const auto a = run_rounds(*bench::make_algorithm(algo, {}), inst->context(), {0.0, 15, 1e300}, serial());
    const auto b = run_rounds(*bench::make_algorithm(algo, {}), back.context(), {0.0, 15, 1e300}, serial());
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
      CHECK(a.records[k].mse == b.records[k].mse);
      CHECK(a.records[k].cum_ops == b.records[k].cum_ops);
    }
  }
}
