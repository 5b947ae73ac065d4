#include <doctest.h>

#include <charconv>
#include <clocale>
#include <cmath>
#include <sstream>

#include "dopt/bench/metrics.hpp"
#include "dopt/bench/sweep.hpp"
#include "dopt/gradient/gradient.hpp"
#include "support.hpp"

using namespace dopt;
using namespace dopt::bench;
using dopt::testing::quadratic_network;
using dopt::testing::serial;

TEST_CASE("mse") {
  const Vector ref = Vector::Ones(1);
  CHECK(mse({Vector::Ones(1), Vector::Ones(1)}, ref) == 0.0);
  CHECK(mse({Vector::Constant(1, 1.0), Vector::Constant(1, 3.0)}, ref) == 2.0);
  std::mt19937_64 rng(1);
  std::vector<Vector> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(dopt::testing::random_vector(3, rng));
  const Vector r = dopt::testing::random_vector(3, rng), shift = dopt::testing::random_vector(3, rng);
  std::vector<Vector> moved;
  for (const auto& x : xs) moved.push_back(x + shift);
  CHECK(mse(moved, r + shift) == doctest::Approx(mse(xs, r)).epsilon(1e-13));
  CHECK_THROWS_AS(mse({Vector::Ones(2)}, ref), ArgumentError);
}

TEST_CASE("rwc") {
  CHECK(rwc(2.0, 4.0, 0.0) == 2.0);
  CHECK(rwc(2.0, 4.0, 1.0) == 3.0);
  CHECK(rwc(2.0, 4.0, 1e9) == doctest::Approx(4.0).epsilon(1e-6));
  double prev = rwc(2.0, 4.0, 0.0);
  for (double l = 1e-3; l < 1e4; l *= 3.0) {
    const double v = rwc(2.0, 4.0, l);
    CHECK(v >= prev);
    prev = v;
  }
  prev = rwc(5.0, 1.0, 0.0);
  for (double l = 1e-3; l < 1e4; l *= 3.0) {
    const double v = rwc(5.0, 1.0, l);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("golden-section search") {
  SUBCASE("quadratic score") {
    const auto r = gss_tune([](double a) { return (a - 2.0) * (a - 2.0); }, 0.0, 5.0, 30);
    CHECK(std::abs(r.best - 2.0) < 1e-4);
    CHECK(r.evaluations == 32);
  }
  SUBCASE("bracket width contracts by phi exactly") {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto b = GssBracket::initial(-3.0, 2.0);
    CHECK(b.a1 == -3.0 + phi * phi * 5.0);
    CHECK(b.a2 == -3.0 + phi * 5.0);
    double h = 5.0;
    for (int k = 0; k < 20; ++k) {
      if (k % 3 == 0) b.shrink_left();
      else b.shrink_right();
      h *= phi;
      CHECK(b.width() == h);
      CHECK(b.a0 < b.a1);
      CHECK(b.a1 < b.a2);
      CHECK(b.a2 < b.a3);
    }
  }
  SUBCASE("zero-width bounds return the single point") {
    const auto r = gss_tune([](double a) { return a * a; }, 1.5, 1.5, 10);
    CHECK(r.best == 1.5);
    CHECK(r.evaluations == 1);
  }
  SUBCASE("non-finite bounds") {
    CHECK_THROWS_AS(gss_tune([](double) { return 0.0; }, 0.0, kInf, 3), ArgumentError);
  }
  SUBCASE("infinite tie moves left") {
    const auto r = gss_tune([](double a) { return a > -1.0 ? kInf : (a + 2.0) * (a + 2.0); }, -3.0, 3.0, 20);
    CHECK(std::abs(r.best + 2.0) < 1e-3);
  }
}

TEST_CASE("tuning EXTRA on two nodes") {
  const CommGraph g = chain_graph(2);
  RunContext ctx;
  for (double a : {0.0, 2.0})
    ctx.objectives.push_back(std::make_shared<QuadraticObjective>(Matrix::Identity(1, 1), Vector::Constant(1, a)));
  ctx.graph = &g;
  ctx.weights = Matrix::Constant(2, 2, 0.5);
  ctx.reference = Vector::Ones(1);
  const StopRule stop{1e-10, 10000, 1e12};
  const auto t = tune_algorithm("extra", {}, ctx, stop, serial(), {"alpha", -4.0, 1.0}, 12);
  CHECK(t.gss.evaluations <= 12 + 2);
  CHECK(t.gss.evaluations <= 17);
  const auto trace = run_rounds(*make_algorithm("extra", t.params), ctx, stop, serial());
  CHECK(trace.reason == Termination::kConverged);
  CHECK(t.params.at("alpha").get<double>() == doctest::Approx(std::pow(10.0, t.gss.best)));
}

TEST_CASE("run score") {
  RunTrace t;
  t.records = {{0, 1.0, 0, 0, 0.0}, {5, 1e-3, 0, 0, 0.0}};
  const StopRule stop{1e-6, 5, 1e12};
  t.reason = Termination::kConverged;
  CHECK(run_score(t, stop) == 5.0);
  t.reason = Termination::kCap;
  CHECK(run_score(t, stop) == doctest::Approx(5.0 + 3.0));
  t.reason = Termination::kDiverged;
  CHECK(std::isinf(run_score(t, stop)));
}

TEST_CASE("registry") {
  for (const auto& name : algorithm_names()) {
    const auto algo = make_algorithm(name, default_params(name));
    CHECK(algo->name() == name);
    CHECK(default_params(name).contains(default_tune_target(name).parameter));
  }
  CHECK_THROWS_AS(make_algorithm("nope", {}), ArgumentError);
  CHECK_THROWS_AS(make_algorithm("extra", {{"beta", 1.0}}), ArgumentError);
  CHECK_THROWS_AS(make_algorithm("canonical", {{"zeta", {1.0, 2.0}}}), ArgumentError);
}

TEST_CASE("single-cell sweep reduces to one run's counters") {
  auto net = quadratic_network(random_range_graph(6, 0.6, 8), 3, 9);
  const auto ctx = net.context();
  SweepOptions opts;
  opts.exec = serial();
  opts.stop = {1e-6, 3000, 1e12};
  const std::vector<double> lambdas{0.0, 0.5, 1e6};
  const auto report = sweep_rwc({{"extra", {{"alpha", 0.05}}, false}}, {{ctx, 6, 3}}, lambdas, opts);
  REQUIRE(report.cells.size() == 3);
  const auto trace = run_rounds(gradient::ExtraAlgorithm(0.05), ctx, opts.stop, serial());
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& c = report.cells[k];
    CHECK(c.t_cp_ops == trace.last().cum_ops);
    CHECK(c.t_cm_floats == trace.last().cum_floats);
    CHECK(c.rwc == trace_rwc(trace, lambdas[k]));
    CHECK(c.converged);
    CHECK(c.iterations == trace.iterations());
  }
  CHECK(report.cells[0].rwc == static_cast<double>(trace.last().cum_ops));
  CHECK(report.find("extra", 3, 0.5) == &report.cells[1]);
  std::istringstream csv(report.to_csv());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "algorithm,N,n,lambda,t_cp_seconds,t_cp_ops,t_cm_floats,rwc,converged,iterations");
}

TEST_CASE("lambda extremes order by compute and by floats") {
  auto net = quadratic_network(random_range_graph(6, 0.6, 8), 3, 9);
  SweepOptions opts;
  opts.exec = serial();
  opts.stop = {1e-6, 3000, 1e12};
  opts.tune_iterations = 8;
  const auto report = sweep_rwc({{"extra"}, {"cadmm"}}, {{net.context(), 6, 3}}, {0.0, 1e12}, opts);
  const auto *e0 = report.find("extra", 3, 0.0), *c0 = report.find("cadmm", 3, 0.0);
  const auto *e1 = report.find("extra", 3, 1e12), *c1 = report.find("cadmm", 3, 1e12);
  CHECK((e0->rwc < c0->rwc) == (e0->t_cp_ops < c0->t_cp_ops));
  CHECK((e1->rwc < c1->rwc) == (e1->t_cm_floats < c1->t_cm_floats));
}

TEST_CASE("step-size sensitivity") {
  auto net = quadratic_network(random_range_graph(6, 0.6, 10), 3, 11);
  auto ctx = net.context();
  std::mt19937_64 rng(2);
  Matrix x0(6, 3);
  for (int i = 0; i < 6; ++i) {
    ctx.x0.push_back(dopt::testing::random_vector(3, rng));
    x0.row(i) = ctx.x0.back().transpose();
  }
  SUBCASE("zero step is pure consensus") {
    const int cap = 40;
    const auto pts = stepsize_sensitivity("dgd", {}, "alpha0", {0.0}, ctx, cap, 0.0, serial());
    Matrix x = x0;
    for (int k = 0; k < cap; ++k) x = ctx.weights * x;
    double expect = 0.0;
    for (int i = 0; i < 6; ++i) expect += (x.row(i).transpose() - ctx.reference).squaredNorm() / 6.0;
    CHECK(pts[0].final_mse == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("EXTRA diverges past its threshold; C-ADMM never does") {
    const auto extra = stepsize_sensitivity("extra", {}, "alpha", {1e-3, 1e-2, 1e-1, 1.0, 10.0}, ctx, 2000, 0.0, serial());
    CHECK(!extra[0].diverged);
    CHECK(extra.back().diverged);
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(std::pow(10.0, -3.0 + 0.5 * k));
    const auto cadmm = stepsize_sensitivity("cadmm", {}, "rho", grid, ctx, 2000, 0.0, serial());
    for (const auto& p : cadmm) CHECK(!p.diverged);
    const auto csv = sensitivity_csv("cadmm", "rho", cadmm);
    CHECK(csv.rfind("algorithm,parameter,value,final_mse,diverged,converged,iterations\n", 0) == 0);
  }
}

TEST_CASE("doubles print with 17 significant digits independent of locale") {
  const double v = 0.1 + 0.2;
  const std::string s = format_double(v);
  CHECK(s == "0.30000000000000004");
  double back = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), back);
  CHECK(back == v);
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  CHECK(format_double(1.5) == "1.5");
  std::setlocale(LC_NUMERIC, "C");
  CHECK(format_double(kInf) == "inf");
}
