#include <doctest.h>

#include "dopt/bench/registry.hpp"
#include "dopt/gradient/gradient.hpp"
#include "support.hpp"

using namespace dopt;
using namespace dopt::gradient;
using dopt::testing::quadratic_network;
using dopt::testing::round_input;
using dopt::testing::serial;

namespace {

// f_i = ½(x − a_i)² on two nodes joined by W = [[½,½],[½,½]].
struct TwoNode {
  CommGraph graph = chain_graph(2);
  Matrix w = Matrix::Constant(2, 2, 0.5);
  Vector a = (Vector(2) << 0.0, 2.0).finished();

  RunContext context() const {
    RunContext ctx;
    for (int i = 0; i < 2; ++i)
      ctx.objectives.push_back(std::make_shared<QuadraticObjective>(Matrix::Identity(1, 1), Vector::Constant(1, a(i))));
    ctx.graph = &graph;
    ctx.weights = w;
    ctx.reference = Vector::Constant(1, a.mean());
    return ctx;
  }
};

std::vector<Vector> column_states(const Vector& x) {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(Vector::Constant(1, x(i)));
  return out;
}

}  // namespace

TEST_CASE("DGD step schedule") {
  DgdState s;
  s.alpha0 = 0.5;
  s.k = 4;
  CHECK(dgd_step_size(s) == 0.25);
  s.k = 0;
  CHECK(dgd_step_size(s) == 0.5);
  s.k = 9;
  s.decreasing = false;
  CHECK(dgd_step_size(s) == 0.5);
}

TEST_CASE("DGD with zero gradients averages") {
  TwoNode t;
  auto ctx = t.context();
  ctx.objectives = {std::make_shared<QuadraticObjective>(Matrix::Zero(1, 1), Vector::Zero(1)),
                    std::make_shared<QuadraticObjective>(Matrix::Zero(1, 1), Vector::Zero(1))};
  ctx.x0 = {Vector::Zero(1), Vector::Constant(1, 2.0)};
  const auto trace = run_rounds(DgdAlgorithm(0.1), ctx, {0.0, 1, 1e12}, serial());
  CHECK(trace.final_estimates[0](0) == 1.0);
  CHECK(trace.final_estimates[1](0) == 1.0);
}

TEST_CASE("constant-step DGD stalls at a floor and diverges past a threshold") {
  auto net = quadratic_network(random_range_graph(8, 0.5, 3), 3, 4);
  const auto ctx = net.context();
  const auto small = run_rounds(DgdAlgorithm(0.05, false), ctx, {0.0, 4000, 1e12}, serial());
  const auto smaller = run_rounds(DgdAlgorithm(0.05, false), ctx, {0.0, 8000, 1e12}, serial());
  CHECK(small.last().mse > 1e-8);
  CHECK(smaller.last().mse == doctest::Approx(small.last().mse).epsilon(1e-6));
  const auto big = run_rounds(DgdAlgorithm(20.0, false), ctx, {0.0, 4000, 1e12}, serial());
  CHECK(big.reason == Termination::kDiverged);
}

TEST_CASE("decreasing-step DGD is slower than EXTRA to 1e-4") {
  auto net = quadratic_network(random_range_graph(6, 0.6, 5), 2, 6);
  const auto ctx = net.context();
  const StopRule stop{1e-4, 10000, 1e12};
  const auto dgd = bench::tune_algorithm("dgd", {}, ctx, stop, serial(), 10);
  const auto extra = bench::tune_algorithm("extra", {}, ctx, stop, serial(), 10);
  CHECK(extra.gss.best_score <= stop.cap);
  CHECK(dgd.gss.best_score > extra.gss.best_score);
}

TEST_CASE("EXTRA matches a dense-matrix recursion on two nodes") {
  TwoNode t;
  const double alpha = 0.1;
  const int steps = 60;
  // X¹ = WX⁰ − α∇F(X⁰); X^{k+1} = (I+W)X^k − W̃X^{k−1} − α(∇F(X^k) − ∇F(X^{k−1})).
  const Matrix wt = 0.5 * (Matrix::Identity(2, 2) + t.w);
  auto grad = [&](const Vector& x) { return Vector(x - t.a); };
  Vector prev = Vector::Zero(2);
  Vector cur = t.w * prev - alpha * grad(prev);
  std::vector<Vector> oracle{prev, cur};
  for (int k = 1; k < steps; ++k) {
    Vector next = (Matrix::Identity(2, 2) + t.w) * cur - wt * prev - alpha * (grad(cur) - grad(prev));
    prev = cur;
    cur = next;
    oracle.push_back(cur);
  }
  const auto ctx = t.context();
  for (int k : {1, 2, 7, 30, steps}) {
    const auto trace = run_rounds(ExtraAlgorithm(alpha), ctx, {0.0, k, 1e12}, serial());
    for (int i = 0; i < 2; ++i) CHECK(std::abs(trace.final_estimates[i](0) - oracle[k](i)) < 1e-12);
  }
}

TEST_CASE("EXTRA fixed point") {
  CommGraph g = chain_graph(3);
  const Matrix w = metropolis_weights(g);
  const QuadraticObjective f(Matrix::Identity(2, 2), Vector::Constant(2, 1.5));
  const Vector xs = Vector::Constant(2, 1.5);
  std::vector<std::vector<double>> pub(3, dopt::testing::to_buffer({&xs, &xs}));
  ExtraState s;
  s.x = xs;
  s.x_prev = xs;
  s.grad_prev = f.gradient(xs);
  s.alpha = 0.3;
  s.k = 1;
  s.has_history = true;
  const auto out = extra_step(s, round_input(1, w, pub, g), f);
  CHECK((out.x - xs).norm() < 1e-15);
  CHECK((out.x_prev - xs).norm() == 0.0);
  ExtraState fresh;
  fresh.x = xs;
  CHECK_THROWS_AS(extra_step(fresh, round_input(1, w, pub, g), f), StateError);
}

TEST_CASE("canonical form with (1/2, 1, 0, 0) reproduces EXTRA") {
  auto net = quadratic_network(random_range_graph(9, 0.5, 12), 4, 13);
  const auto ctx = net.context();
  const StopRule stop{0.0, 100, 1e12};
  const auto extra = run_rounds(ExtraAlgorithm(0.08), ctx, stop, serial());
  const auto canon = run_rounds(CanonicalAlgorithm(0.08, {0.5, 1.0, 0.0, 0.0}), ctx, stop, serial());
  REQUIRE(extra.records.size() == canon.records.size());
  for (std::size_t k = 0; k < extra.records.size(); ++k)
    CHECK(std::abs(extra.records[k].mse - canon.records[k].mse) <= 1e-10 * (1.0 + extra.records[k].mse));
  for (int i = 0; i < ctx.size(); ++i) CHECK((extra.final_estimates[i] - canon.final_estimates[i]).norm() < 1e-10);
}

TEST_CASE("canonical step special cases") {
  CommGraph g = chain_graph(3);
  const Matrix w = metropolis_weights(g);
  const QuadraticObjective f(2.0 * Matrix::Identity(1, 1), Vector::Constant(1, 1.0));
  const std::vector<Vector> xs = column_states((Vector(3) << 0.0, 1.0, 4.0).finished());
  const std::vector<Vector> zs = column_states((Vector(3) << 0.5, -1.0, 0.25).finished());
  std::vector<std::vector<double>> pub;
  for (int i = 0; i < 3; ++i) pub.push_back(dopt::testing::to_buffer({&xs[i], &zs[i]}));
  SUBCASE("all couplings off") {
    CanonicalState s{xs[1], zs[1], 0.1, {0.0, 0.0, 0.0, 0.0}};
    const auto out = canonical_step(s, round_input(1, w, pub, g), f);
    CHECK(out.x(0) == doctest::Approx(1.0 - 0.1 * (2.0 * 1.0 - 1.0)));
    const double wx = 0.5 * 0.0 + 0.5 * 4.0 + w(1, 1) * 1.0;
    CHECK(out.z(0) == doctest::Approx(-1.0 - (1.0 - wx)));
  }
  SUBCASE("consensus with zero dual is a gradient step") {
    const Vector c = Vector::Constant(1, 0.7), z = Vector::Zero(1);
    std::vector<std::vector<double>> same(3, dopt::testing::to_buffer({&c, &z}));
    CanonicalState s{c, z, 0.2, {0.5, 1.0, 0.0, 0.0}};
    const auto out = canonical_step(s, round_input(1, w, same, g), f);
    CHECK(out.x(0) == doctest::Approx(0.7 - 0.2 * (2.0 * 0.7 - 1.0)).epsilon(1e-15));
    CHECK(out.z(0) == doctest::Approx(0.0));
  }
}

TEST_CASE("DDA proximal step") {
  const Vector v = (Vector(3) << 1.0, -2.0, 0.5).finished();
  CHECK((dda_prox(v, 0.3, ConstraintSet()) + 0.3 * v).norm() < 1e-15);
  const auto unit = ConstraintSet::box(Vector::Zero(3), Vector::Ones(3));
  CHECK(dda_prox(Vector::Constant(3, 2.0), 0.3, unit).norm() == 0.0);
  SparseMatrix a(1, 3);
  for (int j = 0; j < 3; ++j) a.insert(0, j) = 1.0;
  auto simplex = unit;
  simplex.set_affine(a, Vector::Ones(1));
  // −αv = (−0.3, 0.6, −0.15); the simplex projection shifts the top two by τ = −0.275.
  const Vector x = dda_prox(v, 0.3, simplex);
  CHECK((x - Vector(Vector::Unit(3, 1) * 0.875 + Vector::Unit(3, 2) * 0.125)).norm() < 1e-9);
}

TEST_CASE("DDA with zero gradients stays at the prox center") {
  CommGraph g = chain_graph(3);
  RunContext ctx;
  for (int i = 0; i < 3; ++i)
    ctx.objectives.push_back(std::make_shared<QuadraticObjective>(Matrix::Zero(2, 2), Vector::Zero(2)));
  ctx.graph = &g;
  ctx.weights = metropolis_weights(g);
  ctx.reference = Vector::Zero(2);
  const auto trace = run_rounds(DdaAlgorithm(0.5), ctx, {-1.0, 20, 1e12}, serial());
  for (const auto& x : trace.final_estimates) CHECK(x.norm() == 0.0);
}

TEST_CASE("DDA iterates stay feasible") {
  auto net = quadratic_network(random_range_graph(7, 0.5, 21), 3, 22);
  auto ctx = net.context();
  ctx.common = ConstraintSet::box(Vector::Constant(3, -0.2), Vector::Constant(3, 0.2));
  for (int k : {1, 2, 3, 10, 50}) {
    const auto trace = run_rounds(DdaAlgorithm(0.5), ctx, {0.0, k, 1e12}, serial());
    for (const auto& x : trace.final_estimates) CHECK(ctx.common->violation(x) <= 1e-12);
  }
}

TEST_CASE("DIGing tracking identity") {
  auto net = quadratic_network(random_range_graph(8, 0.5, 31), 3, 32);
  const auto ctx = net.context();
  const auto& g = *net.graph;
  std::mt19937_64 rng(5);
  std::vector<DigingState> s;
  for (int i = 0; i < 8; ++i) s.push_back(diging_init(dopt::testing::random_vector(3, rng), 0.05, *ctx.objectives[i]));
  for (int k = 0; k <= 50; ++k) {
    Vector ysum = Vector::Zero(3), gsum = Vector::Zero(3);
    for (int i = 0; i < 8; ++i) {
      ysum += s[i].y;
      gsum += ctx.objectives[i]->gradient(s[i].x);
    }
    CHECK((ysum - gsum).norm() < 1e-9);
    std::vector<std::vector<double>> pub;
    for (const auto& st : s) pub.push_back(dopt::testing::to_buffer({&st.x, &st.y}));
    std::vector<DigingState> next;
    for (int i = 0; i < 8; ++i) next.push_back(diging_step(s[i], round_input(i, ctx.weights, pub, g, k), *ctx.objectives[i]));
    s = next;
  }
}

TEST_CASE("DIGing on one node is gradient descent") {
  CommGraph g(1, {});
  const QuadraticObjective f(Matrix::Identity(2, 2) * 3.0, Vector::Ones(2));
  auto s = diging_init(Vector::Zero(2), 0.1, f);
  std::vector<std::vector<double>> pub{dopt::testing::to_buffer({&s.x, &s.y})};
  const auto out = diging_step(s, round_input(0, Matrix::Identity(1, 1), pub, g), f);
  CHECK((out.x - (Vector::Zero(2) - 0.1 * f.gradient(Vector::Zero(2)))).norm() < 1e-15);
  CHECK((out.y - f.gradient(out.x)).norm() < 1e-15);
}

TEST_CASE("DIGing reaches 1e-10 on two nodes at a tuned step") {
  TwoNode t;
  const auto ctx = t.context();
  const StopRule stop{1e-10, 500, 1e12};
  const auto tuned = bench::tune_algorithm("diging", {}, ctx, stop, serial(), 12);
  const auto trace = run_rounds(*bench::make_algorithm("diging", tuned.params), ctx, stop, serial());
  CHECK(trace.reason == Termination::kConverged);
  CHECK(trace.last().mse < 1e-10);
}
