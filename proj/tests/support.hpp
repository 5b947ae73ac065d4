#pragma once

#include <memory>
#include <random>
#include <vector>

#include "dopt/core/executor.hpp"
#include "dopt/core/objective.hpp"
#include "dopt/graph/graph.hpp"

namespace dopt::testing {

inline Matrix random_spd(Eigen::Index n, std::mt19937_64& rng, double floor = 0.5) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a * a.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n);
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

/// N random strongly convex quadratics; reference is the minimizer of the sum.
struct QuadraticNetwork {
  std::vector<ObjectivePtr> objectives;
  std::unique_ptr<CommGraph> graph;
  Vector reference;

  RunContext context() const {
    RunContext ctx;
    ctx.objectives = objectives;
    ctx.graph = graph.get();
    ctx.weights = metropolis_weights(*graph);
    ctx.reference = reference;
    return ctx;
  }
};

inline QuadraticNetwork quadratic_network(CommGraph graph, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  QuadraticNetwork net;
  Matrix m_sum = Matrix::Zero(n, n);
  Vector b_sum = Vector::Zero(n);
  for (int i = 0; i < graph.size(); ++i) {
    Matrix m = random_spd(n, rng);
    Vector b = random_vector(n, rng);
    m_sum += m;
    b_sum += b;
    net.objectives.push_back(std::make_shared<QuadraticObjective>(m, b));
  }
  net.reference = m_sum.ldlt().solve(b_sum);
  net.graph = std::make_unique<CommGraph>(std::move(graph));
  return net;
}

/// Central-difference gradient.
template <class F>
Vector numeric_gradient(const F& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline ExecOptions serial() { return {false, false, false}; }

}  // namespace dopt::testing

namespace dopt::testing {

/// Round input for node i reading the given published buffers.
inline RoundInput round_input(int i, const Matrix& w, const std::vector<std::vector<double>>& published,
                              const CommGraph& g, int iteration = 0, int phase = 0) {
  RoundInput in;
  in.node = i;
  in.iteration = iteration;
  in.phase = phase;
  in.self_weight = w(i, i);
  for (int j : g.neighbors(i)) in.peers.push_back({j, w(i, j), published[j]});
  return in;
}

inline std::vector<double> to_buffer(std::initializer_list<const Vector*> parts) {
  std::vector<double> out;
  for (const Vector* p : parts) out.insert(out.end(), p->data(), p->data() + p->size());
  return out;
}

}  // namespace dopt::testing
