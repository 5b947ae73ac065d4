#include "dopt/problems/mapping.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "dopt/core/json_io.hpp"

namespace dopt::problems {

RangeMappingObjective::RangeMappingObjective(int landmarks, std::vector<RangeTerm> terms,
                                             double singular_radius)
    : landmarks_(landmarks), terms_(std::move(terms)), eps_(singular_radius) {
  if (landmarks_ < 1) throw ArgumentError("mapping needs at least one landmark");
  for (const auto& t : terms_) {
    if (t.landmark < 0 || t.landmark >= landmarks_) throw ArgumentError("range term names an unknown landmark");
    if (!(t.range >= 0.0)) throw ArgumentError("ranges must be nonnegative");
  }
}

double RangeMappingObjective::value(const Vector& x) const {
  double f = 0.0;
  for (const auto& t : terms_) {
    const double r = (x.segment<2>(2 * t.landmark) - t.position).norm();
    f += 0.5 * t.weight * t.weight * (r - t.range) * (r - t.range);
  }
  return f;
}

Vector RangeMappingObjective::gradient(const Vector& x) const {
  Vector g = Vector::Zero(dim());
  for (const auto& t : terms_) {
    const Eigen::Vector2d e = x.segment<2>(2 * t.landmark) - t.position;
    const double r = e.norm();
    if (r < eps_) continue;
    g.segment<2>(2 * t.landmark) += t.weight * t.weight * (r - t.range) / r * e;
  }
  return g;
}

Matrix RangeMappingObjective::hessian(const Vector& x) const {
  Matrix h = Matrix::Zero(dim(), dim());
  for (const auto& t : terms_) {
    const Eigen::Vector2d e = x.segment<2>(2 * t.landmark) - t.position;
    const double r = e.norm();
    if (r < eps_) continue;
    const Eigen::Vector2d u = e / r;
    const Eigen::Matrix2d uu = u * u.transpose();
    h.block<2, 2>(2 * t.landmark, 2 * t.landmark) +=
        t.weight * t.weight * (uu + (r - t.range) / r * (Eigen::Matrix2d::Identity() - uu));
  }
  return h;
}

ArgminResult RangeMappingObjective::minimize(const ProxTerm& prox, const Vector& start, double tol,
                                             int max_iterations) const {
  const Eigen::Index n = dim();
  const bool has_general = prox.general.size() > 0;
  const Vector lin = prox.linear.size() ? prox.linear : Vector(Vector::Zero(n));
  auto phi = [&](const Vector& x) {
    double v = value(x) + 0.5 * prox.isotropic * x.squaredNorm() + lin.dot(x);
    if (has_general) v += 0.5 * x.dot(prox.general * x);
    return v;
  };
  auto grad = [&](const Vector& x) {
    Vector g = gradient(x) + prox.isotropic * x + lin;
    if (has_general) g += prox.general * x;
    return g;
  };

  ArgminResult out;
  Vector x = start.size() == n ? start : Vector(Vector::Zero(n));
  double fx = phi(x);
  Vector g = grad(x);
  double lambda = 0.0;
  const Flops step_flops = hessian_flops() + gradient_flops() + flops::cholesky(n) + flops::chol_solve(n);
  for (int it = 0; it < max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= tol) {
      out.x = std::move(x);
      out.residual = g.lpNorm<Eigen::Infinity>();
      out.iterations = it;
      return out;
    }
    Matrix h = hessian(x);
    h.diagonal().array() += prox.isotropic;
    if (has_general) h += prox.general;
    const double scale = 1.0 + h.cwiseAbs().maxCoeff();
    bool accepted = false;
    for (int tries = 0; tries < 80 && !accepted; ++tries) {
      Matrix a = h;
      a.diagonal().array() += lambda;
      Eigen::LLT<Matrix> llt(a);
      out.flops += step_flops;
      if (llt.info() != Eigen::Success) {
        lambda = std::max(4.0 * lambda, 1e-8 * scale);
        continue;
      }
      const Vector dx = -llt.solve(g);
      const Vector xn = x + dx;
      const double fn = phi(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * g.dot(dx) + 1e-13 * (1.0 + std::abs(fx))) {
        x = xn;
        fx = fn;
        g = grad(x);
        lambda = lambda / 3.0 < 1e-12 * scale ? 0.0 : lambda / 3.0;
        accepted = true;
      } else {
        lambda = std::max(4.0 * lambda, 1e-6 * scale);
      }
    }
    if (!accepted) break;
  }
  const double res = g.lpNorm<Eigen::Infinity>();
  if (res <= tol) {
    out.x = std::move(x);
    out.residual = res;
    out.iterations = max_iterations;
    return out;
  }
  throw SolverError("damped Newton did not reach stationarity", res, x);
}

ArgminResult RangeMappingObjective::penalized_argmin(const ProxTerm& prox, const Vector& warm,
                                                     ArgminWorkspace*) const {
  return minimize(prox, warm, 1e-8, 200);
}

nlohmann::json RangeMappingObjective::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : terms_)
    terms.push_back({t.landmark, t.position.x(), t.position.y(), t.range, t.weight});
  return {{"type", "range_mapping"}, {"landmarks", landmarks_}, {"singular_radius", eps_}, {"terms", terms}};
}

RangeMappingObjective MappingInstance::local_objective(int i) const {
  return RangeMappingObjective(landmarks, terms[i]);
}

RangeMappingObjective MappingInstance::global_objective() const {
  std::vector<RangeTerm> all;
  for (const auto& t : terms) all.insert(all.end(), t.begin(), t.end());
  return RangeMappingObjective(landmarks, std::move(all));
}

MappingInstance build_mapping_instance(const MappingOptions& o) {
  if (o.robots < 1 || o.landmarks < 1) throw ArgumentError("mapping needs robots and landmarks");
  if (o.steps < 1) throw ArgumentError("mapping needs at least one timestep");
  if (!(o.noise >= 0.0)) throw ArgumentError("noise level must be nonnegative");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  MappingInstance inst;
  inst.robots = o.robots;
  inst.landmarks = o.landmarks;
  inst.steps = o.steps;
  for (int k = 0; k < o.landmarks; ++k)
    inst.landmark_truth.emplace_back(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
  inst.truth = Vector(inst.dim());
  for (int k = 0; k < o.landmarks; ++k) inst.truth.segment<2>(2 * k) = inst.landmark_truth[k];

  // Circular tracks around random centers.
  for (int i = 0; i < o.robots; ++i) {
    const Point2 c(1.6 * unit(rng) - 0.8, 1.6 * unit(rng) - 0.8);
    const double rad = o.track_radius * (0.5 + 0.5 * unit(rng));
    const double ph = 2.0 * std::numbers::pi * unit(rng);
    std::vector<Point2> track;
    for (int t = 0; t < o.steps; ++t) {
      const double a = ph + 2.0 * std::numbers::pi * t / o.steps;
      track.push_back(c + rad * Point2(std::cos(a), std::sin(a)));
    }
    inst.track_centers.push_back(c);
    inst.tracks.push_back(std::move(track));
  }

  inst.terms.assign(o.robots, {});
  std::vector<std::vector<Point2>> seen_from(o.landmarks);
  for (int i = 0; i < o.robots; ++i) {
    for (int t = 0; t < o.steps; ++t) {
      for (int k = 0; k < o.landmarks; ++k) {
        const double d = (inst.tracks[i][t] - inst.landmark_truth[k]).norm();
        if (d > o.sensing_radius) continue;
        const double noisy = std::max(0.0, d + o.noise * gauss(rng));
        inst.terms[i].push_back({k, inst.tracks[i][t], noisy, o.weight});
        seen_from[k].push_back(inst.tracks[i][t]);
      }
    }
  }
  for (int k = 0; k < o.landmarks; ++k) {
    const auto& pts = seen_from[k];
    double spread = 0.0;
    if (pts.size() >= 3) {
      Point2 mean = Point2::Zero();
      for (const auto& p : pts) mean += p;
      mean /= static_cast<double>(pts.size());
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
      spread = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov).eigenvalues()(0);
    }
    if (spread < 1e-6)
      throw Error("landmark " + std::to_string(k) + " is not seen from three non-collinear positions");
  }
  inst.solution = centralized_mapping_solve(inst, 8);
  inst.solution_cost = inst.global_objective().value(inst.solution);
  return inst;
}

Vector centralized_mapping_solve(const MappingInstance& inst, int starts, std::uint64_t seed) {
  if (starts < 8) throw ArgumentError("the mapping oracle needs at least 8 starts");
  const RangeMappingObjective f = inst.global_objective();
  const int m = inst.landmarks;

  // The cost separates by landmark, so the best block is kept per landmark.
  std::vector<RangeMappingObjective> blocks;
  {
    std::vector<std::vector<RangeTerm>> per(m);
    for (const auto& t : f.terms()) per[t.landmark].push_back(t);
    for (auto& p : per) blocks.emplace_back(m, std::move(p));
  }
  Vector best = Vector::Zero(f.dim());
  std::vector<double> best_cost(m, kInf);
  double best_residual = kInf;
  Vector best_failed;

  for (int s = 0; s < starts; ++s) {
    Vector x0(f.dim());
    if (s == 0) {
      for (int k = 0; k < m; ++k) {
        Point2 c = Point2::Zero();
        int cnt = 0;
        for (const auto& t : blocks[k].terms()) c += t.position, ++cnt;
        x0.segment<2>(2 * k) = cnt ? Point2(c / cnt + Point2(1e-3, 2e-3)) : Point2::Zero();
      }
    } else {
      std::seed_seq sq{seed, static_cast<std::uint64_t>(s)};
      std::mt19937_64 rng(sq);
      std::uniform_real_distribution<double> u(-1.5, 1.5);
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0[j] = u(rng);
    }
    Vector x;
    try {
      x = f.minimize({}, x0, 1e-10, 500).x;
    } catch (const SolverError& e) {
      if (e.residual() < best_residual) {
        best_residual = e.residual();
        best_failed = e.best_iterate();
      }
      continue;
    }
    for (int k = 0; k < m; ++k) {
      const double c = blocks[k].value(x);
      if (c < best_cost[k]) {
        best_cost[k] = c;
        best.segment<2>(2 * k) = x.segment<2>(2 * k);
      }
    }
  }
  for (int k = 0; k < m; ++k)
    if (!std::isfinite(best_cost[k]))
      throw SolverError("every mapping start failed", best_residual, best_failed);
  return best;
}

ProblemInstance mapping_problem(const MappingInstance& inst, double comm_radius) {
  ProblemInstance p;
  p.kind = "mapping";
  for (int i = 0; i < inst.robots; ++i)
    p.objectives.push_back(std::make_shared<RangeMappingObjective>(inst.local_objective(i)));
  p.reference = inst.solution;
  p.ground_truth = inst.truth;
  if (inst.robots >= 2) {
    const double radius = comm_radius > 0.0 ? comm_radius : connecting_radius(inst.track_centers);
    p.graph = range_limited_graph(inst.track_centers, radius);
  } else {
    p.graph = CommGraph(1, {}, inst.track_centers);
  }
  for (int i = 0; i < inst.robots; ++i)
    if (inst.terms[i].empty()) p.warnings.push_back("robot " + std::to_string(i) + " measures no landmark");
  p.meta = {{"robots", inst.robots}, {"landmarks", inst.landmarks}, {"steps", inst.steps},
            {"solution_cost", inst.solution_cost}};
  return p;
}

double average_gradient_norm(const std::vector<ObjectivePtr>& objectives, const std::vector<Vector>& xs) {
  if (objectives.empty() || xs.size() != objectives.size())
    throw ArgumentError("one estimate per objective required");
  Vector mean = Vector::Zero(xs.front().size());
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Vector g = Vector::Zero(mean.size());
  for (const auto& f : objectives) g += f->gradient(mean);
  return (g / static_cast<double>(objectives.size())).norm();
}

}  // namespace dopt::problems
