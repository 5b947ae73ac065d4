#pragma once

#include <cstdint>
#include <vector>

#include "dopt/problems/instance.hpp"

namespace dopt::problems {

/// One range reading of landmark `landmark` taken from `position`.
struct RangeTerm {
  int landmark = 0;
  Point2 position = Point2::Zero();
  double range = 0.0;
  double weight = 1.0;
};

/// f(x) = Σ (w²/2)(‖p − x_k‖ − d)² over stacked 2D landmark estimates.
class RangeMappingObjective final : public LocalObjective {
 public:
  RangeMappingObjective(int landmarks, std::vector<RangeTerm> terms, double singular_radius = 1e-9);

  Eigen::Index dim() const override { return 2 * landmarks_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool has_hessian() const override { return true; }
  Matrix hessian(const Vector& x) const override;
  bool has_argmin() const override { return true; }
  /// Damped Newton to ‖∇‖∞ ≤ 1e-8 within 200 iterations.
  ArgminResult penalized_argmin(const ProxTerm& prox, const Vector& warm,
                                ArgminWorkspace* ws) const override;
  Flops gradient_flops() const override { return 14 * static_cast<Flops>(terms_.size()); }
  Flops hessian_flops() const override { return 24 * static_cast<Flops>(terms_.size()); }
  nlohmann::json to_json() const override;

  int landmarks() const { return landmarks_; }
  const std::vector<RangeTerm>& terms() const { return terms_; }

  /// Same as penalized_argmin with explicit tolerance and iteration cap.
  ArgminResult minimize(const ProxTerm& prox, const Vector& start, double tol, int max_iterations) const;

 private:
  int landmarks_;
  std::vector<RangeTerm> terms_;
  double eps_;
};

struct MappingOptions {
  int robots = 6;
  int landmarks = 4;
  int steps = 12;
  double noise = 0.05;
  double sensing_radius = 1.2;
  double track_radius = 0.35;
  double weight = 1.0;
  double comm_radius = 0.0;  // <= 0 picks a connecting radius
  std::uint64_t seed = 1;
};

struct MappingInstance {
  int robots = 0;
  int landmarks = 0;
  int steps = 0;
  std::vector<Point2> landmark_truth;
  std::vector<std::vector<Point2>> tracks;  // p_i(t)
  std::vector<Point2> track_centers;
  std::vector<std::vector<RangeTerm>> terms;
  Vector truth;
  Vector solution;
  double solution_cost = 0.0;

  Eigen::Index dim() const { return 2 * landmarks; }
  RangeMappingObjective local_objective(int i) const;
  RangeMappingObjective global_objective() const;
};

MappingInstance build_mapping_instance(const MappingOptions& opts);

/// Best stationary point over `starts` damped Newton runs. Start k is a
/// function of k alone, so more starts never give a worse result.
Vector centralized_mapping_solve(const MappingInstance& inst, int starts, std::uint64_t seed = 7);

ProblemInstance mapping_problem(const MappingInstance& inst, double comm_radius = 0.0);

/// ‖(1/N) Σ_i ∇f_i(x̄)‖ at the average x̄ of the node estimates.
double average_gradient_norm(const std::vector<ObjectivePtr>& objectives, const std::vector<Vector>& xs);

}  // namespace dopt::problems
