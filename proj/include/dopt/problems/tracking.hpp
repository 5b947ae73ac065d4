#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dopt/problems/instance.hpp"

namespace dopt::problems {

struct TrackingOptions {
  int robots = 10;
  int steps = 16;
  double dt = 0.1;
  double sensing_range = 0.3;
  double comm_radius = 0.0;  // <= 0 picks a connecting radius
  double process_weight = 0.05;  // Q = q·I
  double meas_noise = 0.1;       // R = r·I
  double prior_cov = 0.1;        // Σ₀ = s·I
  double speed = 0.6;
  double turn_rate = 4.0;        // rad/s
  bool constant_velocity = false;
  bool noise_free = false;
  std::uint64_t seed = 1;
};

/// Batch target-trajectory estimation. States are indexed t = 0..T−1 and the
/// decision vector stacks them (n = 4T).
struct TrackingInstance {
  int robots = 0;
  int steps = 0;
  double dt = 0.1;
  Matrix A, C, Q, R, sigma0;
  Vector mu0;
  std::vector<std::vector<int>> obs_times;  // 𝒯_i
  std::vector<std::vector<Eigen::Vector2d>> measurements;
  std::vector<Point2> robot_positions;
  Vector truth;
  Vector solution;
  std::vector<std::string> warnings;

  Eigen::Index dim() const { return 4 * steps; }

  /// Robot i's cost with the 1/N-scaled prior and dynamics terms.
  QuadraticObjective local_objective(int i) const;
  /// Prior + all dynamics + every robot's measurements.
  double global_cost(const Vector& x) const;

  /// Block construction: z_i, H_i = [P; G_i ⊗ C], W_i = diag(Σ₀, Q…, R…).
  Vector block_z(int i) const;
  Matrix block_h(int i) const;
  Matrix block_w(int i) const;
};

Matrix tracking_dynamics(double dt);
Matrix tracking_observation();
/// One-hot rows selecting the given (0-based) times among T.
Matrix selection_matrix(int steps, const std::vector<int>& times);
/// Lower block-bidiagonal prior/dynamics matrix with I diagonal and −A below.
Matrix prior_dynamics_matrix(int steps, const Matrix& a);

TrackingInstance build_tracking_instance(const TrackingOptions& opts);
/// Normal-equation solve of the stacked weighted least squares.
Vector centralized_lls_solve(const TrackingInstance& inst);

/// One message per robot that never observes the target.
std::vector<std::string> tracking_warnings(const TrackingInstance& inst);

/// Instance with one node per robot on a range-limited graph over the robot
/// positions.
ProblemInstance tracking_problem(const TrackingInstance& inst, double comm_radius = 0.0);

/// Time-window split for reduced-variable methods on a chain: node i owns
/// steps [b_i, b_{i+1}], consecutive windows share one step, and the
/// measurements at a shared step are weighted ½ in each window.
ProblemInstance tracking_window_problem(const TrackingInstance& inst, int windows);

}  // namespace dopt::problems
