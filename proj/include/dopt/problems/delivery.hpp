#pragma once

#include <cstdint>
#include <vector>

#include "dopt/problems/instance.hpp"
#include "dopt/solvers/qp.hpp"

namespace dopt::problems {

/// Aerial robot `aerial` lands on ground robot `ground` at step `time`.
struct Meeting {
  int aerial = 0;
  int ground = 0;
  int time = 0;
};

struct DeliveryOptions {
  int aerial = 3;
  int ground = 2;
  int steps = 8;  // T: states 0..T, controls 0..T−1
  double dt = 0.25;
  double control_max = 4.0;
  double ground_speed_max = 1.5;
  double aerial_height_max = 1.0;
  double station_height = 0.3;
  bool boxes = true;
  bool default_meetings = true;  // ignored when `meetings` is nonempty
  std::vector<Meeting> meetings;
  double comm_radius = 0.0;  // <= 0 picks a connecting radius
  std::uint64_t seed = 1;
};

/// Aerial robots are 3D double integrators (state p, v ∈ ℝ³, control ℝ³),
/// ground robots 2D double integrators (state p, v ∈ ℝ², control ℝ²). The
/// decision vector Z stacks each robot's block [x(0..T), u(0..T−1)].
struct DeliveryInstance {
  int aerial = 0;
  int ground = 0;
  int steps = 0;
  double dt = 0.25;
  std::vector<Eigen::Index> offsets;  // per robot; aerial first
  std::vector<Vector> control_weights;  // diagonal of Q per robot
  std::vector<Meeting> meetings;
  std::vector<Vector> start, finish;  // station states per robot
  ConstraintSet common;
  std::vector<ConstraintSet> local;
  Vector solution;

  int robots() const { return aerial + ground; }
  Eigen::Index dim() const { return offsets.back(); }
  int state_dim(int r) const { return r < aerial ? 6 : 4; }
  int control_dim(int r) const { return r < aerial ? 3 : 2; }
  Eigen::Index state_index(int r, int t) const { return offsets[r] + state_dim(r) * t; }
  Eigen::Index control_index(int r, int t) const {
    return offsets[r] + state_dim(r) * (steps + 1) + control_dim(r) * t;
  }

  QuadraticObjective local_objective(int r) const;
  /// Σ_r u_rᵀ Q_r u_r.
  double global_cost(const Vector& z) const;
  solvers::QuadraticProgram global_program() const;
};

DeliveryInstance build_delivery_instance(const DeliveryOptions& opts);

/// Interior-point solve of the full constrained QP; KKT residual < 1e-8.
Vector centralized_qp_solve(const DeliveryInstance& inst);

ProblemInstance delivery_problem(const DeliveryInstance& inst, double comm_radius = 0.0);

}  // namespace dopt::problems
