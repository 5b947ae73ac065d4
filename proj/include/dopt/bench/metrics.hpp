#pragma once

#include <vector>

#include "dopt/core/types.hpp"

namespace dopt {

/// (1/N) Σ_i ‖x_i − x*‖².
double mse(const std::vector<Vector>& solutions, const Vector& reference);

/// Per-node references, for methods whose nodes hold different sub-vectors.
double mse(const std::vector<Vector>& solutions, const std::vector<Vector>& references);

/// (t_cp + λ t_cm) / (1 + λ).
double rwc(double t_cp, double t_cm, double lambda);

}  // namespace dopt
