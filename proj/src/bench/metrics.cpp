#include "dopt/bench/metrics.hpp"

#include <cmath>

namespace dopt {

double mse(const std::vector<Vector>& solutions, const Vector& reference) {
  if (solutions.empty()) throw ArgumentError("mse of an empty solution set");
  double s = 0.0;
  for (const auto& x : solutions) {
    if (x.size() != reference.size()) throw ArgumentError("mse dimension mismatch");
    s += (x - reference).squaredNorm();
  }
  return s / static_cast<double>(solutions.size());
}

double mse(const std::vector<Vector>& solutions, const std::vector<Vector>& references) {
  if (solutions.empty()) throw ArgumentError("mse of an empty solution set");
  if (references.size() == 1) return mse(solutions, references.front());
  if (references.size() != solutions.size()) throw ArgumentError("mse reference count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (solutions[i].size() != references[i].size()) throw ArgumentError("mse dimension mismatch");
    s += (solutions[i] - references[i]).squaredNorm();
  }
  return s / static_cast<double>(solutions.size());
}

double rwc(double t_cp, double t_cm, double lambda) {
  if (std::isinf(lambda)) return t_cm;
  return (t_cp + lambda * t_cm) / (1.0 + lambda);
}

}  // namespace dopt
