#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace dopt::bench {

/// Four-point golden-section bracket a0 < a1 < a2 < a3.
struct GssBracket {
  static inline const double kPhi = (std::sqrt(5.0) - 1.0) / 2.0;

  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  double h = 0.0;

  static GssBracket initial(double lo, double hi);
  double width() const { return h; }
  /// Keeps [a0, a2] with a fresh a1.
  void shrink_left();
  /// Keeps [a1, a3] with a fresh a2.
  void shrink_right();
};

struct GssResult {
  double best = 0.0;
  double best_score = 0.0;
  int evaluations = 0;
  GssBracket bracket;
  std::vector<std::pair<double, double>> history;  // (parameter, score) in evaluation order
};

/// Golden-section search for a minimizer of `score` on [lo, hi]. A +∞ tie
/// between the interior points keeps the left triple.
GssResult gss_tune(const std::function<double(double)>& score, double lo, double hi, int iterations);

}  // namespace dopt::bench
