#include "dopt/bench/gss.hpp"

#include <limits>

#include "dopt/core/types.hpp"

namespace dopt::bench {

GssBracket GssBracket::initial(double lo, double hi) {
  GssBracket b;
  b.a0 = lo;
  b.a3 = hi;
  b.h = hi - lo;
  b.a1 = lo + kPhi * kPhi * b.h;
  b.a2 = lo + kPhi * b.h;
  return b;
}

void GssBracket::shrink_left() {
  a3 = a2;
  a2 = a1;
  h *= kPhi;
  a1 = a0 + kPhi * kPhi * h;
}

void GssBracket::shrink_right() {
  a0 = a1;
  a1 = a2;
  h *= kPhi;
  a2 = a0 + kPhi * h;
}

GssResult gss_tune(const std::function<double(double)>& score, double lo, double hi, int iterations) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ArgumentError("search bounds must be finite");
  if (lo > hi) throw ArgumentError("search bounds are reversed");
  if (iterations < 0) throw ArgumentError("iteration count must be nonnegative");
  GssResult r;
  r.best_score = std::numeric_limits<double>::infinity();
  auto eval = [&](double a) {
    const double s = score(a);
    ++r.evaluations;
    r.history.emplace_back(a, s);
    if (r.evaluations == 1 || s < r.best_score) {
      r.best = a;
      r.best_score = s;
    }
    return s;
  };
  r.bracket = GssBracket::initial(lo, hi);
  if (lo == hi) {
    eval(lo);
    return r;
  }
  double f1 = eval(r.bracket.a1);
  double f2 = eval(r.bracket.a2);
  for (int k = 0; k < iterations; ++k) {
    const bool both_inf = std::isinf(f1) && std::isinf(f2) && f1 > 0 && f2 > 0;
    if (f1 < f2 || both_inf) {
      r.bracket.shrink_left();
      f2 = f1;
      f1 = eval(r.bracket.a1);
    } else {
      r.bracket.shrink_right();
      f1 = f2;
      f2 = eval(r.bracket.a2);
    }
  }
  return r;
}

}  // namespace dopt::bench
