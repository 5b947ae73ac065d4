#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopt/bench/gss.hpp"
#include "dopt/core/executor.hpp"

namespace dopt::bench {

/// Names accepted by make_algorithm.
const std::vector<std::string>& algorithm_names();

/// Defaults for every hyperparameter of the named algorithm.
nlohmann::json default_params(const std::string& name);

/// Builds an algorithm from its name and a (possibly partial) parameter object.
std::unique_ptr<Algorithm> make_algorithm(const std::string& name, const nlohmann::json& params = {});

/// The scalar tuned for an algorithm and its log10 search interval.
struct TuneTarget {
  std::string parameter;
  double log_lo = 0.0;
  double log_hi = 0.0;
};

TuneTarget default_tune_target(const std::string& name);

/// Iterations to tolerance when converged, cap + log10(mse/tol) at the cap,
/// +∞ on divergence.
double run_score(const RunTrace& trace, const StopRule& stop);

struct TuneOutcome {
  nlohmann::json params;  // base parameters with the tuned value filled in
  double value = 0.0;
  GssResult gss;
};

/// GSS over log10 of the target parameter. Runs that throw a library error
/// other than a capability or mapping error score +∞.
TuneOutcome tune_algorithm(const std::string& name, const nlohmann::json& base, const RunContext& ctx,
                           const StopRule& stop, const ExecOptions& opts, const TuneTarget& target,
                           int iterations = 12);

inline TuneOutcome tune_algorithm(const std::string& name, const nlohmann::json& base, const RunContext& ctx,
                                  const StopRule& stop, const ExecOptions& opts = {}, int iterations = 12) {
  return tune_algorithm(name, base, ctx, stop, opts, default_tune_target(name), iterations);
}

}  // namespace dopt::bench
