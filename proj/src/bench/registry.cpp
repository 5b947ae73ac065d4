#include "dopt/bench/registry.hpp"

#include <cmath>
#include <limits>

#include "dopt/admm/admm.hpp"
#include "dopt/gradient/gradient.hpp"
#include "dopt/newton/newton.hpp"

namespace dopt::bench {

namespace {

double get(const nlohmann::json& p, const nlohmann::json& d, const char* key) {
  return p.contains(key) ? p.at(key).get<double>() : d.at(key).get<double>();
}

}  // namespace

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"dgd", "extra", "canonical", "diging", "dda",
                                              "nn",  "next",  "cadmm",     "sova"};
  return names;
}

nlohmann::json default_params(const std::string& name) {
  if (name == "dgd") return {{"alpha0", 0.1}, {"decreasing", true}};
  if (name == "extra" || name == "diging") return {{"alpha", 0.1}};
  if (name == "canonical") return {{"alpha", 0.1}, {"zeta", {0.5, 1.0, 0.0, 0.0}}};
  if (name == "dda") return {{"alpha0", 0.1}};
  if (name == "nn") return {{"alpha", 0.1}, {"epsilon", 1.0}, {"K", 1}};
  if (name == "next") return {{"alpha0", 0.5}, {"mu", 1e-3}, {"tau", -1.0}};
  if (name == "cadmm") return {{"rho", 1.0}, {"dual_step_ratio", 0.5}};
  if (name == "sova") return {{"rho", 1.0}};
  throw ArgumentError("unknown algorithm '" + name + "'");
}

std::unique_ptr<Algorithm> make_algorithm(const std::string& name, const nlohmann::json& params) {
  const nlohmann::json d = default_params(name);
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  if (!p.is_object()) throw ArgumentError("algorithm parameters must be an object");
  for (const auto& [key, _] : p.items())
    if (!d.contains(key)) throw ArgumentError("algorithm '" + name + "' has no parameter '" + key + "'");
  if (name == "dgd")
    return std::make_unique<gradient::DgdAlgorithm>(get(p, d, "alpha0"),
                                                    p.value("decreasing", d.at("decreasing").get<bool>()));
  if (name == "extra") return std::make_unique<gradient::ExtraAlgorithm>(get(p, d, "alpha"));
  if (name == "diging") return std::make_unique<gradient::DigingAlgorithm>(get(p, d, "alpha"));
  if (name == "dda") return std::make_unique<gradient::DdaAlgorithm>(get(p, d, "alpha0"));
  if (name == "canonical") {
    const auto z = p.contains("zeta") ? p.at("zeta") : d.at("zeta");
    if (!z.is_array() || z.size() != 4) throw ArgumentError("canonical zeta needs four entries");
    return std::make_unique<gradient::CanonicalAlgorithm>(
        get(p, d, "alpha"), std::array<double, 4>{z[0].get<double>(), z[1].get<double>(), z[2].get<double>(),
                                                  z[3].get<double>()});
  }
  if (name == "nn")
    return std::make_unique<newton::NnkAlgorithm>(get(p, d, "alpha"), get(p, d, "epsilon"),
                                                  p.value("K", d.at("K").get<int>()));
  if (name == "next")
    return std::make_unique<newton::NextAlgorithm>(get(p, d, "alpha0"), get(p, d, "mu"), get(p, d, "tau"));
  if (name == "cadmm")
    return std::make_unique<admm::CadmmAlgorithm>(get(p, d, "rho"), get(p, d, "dual_step_ratio"));
  return std::make_unique<admm::SovaAlgorithm>(get(p, d, "rho"));
}

TuneTarget default_tune_target(const std::string& name) {
  if (name == "dgd" || name == "dda") return {"alpha0", -5.0, 0.0};
  if (name == "extra" || name == "diging" || name == "canonical") return {"alpha", -5.0, 0.0};
  if (name == "nn") return {"alpha", -6.0, 1.0};
  if (name == "next") return {"alpha0", -4.0, 0.0};
  if (name == "cadmm" || name == "sova") return {"rho", -3.0, 3.0};
  throw ArgumentError("unknown algorithm '" + name + "'");
}

double run_score(const RunTrace& trace, const StopRule& stop) {
  switch (trace.reason) {
    case Termination::kConverged:
      return trace.iterations();
    case Termination::kCap:
      return stop.cap + std::log10(std::max(trace.last().mse, 1e-300) / stop.tol);
    default:
      return std::numeric_limits<double>::infinity();
  }
}

TuneOutcome tune_algorithm(const std::string& name, const nlohmann::json& base, const RunContext& ctx,
                           const StopRule& stop, const ExecOptions& opts, const TuneTarget& target,
                           int iterations) {
  nlohmann::json params = base.is_null() ? nlohmann::json::object() : base;
  auto score = [&](double log_value) {
    nlohmann::json p = params;
    p[target.parameter] = std::pow(10.0, log_value);
    const auto algorithm = make_algorithm(name, p);
    try {
      return run_score(run_rounds(*algorithm, ctx, stop, opts), stop);
    } catch (const CapabilityError&) {
      throw;
    } catch (const MappingError&) {
      throw;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  TuneOutcome out;
  out.gss = gss_tune(score, target.log_lo, target.log_hi, iterations);
  out.value = std::pow(10.0, out.gss.best);
  params[target.parameter] = out.value;
  out.params = params;
  return out;
}

}  // namespace dopt::bench
