#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopt/bench/registry.hpp"

namespace dopt::bench {

struct RwcCell {
  std::string algorithm;
  int nodes = 0;
  Eigen::Index dim = 0;
  double lambda = 0.0;
  double t_cp_seconds = 0.0;
  Flops t_cp_ops = 0;
  std::uint64_t t_cm_floats = 0;
  double rwc = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct RwcReport {
  std::vector<double> lambdas;
  std::vector<RwcCell> cells;

  /// algorithm,N,n,lambda,t_cp_seconds,t_cp_ops,t_cm_floats,rwc,converged,iterations
  std::string to_csv() const;
  const RwcCell* find(const std::string& algorithm, Eigen::Index dim, double lambda) const;
};

struct SweepCase {
  RunContext context;
  int nodes = 0;
  Eigen::Index dim = 0;
};

struct AlgorithmEntry {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  bool tune = true;
};

struct SweepOptions {
  StopRule stop;
  ExecOptions exec;
  int tune_iterations = 12;
  double float_cost = 1.0;  // t_cm = floats × float_cost
  bool ops_proxy = true;    // t_cp from op counts, else wall-clock seconds
};

/// One tuned run per (algorithm, case); the λ axis is evaluated on its counters.
RwcReport sweep_rwc(const std::vector<AlgorithmEntry>& algorithms, const std::vector<SweepCase>& cases,
                    const std::vector<double>& lambdas, const SweepOptions& opts);

/// RWC of a single finished run.
double trace_rwc(const RunTrace& trace, double lambda, double float_cost = 1.0, bool ops_proxy = true);

struct SensitivityPoint {
  double value = 0.0;
  double final_mse = 0.0;
  bool diverged = false;
  bool converged = false;
  int iterations = 0;
};

/// Final MSE after `cap` iterations at each grid value of the tuned parameter.
std::vector<SensitivityPoint> stepsize_sensitivity(const std::string& name, const nlohmann::json& base,
                                                   const std::string& parameter, const std::vector<double>& grid,
                                                   const RunContext& ctx, int cap = 10000, double tol = 0.0,
                                                   const ExecOptions& opts = {});

std::string sensitivity_csv(const std::string& name, const std::string& parameter,
                            const std::vector<SensitivityPoint>& points);

/// 17-significant-digit, locale-independent rendering.
std::string format_double(double v);

}  // namespace dopt::bench
