#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopt/bench/sweep.hpp"
#include "dopt/core/executor.hpp"

namespace dopt::cli {

/// Malformed configuration; `field` is a dotted path such as "algorithm.name".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : "field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ProblemConfig {
  std::string type;  // tracking | delivery | mapping | quadratic | file
  nlohmann::json params = nlohmann::json::object();
};

struct GraphConfig {
  std::string type = "instance";  // instance | range | chain | complete
  double radius = 0.0;            // range only; <= 0 picks a connecting radius
};

struct TuneConfig {
  bool enabled = false;
  bench::TuneTarget target;
  int iterations = 12;
};

struct AlgorithmConfig {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  TuneConfig tune;
};

struct SweepConfig {
  std::string kind;  // rwc | sensitivity
  // rwc
  std::vector<bench::AlgorithmEntry> algorithms;
  std::string axis = "steps";
  std::vector<int> values;
  std::vector<double> lambdas;
  double float_cost = 1.0;
  bool ops_proxy = true;
  // sensitivity
  std::string parameter;
  std::vector<double> grid;
  int cap = 10000;
  double tol = 0.0;
};

struct OutputConfig {
  std::string trace = "trace.csv";
  std::string summary = "summary.json";
  std::string report = "report.csv";
  std::string tuned = "tuned.json";
  std::string instance;  // empty → not written
};

struct RunConfig {
  ProblemConfig problem;
  GraphConfig graph;
  AlgorithmConfig algorithm;
  StopRule stop;
  ExecOptions exec{true, false, false};
  std::uint64_t seed = 1;
  OutputConfig output;
  std::optional<SweepConfig> sweep;
  std::string base_dir;  // relative paths inside the config resolve here
};

/// Parses and validates a configuration document. Syntax errors report the
/// line and column; semantic errors name the offending field.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace dopt::cli
