#include "dopt/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dopt/bench/registry.hpp"

namespace dopt::cli {
namespace {

using nlohmann::json;

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
}

void check_keys(const json& j, const std::string& field, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(join(field, key), "unknown key");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& field, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(join(field, key), "has the wrong type");
  }
}

template <class T>
T require(const json& j, const std::string& key, const std::string& field) {
  if (!j.contains(key)) throw ConfigError(join(field, key), "is required");
  return get<T>(j, key, field, T{});
}

void check_algorithm(const std::string& name, const json& params, const std::string& field) {
  const auto& names = bench::algorithm_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError(join(field, "name"), "unknown algorithm '" + name + "'");
  try {
    bench::make_algorithm(name, params);
  } catch (const ArgumentError& e) {
    throw ConfigError(join(field, "params"), e.what());
  }
}

TuneConfig parse_tune(const json& j, const std::string& name, const std::string& field) {
  TuneConfig t;
  if (j.is_boolean()) {
    t.enabled = j.get<bool>();
    t.target = bench::default_tune_target(name);
    return t;
  }
  require_object(j, field);
  check_keys(j, field, {"parameter", "log_lo", "log_hi", "iterations"});
  t.enabled = true;
  t.target = bench::default_tune_target(name);
  t.target.parameter = get<std::string>(j, "parameter", field, t.target.parameter);
  t.target.log_lo = get<double>(j, "log_lo", field, t.target.log_lo);
  t.target.log_hi = get<double>(j, "log_hi", field, t.target.log_hi);
  t.iterations = get<int>(j, "iterations", field, t.iterations);
  if (!(t.target.log_lo <= t.target.log_hi)) throw ConfigError(join(field, "log_lo"), "must not exceed log_hi");
  if (t.iterations < 0) throw ConfigError(join(field, "iterations"), "must be nonnegative");
  if (!bench::default_params(name).contains(t.target.parameter))
    throw ConfigError(join(field, "parameter"), "'" + t.target.parameter + "' is not a parameter of " + name);
  return t;
}

json read_json_file(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(field, "'" + path + "': " + e.what());
  }
}

AlgorithmConfig parse_algorithm(const json& j, const std::string& base_dir) {
  const std::string field = "algorithm";
  require_object(j, field);
  check_keys(j, field, {"name", "params", "tune", "file"});
  AlgorithmConfig a;
  if (j.contains("file")) {
    const auto path = (std::filesystem::path(base_dir) / require<std::string>(j, "file", field)).string();
    const json tuned = read_json_file(path, join(field, "file"));
    if (!tuned.is_object() || !tuned.contains("name") || !tuned.contains("params"))
      throw ConfigError(join(field, "file"), "expected an object with 'name' and 'params'");
    a.name = tuned.at("name").get<std::string>();
    a.params = tuned.at("params");
  }
  a.name = get<std::string>(j, "name", field, a.name);
  if (a.name.empty()) throw ConfigError(join(field, "name"), "is required");
  if (j.contains("params")) {
    require_object(j.at("params"), join(field, "params"));
    a.params.update(j.at("params"));
  }
  check_algorithm(a.name, a.params, field);
  if (j.contains("tune")) a.tune = parse_tune(j.at("tune"), a.name, join(field, "tune"));
  return a;
}

SweepConfig parse_sweep(const json& j) {
  const std::string field = "sweep";
  require_object(j, field);
  SweepConfig s;
  s.kind = require<std::string>(j, "kind", field);
  if (s.kind == "rwc") {
    check_keys(j, field, {"kind", "algorithms", "axis", "values", "lambdas", "float_cost", "ops_proxy"});
    if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty())
      throw ConfigError(join(field, "algorithms"), "expected a nonempty array");
    int idx = 0;
    for (const auto& a : j.at("algorithms")) {
      const std::string af = join(field, "algorithms[" + std::to_string(idx++) + "]");
      require_object(a, af);
      check_keys(a, af, {"name", "params", "tune"});
      bench::AlgorithmEntry e;
      e.name = require<std::string>(a, "name", af);
      e.params = get<json>(a, "params", af, json::object());
      e.tune = get<bool>(a, "tune", af, true);
      check_algorithm(e.name, e.params, af);
      s.algorithms.push_back(std::move(e));
    }
    s.axis = get<std::string>(j, "axis", field, s.axis);
    s.values = require<std::vector<int>>(j, "values", field);
    s.lambdas = require<std::vector<double>>(j, "lambdas", field);
    s.float_cost = get<double>(j, "float_cost", field, s.float_cost);
    s.ops_proxy = get<bool>(j, "ops_proxy", field, s.ops_proxy);
    if (s.values.empty()) throw ConfigError(join(field, "values"), "must be nonempty");
    if (s.lambdas.empty()) throw ConfigError(join(field, "lambdas"), "must be nonempty");
    for (double l : s.lambdas)
      if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError(join(field, "lambdas"), "entries must be finite and >= 0");
  } else if (s.kind == "sensitivity") {
    check_keys(j, field, {"kind", "parameter", "grid", "cap", "tol"});
    s.parameter = get<std::string>(j, "parameter", field, "");
    s.grid = require<std::vector<double>>(j, "grid", field);
    s.cap = get<int>(j, "cap", field, s.cap);
    s.tol = get<double>(j, "tol", field, s.tol);
    if (s.grid.empty()) throw ConfigError(join(field, "grid"), "must be nonempty");
    for (double g : s.grid)
      if (!std::isfinite(g)) throw ConfigError(join(field, "grid"), "entries must be finite");
    if (s.cap < 0) throw ConfigError(join(field, "cap"), "must be nonnegative");
  } else {
    throw ConfigError(join(field, "kind"), "expected 'rwc' or 'sensitivity'");
  }
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("syntax error: ") + e.what());
  }
  require_object(j, "");
  check_keys(j, "", {"seed", "problem", "graph", "algorithm", "stop", "exec", "output", "sweep"});

  RunConfig cfg;
  cfg.base_dir = base_dir;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }

  if (!j.contains("problem")) throw ConfigError("problem", "is required");
  const json& p = j.at("problem");
  require_object(p, "problem");
  cfg.problem.type = require<std::string>(p, "type", "problem");
  static const std::set<std::string> kinds{"tracking", "delivery", "mapping", "quadratic", "file"};
  if (!kinds.count(cfg.problem.type)) throw ConfigError("problem.type", "unknown problem '" + cfg.problem.type + "'");
  cfg.problem.params = p;
  cfg.problem.params.erase("type");

  if (j.contains("graph")) {
    const json& g = j.at("graph");
    if (g.is_string()) {
      cfg.graph.type = g.get<std::string>();
    } else {
      require_object(g, "graph");
      check_keys(g, "graph", {"type", "radius"});
      cfg.graph.type = require<std::string>(g, "type", "graph");
      cfg.graph.radius = get<double>(g, "radius", "graph", 0.0);
    }
    static const std::set<std::string> graphs{"instance", "range", "chain", "complete"};
    if (!graphs.count(cfg.graph.type)) throw ConfigError("graph.type", "unknown graph '" + cfg.graph.type + "'");
  }

  if (j.contains("stop")) {
    const json& s = j.at("stop");
    require_object(s, "stop");
    check_keys(s, "stop", {"tol", "cap", "blowup"});
    cfg.stop.tol = get<double>(s, "tol", "stop", cfg.stop.tol);
    cfg.stop.cap = get<int>(s, "cap", "stop", cfg.stop.cap);
    cfg.stop.blowup = get<double>(s, "blowup", "stop", cfg.stop.blowup);
    if (!(cfg.stop.tol >= 0.0)) throw ConfigError("stop.tol", "must be nonnegative");
    if (cfg.stop.cap < 0) throw ConfigError("stop.cap", "must be nonnegative");
    if (!(cfg.stop.blowup > cfg.stop.tol)) throw ConfigError("stop.blowup", "must exceed stop.tol");
  }

  if (j.contains("exec")) {
    const json& e = j.at("exec");
    require_object(e, "exec");
    check_keys(e, "exec", {"parallel", "timing", "normalize_mse"});
    cfg.exec.parallel = get<bool>(e, "parallel", "exec", cfg.exec.parallel);
    cfg.exec.timing = get<bool>(e, "timing", "exec", cfg.exec.timing);
    cfg.exec.normalize_mse = get<bool>(e, "normalize_mse", "exec", cfg.exec.normalize_mse);
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    require_object(o, "output");
    check_keys(o, "output", {"trace", "summary", "report", "tuned", "instance"});
    cfg.output.trace = get<std::string>(o, "trace", "output", cfg.output.trace);
    cfg.output.summary = get<std::string>(o, "summary", "output", cfg.output.summary);
    cfg.output.report = get<std::string>(o, "report", "output", cfg.output.report);
    cfg.output.tuned = get<std::string>(o, "tuned", "output", cfg.output.tuned);
    cfg.output.instance = get<std::string>(o, "instance", "output", cfg.output.instance);
  }

  if (j.contains("algorithm")) cfg.algorithm = parse_algorithm(j.at("algorithm"), base_dir);
  if (j.contains("sweep")) cfg.sweep = parse_sweep(j.at("sweep"));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace dopt::cli
