#include "dopt/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dopt/bench/registry.hpp"
#include "dopt/bench/sweep.hpp"
#include "dopt/core/json_io.hpp"
#include "dopt/problems/delivery.hpp"
#include "dopt/problems/mapping.hpp"
#include "dopt/problems/tracking.hpp"

namespace dopt::cli {
namespace {

using nlohmann::json;

class Params {
 public:
  Params(const json& j, std::string field, std::set<std::string> allowed) : j_(j), field_(std::move(field)) {
    for (const auto& [key, value] : j.items())
      if (!allowed.count(key)) throw ConfigError(field_ + "." + key, "unknown key");
  }
  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field_ + "." + key, "has the wrong type");
    }
  }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }

 private:
  const json& j_;
  std::string field_;
};

json with_override(json params, const std::optional<std::pair<std::string, int>>& size_override) {
  if (size_override) params[size_override->first] = size_override->second;
  return params;
}

problems::ProblemInstance build_tracking(const Params& p, std::uint64_t seed, int* windows) {
  problems::TrackingOptions o;
  o.robots = p.get("robots", o.robots);
  o.steps = p.get("steps", o.steps);
  o.dt = p.get("dt", o.dt);
  o.sensing_range = p.get("sensing_range", o.sensing_range);
  o.comm_radius = p.get("comm_radius", o.comm_radius);
  o.process_weight = p.get("process_weight", o.process_weight);
  o.meas_noise = p.get("meas_noise", o.meas_noise);
  o.prior_cov = p.get("prior_cov", o.prior_cov);
  o.speed = p.get("speed", o.speed);
  o.turn_rate = p.get("turn_rate", o.turn_rate);
  o.constant_velocity = p.get("constant_velocity", o.constant_velocity);
  o.noise_free = p.get("noise_free", o.noise_free);
  o.seed = seed;
  *windows = p.get("windows", 0);
  const auto inst = problems::build_tracking_instance(o);
  if (*windows > 0) return problems::tracking_window_problem(inst, *windows);
  return problems::tracking_problem(inst, o.comm_radius);
}

problems::ProblemInstance build_delivery(const Params& p, std::uint64_t seed) {
  problems::DeliveryOptions o;
  o.aerial = p.get("aerial", o.aerial);
  o.ground = p.get("ground", o.ground);
  o.steps = p.get("steps", o.steps);
  o.dt = p.get("dt", o.dt);
  o.control_max = p.get("control_max", o.control_max);
  o.ground_speed_max = p.get("ground_speed_max", o.ground_speed_max);
  o.aerial_height_max = p.get("aerial_height_max", o.aerial_height_max);
  o.station_height = p.get("station_height", o.station_height);
  o.boxes = p.get("boxes", o.boxes);
  o.default_meetings = p.get("default_meetings", o.default_meetings);
  o.comm_radius = p.get("comm_radius", o.comm_radius);
  if (p.has("meetings")) {
    const auto rows = p.get("meetings", std::vector<std::vector<int>>{});
    for (const auto& r : rows) {
      if (r.size() != 3) throw ConfigError("problem.meetings", "each meeting is [aerial, ground, time]");
      o.meetings.push_back({r[0], r[1], r[2]});
    }
  }
  o.seed = seed;
  return problems::delivery_problem(problems::build_delivery_instance(o), o.comm_radius);
}

problems::ProblemInstance build_mapping(const Params& p, std::uint64_t seed) {
  problems::MappingOptions o;
  o.robots = p.get("robots", o.robots);
  o.landmarks = p.get("landmarks", o.landmarks);
  o.steps = p.get("steps", o.steps);
  o.noise = p.get("noise", o.noise);
  o.sensing_radius = p.get("sensing_radius", o.sensing_radius);
  o.track_radius = p.get("track_radius", o.track_radius);
  o.weight = p.get("weight", o.weight);
  o.comm_radius = p.get("comm_radius", o.comm_radius);
  o.seed = seed;
  return problems::mapping_problem(problems::build_mapping_instance(o), o.comm_radius);
}

// f_i(x) = ½‖x − a_i‖²; the optimum is the mean of the targets.
problems::ProblemInstance build_quadratic(const Params& p) {
  const auto targets = p.get("targets", std::vector<std::vector<double>>{});
  if (targets.empty()) throw ConfigError("problem.targets", "expected a nonempty array of vectors");
  const auto n = static_cast<Eigen::Index>(targets.front().size());
  if (n == 0) throw ConfigError("problem.targets", "vectors must be nonempty");
  problems::ProblemInstance inst;
  inst.kind = "quadratic";
  inst.reference = Vector::Zero(n);
  for (const auto& t : targets) {
    if (static_cast<Eigen::Index>(t.size()) != n) throw ConfigError("problem.targets", "vectors differ in length");
    const Vector a = Eigen::Map<const Vector>(t.data(), n);
    inst.objectives.push_back(std::make_shared<QuadraticObjective>(Matrix::Identity(n, n), a, 0.5 * a.squaredNorm()));
    inst.reference += a / static_cast<double>(targets.size());
  }
  inst.ground_truth = inst.reference;
  if (targets.size() >= 2) inst.graph = chain_graph(static_cast<int>(targets.size()));
  else inst.graph = CommGraph(1, {});
  return inst;
}

std::unique_ptr<CommGraph> choose_graph(const RunConfig& cfg, const problems::ProblemInstance& inst) {
  const int n = inst.size();
  const std::string& type = cfg.graph.type;
  if (type == "instance") {
    if (!inst.graph) throw ConfigError("graph.type", "the problem has no graph of its own");
    return std::make_unique<CommGraph>(*inst.graph);
  }
  if (!inst.maps.empty()) throw ConfigError("graph.type", "windowed problems fix their own chain graph");
  if (type == "chain") return std::make_unique<CommGraph>(chain_graph(n));
  if (type == "complete") return std::make_unique<CommGraph>(complete_graph(n));
  if (!inst.graph || inst.graph->positions().empty())
    throw ConfigError("graph.type", "a range graph needs node positions");
  const auto& pos = inst.graph->positions();
  const double r = cfg.graph.radius > 0.0 ? cfg.graph.radius : problems::connecting_radius(pos);
  try {
    return std::make_unique<CommGraph>(range_limited_graph(pos, r));
  } catch (const DisconnectedError& e) {
    throw ConfigError("graph.radius", e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::string out_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int exit_for(Termination t) {
  switch (t) {
    case Termination::kConverged:
      return kExitConverged;
    case Termination::kDiverged:
      return kExitDiverged;
    default:
      return kExitCap;
  }
}

json tuned_json(const std::string& name, const bench::TuneOutcome& t, const bench::TuneTarget& target) {
  json history = json::array();
  for (const auto& [a, s] : t.gss.history) history.push_back({a, std::isfinite(s) ? json(s) : json("inf")});
  return {{"name", name},
          {"params", t.params},
          {"parameter", target.parameter},
          {"value", t.value},
          {"log10_value", t.gss.best},
          {"score", std::isfinite(t.gss.best_score) ? json(t.gss.best_score) : json("inf")},
          {"evaluations", t.gss.evaluations},
          {"history", history}};
}

}  // namespace

Prepared prepare(const RunConfig& cfg, const std::string& algorithm,
                 const std::optional<std::pair<std::string, int>>& size_override) {
  Prepared out;
  const json params = with_override(cfg.problem.params, size_override);
  const std::string& type = cfg.problem.type;
  int windows = 0;
  if (type == "tracking") {
    Params p(params, "problem",
             {"robots", "steps", "dt", "sensing_range", "comm_radius", "process_weight", "meas_noise", "prior_cov",
              "speed", "turn_rate", "constant_velocity", "noise_free", "windows"});
    out.instance = build_tracking(p, cfg.seed, &windows);
  } else if (type == "delivery") {
    Params p(params, "problem",
             {"aerial", "ground", "steps", "dt", "control_max", "ground_speed_max", "aerial_height_max",
              "station_height", "boxes", "default_meetings", "meetings", "comm_radius"});
    out.instance = build_delivery(p, cfg.seed);
  } else if (type == "mapping") {
    Params p(params, "problem",
             {"robots", "landmarks", "steps", "noise", "sensing_radius", "track_radius", "weight", "comm_radius"});
    out.instance = build_mapping(p, cfg.seed);
  } else if (type == "quadratic") {
    Params p(params, "problem", {"targets"});
    out.instance = build_quadratic(p);
  } else {
    Params p(params, "problem", {"path"});
    const std::string rel = p.get("path", std::string());
    if (rel.empty()) throw ConfigError("problem.path", "is required");
    const auto path = (std::filesystem::path(cfg.base_dir) / rel).string();
    std::ifstream in(path);
    if (!in) throw ConfigError("problem.path", "cannot open '" + path + "'");
    try {
      out.instance = problems::instance_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ConfigError("problem.path", e.what());
    }
  }
  out.graph = choose_graph(cfg, out.instance);
  out.context = out.instance.context(out.graph.get());
  if (algorithm == "sova" && out.context.maps.empty()) {
    // Identity maps reduce SOVA to consensus on the full vector.
    const Eigen::Index n = out.instance.reference.size();
    out.context.maps.resize(out.instance.size());
    for (int i = 0; i < out.instance.size(); ++i)
      for (std::size_t k = 0; k < out.graph->neighbors(i).size(); ++k)
        out.context.maps[i].emplace_back(Matrix::Identity(n, n), Matrix::Identity(n, n));
  }
  return out;
}

std::string trace_csv(const RunTrace& trace) {
  std::string s = "iteration,mse,cum_floats,cum_ops,cum_seconds\n";
  for (const auto& r : trace.records) {
    s += std::to_string(r.k) + ',' + bench::format_double(r.mse) + ',' + std::to_string(r.cum_floats) + ',' +
         std::to_string(r.cum_ops) + ',' + bench::format_double(r.cum_seconds) + '\n';
  }
  return s;
}

int cmd_run(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  if (cfg.algorithm.name.empty()) throw ConfigError("algorithm", "is required for run");
  Prepared prep = prepare(cfg, cfg.algorithm.name);
  if (!cfg.output.instance.empty())
    write_text(out_path(out_dir, cfg.output.instance), problems::instance_to_json(prep.instance).dump(1) + "\n");

  json params = bench::default_params(cfg.algorithm.name);
  params.update(cfg.algorithm.params);
  json tuned = nullptr;
  if (cfg.algorithm.tune.enabled) {
    const auto t = bench::tune_algorithm(cfg.algorithm.name, params, prep.context, cfg.stop, cfg.exec,
                                         cfg.algorithm.tune.target, cfg.algorithm.tune.iterations);
    params = t.params;
    tuned = tuned_json(cfg.algorithm.name, t, cfg.algorithm.tune.target);
    log << "tuned " << cfg.algorithm.tune.target.parameter << " = " << bench::format_double(t.value) << " ("
        << t.gss.evaluations << " evaluations)\n";
  }
  const auto algo = bench::make_algorithm(cfg.algorithm.name, params);
  const RunTrace trace = run_rounds(*algo, prep.context, cfg.stop, cfg.exec);

  write_text(out_path(out_dir, cfg.output.trace), trace_csv(trace));
  const auto& last = trace.last();
  json summary = {{"command", "run"},
                  {"problem", cfg.problem.type},
                  {"nodes", prep.instance.size()},
                  {"dim", prep.instance.reference.size()},
                  {"seed", cfg.seed},
                  {"algorithm", cfg.algorithm.name},
                  {"params", params},
                  {"tuned", tuned},
                  {"termination", to_string(trace.reason)},
                  {"iterations", trace.iterations()},
                  {"final_mse", last.mse},
                  {"cum_floats", last.cum_floats},
                  {"cum_ops", last.cum_ops},
                  {"cum_seconds", last.cum_seconds},
                  {"warnings", prep.instance.warnings}};
  if (trace.reason == Termination::kDiverged) summary["divergence"] = trace.divergence_message;
  write_text(out_path(out_dir, cfg.output.summary), summary.dump(2) + "\n");
  log << cfg.algorithm.name << ": " << to_string(trace.reason) << " after " << trace.iterations()
      << " iterations, mse " << bench::format_double(last.mse) << "\n";
  return exit_for(trace.reason);
}

int cmd_tune(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  if (cfg.algorithm.name.empty()) throw ConfigError("algorithm", "is required for tune");
  Prepared prep = prepare(cfg, cfg.algorithm.name);
  const TuneConfig tc = cfg.algorithm.tune.enabled
                            ? cfg.algorithm.tune
                            : TuneConfig{true, bench::default_tune_target(cfg.algorithm.name), 12};
  json params = bench::default_params(cfg.algorithm.name);
  params.update(cfg.algorithm.params);
  const auto t = bench::tune_algorithm(cfg.algorithm.name, params, prep.context, cfg.stop, cfg.exec, tc.target,
                                       tc.iterations);
  write_text(out_path(out_dir, cfg.output.tuned), tuned_json(cfg.algorithm.name, t, tc.target).dump(2) + "\n");
  log << "tuned " << tc.target.parameter << " = " << bench::format_double(t.value) << " after "
      << t.gss.evaluations << " evaluations (score " << bench::format_double(t.gss.best_score) << ")\n";
  if (!std::isfinite(t.gss.best_score)) return kExitDiverged;
  return t.gss.best_score <= static_cast<double>(cfg.stop.cap) ? kExitConverged : kExitCap;
}

int cmd_sweep(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  if (!cfg.sweep) throw ConfigError("sweep", "is required for sweep");
  const SweepConfig& sw = *cfg.sweep;
  if (sw.kind == "sensitivity") {
    if (cfg.algorithm.name.empty()) throw ConfigError("algorithm", "is required for a sensitivity sweep");
    Prepared prep = prepare(cfg, cfg.algorithm.name);
    const std::string parameter =
        sw.parameter.empty() ? bench::default_tune_target(cfg.algorithm.name).parameter : sw.parameter;
    if (!bench::default_params(cfg.algorithm.name).contains(parameter))
      throw ConfigError("sweep.parameter", "'" + parameter + "' is not a parameter of " + cfg.algorithm.name);
    const auto points = bench::stepsize_sensitivity(cfg.algorithm.name, cfg.algorithm.params, parameter, sw.grid,
                                                    prep.context, sw.cap, sw.tol, cfg.exec);
    write_text(out_path(out_dir, cfg.output.report), bench::sensitivity_csv(cfg.algorithm.name, parameter, points));
    int diverged = 0;
    for (const auto& p : points) diverged += p.diverged;
    log << "sensitivity: " << points.size() << " points, " << diverged << " diverged\n";
    return kExitConverged;
  }

  std::vector<Prepared> preps;
  std::vector<bench::SweepCase> cases;
  preps.reserve(sw.values.size());
  for (int v : sw.values) {
    preps.push_back(prepare(cfg, "", std::make_pair(sw.axis, v)));
    const auto& p = preps.back();
    cases.push_back({p.context, p.instance.size(), p.instance.reference.size()});
  }
  bench::SweepOptions opts;
  opts.stop = cfg.stop;
  opts.exec = cfg.exec;
  opts.float_cost = sw.float_cost;
  opts.ops_proxy = sw.ops_proxy;
  const auto report = bench::sweep_rwc(sw.algorithms, cases, sw.lambdas, opts);
  write_text(out_path(out_dir, cfg.output.report), report.to_csv());
  bool all = true;
  for (const auto& c : report.cells) all = all && c.converged;
  log << "sweep: " << report.cells.size() << " cells" << (all ? "" : ", some not converged") << "\n";
  return all ? kExitConverged : kExitCap;
}

}  // namespace dopt::cli
