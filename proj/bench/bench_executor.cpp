#include <benchmark/benchmark.h>

#include <map>

#include "dopt/bench/registry.hpp"
#include "dopt/problems/tracking.hpp"

namespace {

using namespace dopt;

const problems::ProblemInstance& tracking(int robots) {
  static std::map<int, problems::ProblemInstance> cache;
  auto it = cache.find(robots);
  if (it == cache.end()) {
    problems::TrackingOptions o;
    o.robots = robots;
    o.steps = 16;
    it = cache.emplace(robots, problems::tracking_problem(problems::build_tracking_instance(o))).first;
  }
  return it->second;
}

// state.range(0): robots, state.range(1): 0 serial, 1 OpenMP.
void run(benchmark::State& state, const std::string& name, const nlohmann::json& params) {
  const auto& prob = tracking(static_cast<int>(state.range(0)));
  const auto ctx = prob.context();
  const auto algo = bench::make_algorithm(name, params);
  const ExecOptions exec{state.range(1) != 0, false, false};
  const StopRule stop{0.0, 50, 1e300};
  for (auto _ : state) {
    auto trace = run_rounds(*algo, ctx, stop, exec);
    benchmark::DoNotOptimize(trace.last().mse);
  }
  state.SetLabel(exec.parallel ? "openmp" : "serial");
  state.SetItemsProcessed(state.iterations() * stop.cap * prob.size());
}

void BM_Extra(benchmark::State& s) { run(s, "extra", {{"alpha", 0.01}}); }
void BM_Next(benchmark::State& s) { run(s, "next", {{"alpha0", 0.001}}); }
void BM_Cadmm(benchmark::State& s) { run(s, "cadmm", {{"rho", 1.0}}); }
void BM_Nn(benchmark::State& s) { run(s, "nn", {{"alpha", 0.01}, {"K", 2}}); }

#define EXECUTOR_ARGS ArgsProduct({{10, 40}, {0, 1}})->Unit(benchmark::kMillisecond)
BENCHMARK(BM_Extra)->EXECUTOR_ARGS;
BENCHMARK(BM_Next)->EXECUTOR_ARGS;
BENCHMARK(BM_Cadmm)->EXECUTOR_ARGS;
BENCHMARK(BM_Nn)->EXECUTOR_ARGS;

}  // namespace

BENCHMARK_MAIN();
