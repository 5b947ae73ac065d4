#pragma once

#include <memory>
#include <ostream>
#include <string>

#include "dopt/cli/config.hpp"
#include "dopt/problems/instance.hpp"

namespace dopt::cli {

enum ExitCode : int {
  kExitConverged = 0,
  kExitConfig = 1,
  kExitCap = 2,
  kExitDiverged = 3,
  kExitRuntime = 4,
};

/// A problem instance together with the graph the run uses.
struct Prepared {
  problems::ProblemInstance instance;
  std::unique_ptr<CommGraph> graph;
  RunContext context;
};

/// Builds the configured problem; `size_override` replaces the sweep axis
/// parameter when set.
Prepared prepare(const RunConfig& cfg, const std::string& algorithm,
                 const std::optional<std::pair<std::string, int>>& size_override = std::nullopt);

std::string trace_csv(const RunTrace& trace);

int cmd_run(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_tune(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);

}  // namespace dopt::cli
