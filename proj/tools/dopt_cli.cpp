#include <filesystem>
#include <iostream>
#include <ostream>
#include <streambuf>

#include <CLI11.hpp>

#include "dopt/cli/commands.hpp"

namespace {

class NullBuffer : public std::streambuf {
 protected:
  int overflow(int c) override { return c; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized optimization benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool quiet = false;

  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed override");
    sub->add_flag("--quiet", quiet, "Suppress progress output");
  };
  auto* run = app.add_subcommand("run", "Run one algorithm on one problem");
  auto* sweep = app.add_subcommand("sweep", "RWC or step-size sensitivity sweep");
  auto* tune = app.add_subcommand("tune", "Tune one hyperparameter with golden-section search");
  for (auto* sub : {run, sweep, tune}) add_flags(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : dopt::cli::kExitConfig;
  }

  NullBuffer null_buffer;
  std::ostream null_stream(&null_buffer);
  std::ostream& log = quiet ? null_stream : std::cerr;

  try {
    dopt::cli::RunConfig cfg = dopt::cli::load_config(config_path);
    for (auto* sub : {run, sweep, tune})
      if (sub->parsed() && sub->count("--seed")) cfg.seed = seed;
    std::filesystem::create_directories(out_dir);
    if (run->parsed()) return dopt::cli::cmd_run(cfg, out_dir, log);
    if (sweep->parsed()) return dopt::cli::cmd_sweep(cfg, out_dir, log);
    return dopt::cli::cmd_tune(cfg, out_dir, log);
  } catch (const dopt::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dopt::cli::kExitConfig;
  } catch (const dopt::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dopt::cli::kExitConfig;
  } catch (const dopt::CapabilityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dopt::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dopt::cli::kExitRuntime;
  }
}
