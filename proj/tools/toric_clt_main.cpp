// Command-line front end: config-driven experiment runs with CSV/JSON reports.

#include "toric/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  int threads = -1;
  int nodes = -1;
  std::string route;
};

void attach_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Experiment config file");
  cmd->add_option("--out", opts.out_dir, "Output directory for CSV/JSON reports");
  cmd->add_option("--threads", opts.threads, "Worker threads (default: TORIC_CLT_THREADS or hardware)");
  cmd->add_option("--nodes", opts.nodes, "Quadrature nodes per axis");
  cmd->add_option("--route", opts.route, "Norming-constant route: rho, x or both")
      ->check(CLI::IsMember({"rho", "x", "both"}));
}

int run_command(const std::string& experiment, const CommonOptions& opts) {
  try {
    toric::ExperimentConfig cfg = opts.config_path.empty()
                                      ? toric::ExperimentConfig::defaults()
                                      : toric::parse_config_file(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.threads >= 0) cfg.threads = opts.threads;
    if (opts.nodes >= 0) cfg.quad.nodes_per_axis = opts.nodes;
    if (opts.route == "rho") { cfg.quad.route = toric::Route::Rho; cfg.route_both = false; }
    else if (opts.route == "x") { cfg.quad.route = toric::Route::X; cfg.route_both = false; }
    else if (opts.route == "both") { cfg.quad.route = toric::Route::X; cfg.route_both = true; }
    return toric::run(cfg, experiment, std::cout);
  } catch (const toric::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const toric::error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bergman lattice measures on toric Kahler manifolds: "
               "limit-theorem verification harness"};
  app.require_subcommand(1);

  std::vector<std::pair<std::string, CommonOptions>> commands;
  commands.reserve(toric::kExperimentNames.size() + 1);
  for (const std::string& name : toric::kExperimentNames) commands.push_back({name, {}});
  commands.push_back({"all", {}});

  for (auto& [name, opts] : commands) {
    CLI::App* cmd = app.add_subcommand(name, "Run the '" + name + "' experiment");
    attach_common(cmd, opts);
  }

  CLI11_PARSE(app, argc, argv);

  for (auto& [name, opts] : commands)
    if (app.got_subcommand(name)) return run_command(name, opts);
  return 2;
}
