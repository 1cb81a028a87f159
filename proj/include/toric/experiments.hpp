#pragma once

#include "toric/bergman.hpp"
#include "toric/limits.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace toric {

using json = nlohmann::ordered_json;

struct ModelSpec {
  std::string potential = "fs";  // fs | fs-product | fs-perturbed
  int dim = 1;
  double eps = 0.05;             // fs-perturbed
  std::string bump = "gaussian"; // fs-perturbed
  std::string label() const;
};

/// Acceptance band for one rate experiment; max_error_at_kmax is optional.
struct BandSpec {
  double slope_min = 0.0;
  double slope_max = 0.0;
  std::optional<double> max_error_at_kmax;
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<Vec> base_points;
  std::vector<int> ks;
  QuadratureSpec quad;
  bool route_both = false;  // norming experiment: emit both routes
  int threads = 0;          // 0 = environment/hardware
  std::string out_dir = ".";
  std::map<std::string, BandSpec> bands;          // keyed by experiment name
  std::optional<DelzantPolytope> polytope_override;  // lattice experiment only
  std::vector<Vec> laplace_ratio_points;          // defaults chosen by dim

  static ExperimentConfig defaults();
  void validate() const;  // throws config_error naming the offending field
};

/// Default acceptance band for an experiment name.
BandSpec default_band(const std::string& experiment);

/// Parses the flat key-value config format:
///   [section] lines, "key = value" pairs, '#' comments,
///   repeatable keys "rho" (base points) and "facet" (polytope rows).
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

ToricPotential make_potential(const ModelSpec& spec);

/// Writes the plot-ready CSV (columns k, error, fit, log_k, log_error) and a
/// "<path>.fit.json" sidecar with the fitted-line parameters.
void emit_plot_data(const ConvergenceReport& report, const std::string& path);

extern const std::vector<std::string> kExperimentNames;

/// Runs one experiment ("all" runs every one), writes CSV/JSON reports under
/// config.out_dir, prints one PASS/FAIL line per experiment report, and
/// returns the process exit status: 0 all bands pass, 1 a band failed,
/// 3 numerical failure. (Config errors are raised by parse/validate as
/// config_error; the CLI maps them to exit 2.)
int run(const ExperimentConfig& config, const std::string& experiment, std::ostream& log);

}  // namespace toric
