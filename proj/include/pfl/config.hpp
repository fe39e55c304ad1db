#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "pfl/baselines.hpp"
#include "pfl/fed_config.hpp"
#include "pfl/harness.hpp"

namespace pfl {

/// Everything a command can be configured with. Field names in the file match the
/// struct fields: {"fed": {...}, "cfl": {...}, "experiment": {...}}.
struct RunConfig {
  FedConfig fed;
  CflConfig cfl;
  HyperGrid hyper_grids;
  std::vector<Method> methods{Method::PFL, Method::CFL, Method::Local};
  int replications = 20;
  std::uint64_t seed = 0;
  int loocv_max_folds = 20;
  double sigma_scenario = 0.5;
  int n_per_client = 0;        // study2 balanced; 0 sweeps 5..15
  std::vector<int> sizes;      // study2 imbalanced; empty means 50, 60, ..., 240
};

/// Applies the keys present in j on top of cfg. Unknown or ill-typed fields throw
/// ConfigError naming the field.
void apply_config(RunConfig& cfg, const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace pfl
