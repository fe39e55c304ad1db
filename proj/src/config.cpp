#include "pfl/config.hpp"

#include <cmath>
#include <fstream>
#include <optional>

namespace pfl {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw ConfigError("config field '" + path + "': " + why);
}

double get_real(const json& v, const std::string& path) {
  if (!v.is_number()) bad_field(path, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad_field(path, "expected an integer");
  return v.get<int>();
}

std::uint64_t get_seed(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad_field(path, "expected a nonnegative integer");
}

std::vector<double> get_reals(const json& v, const std::string& path) {
  if (!v.is_array()) bad_field(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(get_real(e, path));
  return out;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) bad_field(path, "expected an object");
}

void apply_kernel(FedConfig& fed, const json& j) {
  require_object(j, "fed.kernel");
  auto kind = fed.kernel.kind();
  double theta = fed.kernel.theta();
  double lambda_p = fed.kernel.lambda_p();
  for (const auto& [key, v] : j.items()) {
    if (key == "kind") {
      if (!v.is_string()) bad_field("fed.kernel.kind", "expected a string");
      try {
        kind = parse_kernel_kind(v.get<std::string>());
      } catch (const std::exception& e) {
        bad_field("fed.kernel.kind", e.what());
      }
    } else if (key == "theta") {
      theta = get_real(v, "fed.kernel.theta");
    } else if (key == "lambda_p") {
      lambda_p = get_real(v, "fed.kernel.lambda_p");
    } else {
      bad_field("fed.kernel." + key, "unknown field");
    }
  }
  try {
    fed.kernel = SimilarityKernel::make(kind, theta, lambda_p);
  } catch (const std::exception& e) {
    bad_field("fed.kernel", e.what());
  }
}

void apply_fed(FedConfig& fed, const json& j) {
  require_object(j, "fed");
  std::optional<double> gamma;
  for (const auto& [key, v] : j.items()) {
    const std::string path = "fed." + key;
    if (key == "lambda") fed.lambda = get_real(v, path);
    else if (key == "alpha") fed.alpha = get_real(v, path);
    else if (key == "gamma") gamma = get_real(v, path);
    else if (key == "kernel") apply_kernel(fed, v);
    else if (key == "max_iter") fed.max_iter = get_int(v, path);
    else if (key == "inner_tol") fed.inner_tol = get_real(v, path);
    else if (key == "inner_max_iter") fed.inner_max_iter = get_int(v, path);
    else if (key == "early_stop_tol") fed.early_stop_tol = get_real(v, path);
    else if (key == "seed") fed.seed = get_seed(v, path);
    else bad_field(path, "unknown field");
  }
  if (gamma && *gamma != fed.gamma())
    bad_field("fed.gamma", "must equal 2 * alpha (" + std::to_string(fed.gamma()) + ")");
  try {
    fed.validate();
  } catch (const ConfigError& e) {
    bad_field("fed", e.what());
  }
}

void apply_cfl(CflConfig& cfl, const json& j) {
  require_object(j, "cfl");
  for (const auto& [key, v] : j.items()) {
    const std::string path = "cfl." + key;
    if (key == "rounds") cfl.rounds = get_int(v, path);
    else if (key == "local_steps") cfl.local_steps = get_int(v, path);
    else if (key == "local_lr") cfl.local_lr = get_real(v, path);
    else if (key == "early_stop_tol") cfl.early_stop_tol = get_real(v, path);
    else if (key == "seed") cfl.seed = get_seed(v, path);
    else bad_field(path, "unknown field");
  }
  try {
    cfl.validate();
  } catch (const std::exception& e) {
    bad_field("cfl", e.what());
  }
}

void apply_experiment(RunConfig& cfg, const json& j) {
  require_object(j, "experiment");
  for (const auto& [key, v] : j.items()) {
    const std::string path = "experiment." + key;
    if (key == "methods") {
      if (!v.is_array() || v.empty()) bad_field(path, "expected a nonempty array of names");
      cfg.methods.clear();
      for (const auto& m : v) {
        if (!m.is_string()) bad_field(path, "expected method names");
        try {
          cfg.methods.push_back(parse_method(m.get<std::string>()));
        } catch (const std::exception& e) {
          bad_field(path, e.what());
        }
      }
    } else if (key == "replications") {
      cfg.replications = get_int(v, path);
      if (cfg.replications < 1) bad_field(path, "must be >= 1");
    } else if (key == "seed") {
      cfg.seed = get_seed(v, path);
    } else if (key == "loocv_max_folds") {
      cfg.loocv_max_folds = get_int(v, path);
      if (cfg.loocv_max_folds < 0) bad_field(path, "must be >= 0");
    } else if (key == "hyper_grids") {
      require_object(v, path);
      for (const auto& [gk, gv] : v.items()) {
        const std::string gpath = path + "." + gk;
        if (gk == "lambda") cfg.hyper_grids.lambdas = get_reals(gv, gpath);
        else if (gk == "alpha") cfg.hyper_grids.alphas = get_reals(gv, gpath);
        else if (gk == "theta") cfg.hyper_grids.thetas = get_reals(gv, gpath);
        else if (gk == "kernel") {
          if (!gv.is_string()) bad_field(gpath, "expected a string");
          try {
            cfg.hyper_grids.kind = parse_kernel_kind(gv.get<std::string>());
          } catch (const std::exception& e) {
            bad_field(gpath, e.what());
          }
        } else if (gk == "lambda_p") {
          cfg.hyper_grids.lambda_p = get_real(gv, gpath);
        } else {
          bad_field(gpath, "unknown field");
        }
      }
      try {
        cfg.hyper_grids.validate();
      } catch (const std::exception& e) {
        bad_field(path, e.what());
      }
    } else if (key == "scenario") {
      require_object(v, path);
      for (const auto& [sk, sv] : v.items()) {
        const std::string spath = path + "." + sk;
        if (sk == "sigma_scenario") {
          cfg.sigma_scenario = get_real(sv, spath);
          if (!(cfg.sigma_scenario > 0.0)) bad_field(spath, "must be > 0");
        } else if (sk == "n_per_client") {
          cfg.n_per_client = get_int(sv, spath);
          if (cfg.n_per_client < 0) bad_field(spath, "must be >= 0");
        } else if (sk == "sizes") {
          if (!sv.is_array()) bad_field(spath, "expected an array of integers");
          cfg.sizes.clear();
          for (const auto& e : sv) cfg.sizes.push_back(get_int(e, spath));
        } else {
          bad_field(spath, "unknown field");
        }
      }
    } else {
      bad_field(path, "unknown field");
    }
  }
}

}  // namespace

void apply_config(RunConfig& cfg, const nlohmann::json& j) {
  require_object(j, "<root>");
  for (const auto& [key, v] : j.items()) {
    if (key == "fed") apply_fed(cfg.fed, v);
    else if (key == "cfl") apply_cfl(cfg.cfl, v);
    else if (key == "experiment") apply_experiment(cfg, v);
    else bad_field(key, "unknown section (expected fed, cfl or experiment)");
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  RunConfig cfg;
  apply_config(cfg, j);
  return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  return {
      {"fed",
       {{"lambda", cfg.fed.lambda},
        {"alpha", cfg.fed.alpha},
        {"gamma", cfg.fed.gamma()},
        {"kernel",
         {{"kind", to_string(cfg.fed.kernel.kind())},
          {"theta", cfg.fed.kernel.theta()},
          {"lambda_p", cfg.fed.kernel.lambda_p()}}},
        {"max_iter", cfg.fed.max_iter},
        {"inner_tol", cfg.fed.inner_tol},
        {"inner_max_iter", cfg.fed.inner_max_iter},
        {"early_stop_tol", cfg.fed.early_stop_tol},
        {"seed", cfg.fed.seed}}},
      {"cfl",
       {{"rounds", cfg.cfl.rounds},
        {"local_steps", cfg.cfl.local_steps},
        {"local_lr", cfg.cfl.local_lr},
        {"early_stop_tol", cfg.cfl.early_stop_tol},
        {"seed", cfg.cfl.seed}}},
      {"experiment",
       {{"methods", methods},
        {"replications", cfg.replications},
        {"seed", cfg.seed},
        {"loocv_max_folds", cfg.loocv_max_folds},
        {"hyper_grids",
         {{"lambda", cfg.hyper_grids.lambdas},
          {"alpha", cfg.hyper_grids.alphas},
          {"theta", cfg.hyper_grids.thetas},
          {"kernel", to_string(cfg.hyper_grids.kind)},
          {"lambda_p", cfg.hyper_grids.lambda_p}}},
        {"scenario",
         {{"sigma_scenario", cfg.sigma_scenario},
          {"n_per_client", cfg.n_per_client},
          {"sizes", cfg.sizes}}}}}};
}

}  // namespace pfl
