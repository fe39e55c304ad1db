// Command-line entry point: simulation studies, the turbofan case study, fitting and
// prediction on feature tables.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pfl/cmapss.hpp"
#include "pfl/config.hpp"
#include "pfl/fed_engine.hpp"
#include "pfl/io.hpp"
#include "pfl/sev.hpp"
#include "pfl/studies.hpp"

namespace fs = std::filesystem;
using namespace pfl;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<int> reps;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON config with fed / cfl / experiment sections")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--reps", o.reps, "replications")->check(CLI::Range(1, 1000000));
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config_file(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.fed.seed = *o.seed;
    cfg.cfl.seed = *o.seed;
  }
  if (o.reps) cfg.replications = *o.reps;
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  return cfg;
}

ExperimentSpec make_spec(const RunConfig& cfg, std::string study, DataProvider data) {
  ExperimentSpec spec;
  spec.study = std::move(study);
  spec.data = std::move(data);
  spec.methods = cfg.methods;
  spec.replications = cfg.replications;
  spec.hyper_grids = cfg.hyper_grids;
  spec.seed = cfg.seed;
  spec.fed = cfg.fed;
  spec.cfl = cfg.cfl;
  spec.loocv_max_folds = cfg.loocv_max_folds;
  return spec;
}

void print_summary(const ExperimentReport& r, const std::string& dir) {
  std::cout << r.study << ": " << r.replications << " replications in " << std::fixed
            << std::setprecision(1) << r.wall_seconds << " s -> " << dir << '\n';
  for (Method m : r.methods) {
    const auto v = r.values(m);
    if (v.empty()) continue;
    const Summary s = summarize(v);
    std::cout << "  " << std::setw(5) << to_string(m) << "  median " << std::setprecision(3)
              << s.median << "  iqr " << s.iqr << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
  for (const auto& e : r.errors) std::cerr << "warning: " << e << '\n';
}

void run_and_emit(const ExperimentSpec& spec, const std::string& dir) {
  const ExperimentReport r = run_experiment(spec);
  emit_report(r, dir);
  print_summary(r, dir);
}

void dump_scenario(const simgen::Study& study, const std::string& dir, bool signals) {
  fs::create_directories(dir);
  for (const auto& c : study.clients) {
    for (const auto& [role, units] : {std::pair{"train", &c.train}, std::pair{"test", &c.test}}) {
      const std::string stem = dir + "/" + c.client_id + "_" + role;
      std::ofstream out(stem + ".csv");
      simgen::write_units_csv(out, *units);
      if (signals) {
        std::ofstream sig(stem + "_signal.csv");
        simgen::write_signals_csv(sig, *units);
      }
    }
  }
}

std::string client_id_from_path(const std::string& path) {
  std::string stem = fs::path(path).stem().string();
  for (const std::string suffix : {"_train", "_test"})
    if (stem.size() > suffix.size() && stem.ends_with(suffix))
      return stem.substr(0, stem.size() - suffix.size());
  return stem;
}

int fail(const std::string& kind, const std::string& message, int code) {
  nlohmann::json j{{"status", "error"}, {"kind", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized federated failure-time regression"};
  app.require_subcommand(1);

  CommonOptions sim_o, case_o, fit_o, pred_o;

  auto* sim = app.add_subcommand("simulate", "run a simulation study");
  std::string study, variant;
  std::optional<double> sigma;
  std::optional<int> n_per_client;
  std::string dump_dir;
  bool dump_signals = false;
  sim->add_option("study", study, "study1 or study2")
      ->required()
      ->check(CLI::IsMember({"study1", "study2"}));
  sim->add_option("variant", variant, "study2 variant: balanced, imbalanced or three-client")
      ->check(CLI::IsMember({"balanced", "imbalanced", "three-client"}));
  sim->add_option("--sigma", sigma, "coefficient dispersion for study1")
      ->check(CLI::PositiveNumber);
  sim->add_option("--n", n_per_client, "training units per client for study2 balanced")
      ->check(CLI::Range(1, 100000));
  sim->add_option("--dump-data", dump_dir, "write the first replication's units as CSV");
  sim->add_flag("--dump-signals", dump_signals, "also write the long-format signals");
  add_common(sim, sim_o);

  auto* cs = app.add_subcommand("case-study", "turbofan run-to-failure case study");
  std::string data_path, labels_path, features_dir;
  cs->add_option("--data", data_path, "C-MAPSS training file")->required();
  cs->add_option("--labels", labels_path, "CSV unit_id,fm");
  cs->add_option("--features-out", features_dir, "write the first split's feature tables");
  add_common(cs, case_o);

  auto* fit = app.add_subcommand("fit", "fit models on per-client feature tables");
  std::vector<std::string> train_files;
  std::string method_name = "PFL";
  bool select = false;
  fit->add_option("--train", train_files, "one table per client (client id = file stem)")
      ->required();
  fit->add_option("--method", method_name, "PFL, CFL or Local")
      ->check(CLI::IsMember({"PFL", "CFL", "Local"}));
  fit->add_flag("--select", select, "choose lambda, alpha, theta by cross-validation");
  add_common(fit, fit_o);

  auto* pred = app.add_subcommand("predict", "predict failure times from a fitted model");
  std::string model_path, pred_data, client;
  double prob = 0.5;
  pred->add_option("--model", model_path, "model.json from fit")->required();
  pred->add_option("--data", pred_data, "feature table")->required();
  pred->add_option("--client", client, "client id in the model")->required();
  pred->add_option("--quantile", prob, "predictive quantile")->check(CLI::Range(1e-12, 1 - 1e-12));
  add_common(pred, pred_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*sim) {
      RunConfig cfg = resolve(sim_o);
      if (study == "study1") {
        if (!variant.empty()) throw ConfigError("study1 takes no variant");
        const double s = sigma.value_or(cfg.sigma_scenario);
        if (!dump_dir.empty()) {
          const auto seed = derive_seed(derive_seed(cfg.seed, std::uint64_t{0}), "data");
          dump_scenario(simgen::build_study1(s, seed), dump_dir, dump_signals);
        }
        std::ostringstream name;
        name << "study1-sigma" << s;
        run_and_emit(make_spec(cfg, name.str(), study1_provider(s)), sim_o.out);
      } else {
        if (variant.empty()) throw ConfigError("study2 needs a variant");
        const auto seed0 = derive_seed(derive_seed(cfg.seed, std::uint64_t{0}), "data");
        if (variant == "balanced") {
          std::vector<int> ns;
          const int n = n_per_client.value_or(cfg.n_per_client);
          if (n > 0) ns = {n};
          else
            for (int k = 5; k <= 15; ++k) ns.push_back(k);
          for (int k : ns) {
            const std::string dir = ns.size() == 1 ? sim_o.out : sim_o.out + "/n" + std::to_string(k);
            if (!dump_dir.empty())
              dump_scenario(simgen::build_study2_balanced(k, seed0),
                            ns.size() == 1 ? dump_dir : dump_dir + "/n" + std::to_string(k),
                            dump_signals);
            run_and_emit(make_spec(cfg, "study2-balanced-n" + std::to_string(k),
                                   study2_balanced_provider(k)),
                         dir);
          }
        } else if (variant == "imbalanced") {
          const auto sizes = cfg.sizes.empty() ? simgen::default_imbalanced_sizes() : cfg.sizes;
          if (!dump_dir.empty())
            dump_scenario(simgen::build_study2_imbalanced(sizes, seed0), dump_dir, dump_signals);
          run_and_emit(make_spec(cfg, "study2-imbalanced", study2_imbalanced_provider(sizes)),
                       sim_o.out);
        } else {
          if (!dump_dir.empty())
            dump_scenario(simgen::build_three_client(seed0), dump_dir, dump_signals);
          run_and_emit(make_spec(cfg, "study2-three-client", three_client_provider()), sim_o.out);
        }
      }
    } else if (*cs) {
      RunConfig cfg = resolve(case_o);
      if (!fs::exists(data_path)) return fail("input", "missing data file '" + data_path + "'", 1);
      const auto units = cmapss::parse_cmapss_file(data_path);
      cmapss::FailureModes modes;
      if (!labels_path.empty()) {
        std::ifstream in(labels_path);
        if (!in) return fail("input", "missing labels file '" + labels_path + "'", 1);
        const auto labels = cmapss::read_labels(in);
        modes = cmapss::assign_failure_modes(units, &labels);
      } else {
        modes = cmapss::assign_failure_modes(units);
      }
      auto cache = std::make_shared<const cmapss::FeatureCache>(cmapss::build_feature_cache(units));
      if (!features_dir.empty()) {
        fs::create_directories(features_dir);
        const auto split = cmapss::build_case_split(
            *cache, modes, derive_seed(derive_seed(cfg.seed, std::uint64_t{0}), "data"));
        for (std::size_t c = 0; c < split.train.size(); ++c) {
          std::ofstream out(features_dir + "/" + split.train[c].client_id + ".csv");
          cmapss::write_case_features_csv(out, split.train[c], split.test[c],
                                          split.split.train_ids[c]);
        }
      }
      run_and_emit(make_spec(cfg, "case-study", case_study_provider(cache, modes)), case_o.out);
    } else if (*fit) {
      RunConfig cfg = resolve(fit_o);
      std::vector<ClientDataset> data;
      for (const auto& f : train_files)
        data.push_back(read_feature_csv_file(f, client_id_from_path(f), "train"));
      const Method method = parse_method(method_name);
      std::vector<ModelEntry> models;
      fs::create_directories(fit_o.out);
      if (method == Method::PFL) {
        FedConfig fc = cfg.fed;
        if (select) {
          LoocvOptions lo;
          lo.base = fc;
          lo.max_folds = cfg.loocv_max_folds;
          lo.seed = derive_seed(cfg.seed, "loocv");
          const auto sel = loocv_select(data, cfg.hyper_grids, lo);
          fc = apply_grid_point(fc, cfg.hyper_grids, sel.best);
          std::cout << "selected lambda " << sel.best.lambda << " alpha " << sel.best.alpha
                    << " theta " << sel.best.theta << '\n';
        }
        const FedResult r = run_federated(data, fc);
        std::vector<std::string> ids;
        for (const auto& d : data) ids.push_back(d.client_id);
        std::ofstream trace(fit_o.out + "/trace.csv");
        write_board_trace(trace, r.trace, ids);
        for (std::size_t i = 0; i < data.size(); ++i) models.push_back({ids[i], r.params[i]});
        std::cout << "iterations " << r.iterations << (r.early_stopped ? " (converged)" : "")
                  << '\n';
      } else if (method == Method::CFL) {
        const auto r = cfl_train(data, cfg.cfl);
        for (const auto& d : data) models.push_back({d.client_id, r.params});
      } else {
        for (const auto& d : data) models.push_back({d.client_id, local_mle(d).params});
      }
      std::ofstream out(fit_o.out + "/model.json");
      write_model_json(out, method_name, models);
      std::cout << "wrote " << fit_o.out << "/model.json\n";
    } else if (*pred) {
      resolve(pred_o);
      std::ifstream min(model_path);
      if (!min) return fail("input", "missing model file '" + model_path + "'", 1);
      const auto models = read_model_json(min);
      const ModelEntry* m = nullptr;
      for (const auto& e : models)
        if (e.client_id == client) m = &e;
      if (!m) throw std::invalid_argument("model has no client '" + client + "'");
      const ClientDataset d = read_feature_csv_file(pred_data, client);
      if (d.features.cols() != m->params.beta.size())
        throw std::invalid_argument("feature count of '" + pred_data + "' does not match model");
      fs::create_directories(pred_o.out);
      std::ofstream out(pred_o.out + "/predictions.csv");
      out << "row,pred_log,pred_ttf\n" << std::setprecision(17);
      for (Eigen::Index r = 0; r < d.rows(); ++r) {
        const double q = predict_quantile(m->params, d.features.row(r).transpose(), prob);
        out << r << ',' << q << ',' << std::exp(q) << '\n';
      }
      std::cout << "wrote " << pred_o.out << "/predictions.csv\n";
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
