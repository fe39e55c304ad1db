#include "pfl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "pfl/csv.hpp"
#include "pfl/fed_engine.hpp"
#include "pfl/rng.hpp"
#include "pfl/sev.hpp"

namespace pfl {

std::string to_string(Method m) {
  switch (m) {
    case Method::PFL: return "PFL";
    case Method::CFL: return "CFL";
    case Method::Local: return "Local";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "PFL") return Method::PFL;
  if (name == "CFL") return Method::CFL;
  if (name == "Local") return Method::Local;
  throw std::invalid_argument("unknown method '" + name + "' (expected PFL, CFL or Local)");
}

double quantile(std::span<const double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const auto n = static_cast<double>(s.size());
  const double np = n * p;
  const double j = std::floor(np);
  const auto at = [&](double k) {  // 1-based order statistic, clamped
    const auto i = static_cast<std::size_t>(std::clamp(k, 1.0, n)) - 1;
    return s[i];
  };
  if (np - j > 1e-12 * std::max(1.0, np)) return at(j + 1.0);
  return 0.5 * (at(j) + at(j + 1.0));
}

Summary summarize(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: empty sample");
  Summary s;
  s.median = quantile(samples, 0.5);
  s.q1 = quantile(samples, 0.25);
  s.q3 = quantile(samples, 0.75);
  s.iqr = s.q3 - s.q1;
  return s;
}

void HyperGrid::validate() const {
  if (lambdas.empty() || alphas.empty() || thetas.empty())
    throw ConfigError("hyper_grids: lambda, alpha and theta lists must be nonempty");
  for (double v : lambdas)
    if (!(v > 0.0)) throw ConfigError("hyper_grids: lambda values must be > 0");
  for (double v : alphas)
    if (!(v > 0.0)) throw ConfigError("hyper_grids: alpha values must be > 0");
  for (double v : thetas)
    if (!(v > 0.0)) throw ConfigError("hyper_grids: theta values must be > 0");
}

FedConfig apply_grid_point(const FedConfig& base, const HyperGrid& grid, const GridPoint& p) {
  FedConfig cfg = base;
  cfg.lambda = p.lambda;
  cfg.alpha = p.alpha;
  cfg.kernel = SimilarityKernel::make(grid.kind, p.theta, grid.lambda_p);
  return cfg;
}

namespace {

double held_out_error(const ClientParams& params, const ClientDataset& data, Eigen::Index row) {
  const double pred = std::exp(predict_median(params, data.features.row(row).transpose()));
  return mape(pred, std::exp(data.responses(row)));
}

// Strict ordering used for selection: score first, then the documented tie-breaks.
bool better(const GridScore& a, const GridScore& b) {
  const double tol = 1e-12 * std::max(1.0, std::min(std::abs(a.score), std::abs(b.score)));
  if (std::isfinite(a.score) && std::isfinite(b.score) && std::abs(a.score - b.score) > tol)
    return a.score < b.score;
  if (std::isfinite(a.score) != std::isfinite(b.score)) return std::isfinite(a.score);
  if (a.point.lambda != b.point.lambda) return a.point.lambda > b.point.lambda;
  if (a.point.alpha != b.point.alpha) return a.point.alpha < b.point.alpha;
  return a.point.theta < b.point.theta;
}

}  // namespace

LoocvResult loocv_select(const std::vector<ClientDataset>& train, const HyperGrid& grid,
                         const LoocvOptions& opts) {
  grid.validate();
  if (train.empty()) throw std::invalid_argument("loocv_select: no clients");
  Eigen::Index max_n = 0;
  for (const auto& d : train) {
    if (d.rows() < 2)
      throw std::invalid_argument("loocv_select: client '" + d.client_id +
                                  "' needs at least 2 training units");
    max_n = std::max(max_n, d.rows());
  }
  const std::size_t m = train.size();

  LoocvResult res;
  std::vector<GridPoint> feasible;
  for (double lam : grid.lambdas)
    for (double al : grid.alphas)
      for (double th : grid.thetas) {
        const GridPoint p{lam, al, th};
        if (apply_grid_point(opts.base, grid, p).is_feasible(m))
          feasible.push_back(p);
        else
          res.infeasible.push_back(p);
      }
  if (feasible.empty()) {
    std::ostringstream msg;
    msg << "loocv_select: every grid point violates gamma (m-1) A'(0) <= 1 for m=" << m
        << "; largest feasible alpha per theta:";
    for (double th : grid.thetas) {
      FedConfig c = apply_grid_point(opts.base, grid, GridPoint{1.0, 1.0, th});
      msg << " theta=" << th << " -> " << c.max_feasible_gamma(m) / 2.0;
    }
    throw ConfigError(msg.str());
  }
  if (feasible.size() == 1) {
    res.best = feasible.front();
    res.scores.push_back({feasible.front(), std::numeric_limits<double>::quiet_NaN(), ""});
    return res;
  }

  std::vector<Eigen::Index> folds(static_cast<std::size_t>(max_n));
  std::iota(folds.begin(), folds.end(), 0);
  if (opts.max_folds > 0 && static_cast<Eigen::Index>(opts.max_folds) < max_n) {
    Rng rng(derive_seed(opts.seed, "loocv-folds"));
    std::shuffle(folds.begin(), folds.end(), rng);
    folds.resize(static_cast<std::size_t>(opts.max_folds));
    std::sort(folds.begin(), folds.end());
  }
  res.folds = static_cast<int>(folds.size());

  // Fold datasets do not depend on the grid point.
  std::vector<std::vector<ClientDataset>> fold_train(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const auto& d : train) {
      std::vector<Eigen::Index> keep;
      for (Eigen::Index r = 0; r < d.rows(); ++r)
        if (r != folds[f]) keep.push_back(r);
      fold_train[f].push_back(d.subset(keep));
    }
  }

  for (const auto& p : feasible) {
    FedConfig cfg = apply_grid_point(opts.base, grid, p);
    cfg.record_trace = false;
    GridScore gs{p, 0.0, ""};
    try {
      std::vector<TransformedParams> start;
      if (opts.warm_start) {
        FedResult full = run_federated(train, cfg);
        if (opts.audit) opts.audit->merge(full.audit);
        start = std::move(full.final_w);
      }
      double total = 0.0;
      std::size_t count = 0;
      for (std::size_t f = 0; f < folds.size(); ++f) {
        FedResult fit = run_federated(fold_train[f], cfg, start);
        if (opts.audit) opts.audit->merge(fit.audit);
        for (std::size_t i = 0; i < m; ++i) {
          if (folds[f] >= train[i].rows()) continue;
          total += held_out_error(fit.params[i], train[i], folds[f]);
          ++count;
        }
      }
      gs.score = total / static_cast<double>(count);
    } catch (const std::exception& e) {
      gs.score = std::numeric_limits<double>::infinity();
      gs.error = e.what();
    }
    res.scores.push_back(gs);
  }

  const GridScore* best = &res.scores.front();
  for (const auto& s : res.scores)
    if (better(s, *best)) best = &s;
  if (!std::isfinite(best->score))
    throw std::runtime_error("loocv_select: every feasible grid point failed; first error: " +
                             res.scores.front().error);
  res.best = best->point;
  res.best_score = best->score;
  return res;
}

double score_client(const ClientParams& params, const EvalSet& eval) {
  if (eval.truth.size() != static_cast<std::size_t>(eval.data.rows()) ||
      eval.offset.size() != eval.truth.size())
    throw std::invalid_argument("score_client: evaluation set sizes disagree");
  if (eval.truth.empty()) throw std::invalid_argument("score_client: empty evaluation set");
  double total = 0.0;
  for (Eigen::Index r = 0; r < eval.data.rows(); ++r) {
    const auto j = static_cast<std::size_t>(r);
    const double ttf = std::exp(predict_median(params, eval.data.features.row(r).transpose()));
    total += mape(std::max(0.0, ttf - eval.offset[j]), eval.truth[j]);
  }
  return total / static_cast<double>(eval.truth.size());
}

EvalSet eval_from_log_responses(const ClientDataset& data) {
  EvalSet e;
  e.data = data;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    e.truth.push_back(std::exp(data.responses(r)));
    e.offset.push_back(0.0);
  }
  return e;
}

void ExperimentSpec::validate() const {
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (methods.empty()) throw ConfigError("method set must be nonempty");
  if (!data) throw ConfigError("experiment has no data source");
  if (loocv_max_folds < 0) throw ConfigError("loocv_max_folds must be >= 0");
  hyper_grids.validate();
  fed.validate();
  cfl.validate();
}

std::vector<double> ExperimentReport::values(Method m) const {
  std::vector<double> out;
  for (const auto& s : samples)
    if (s.method == m) out.push_back(s.value);
  return out;
}

std::vector<double> ExperimentReport::values(Method m, const std::string& client_id) const {
  std::vector<double> out;
  for (const auto& s : samples)
    if (s.method == m && s.client_id == client_id) out.push_back(s.value);
  return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.study = spec.study;
  report.seed = spec.seed;
  report.replications = spec.replications;
  report.methods = spec.methods;

  for (int r = 0; r < spec.replications; ++r) {
    ReplicationInfo info;
    info.replication = r;
    info.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(r));
    ReplicationData data;
    try {
      data = spec.data(derive_seed(info.seed, "data"));
    } catch (const std::exception& e) {
      report.errors.push_back("replication " + std::to_string(r) + ": data: " + e.what());
      report.partial = true;
      report.reps.push_back(info);
      continue;
    }
    if (report.client_ids.empty())
      for (const auto& d : data.train) report.client_ids.push_back(d.client_id);

    for (Method method : spec.methods) {
      try {
        std::vector<ClientParams> models;
        switch (method) {
          case Method::PFL: {
            FedConfig base = spec.fed;
            base.seed = derive_seed(info.seed, "pfl");
            base.record_trace = false;
            LoocvOptions lo;
            lo.base = base;
            lo.max_folds = spec.loocv_max_folds;
            lo.seed = derive_seed(info.seed, "loocv");
            lo.audit = &report.audit;
            const LoocvResult sel = loocv_select(data.train, spec.hyper_grids, lo);
            info.chosen = sel.best;
            info.loocv_score = sel.best_score;
            const FedResult fit =
                run_federated(data.train, apply_grid_point(base, spec.hyper_grids, sel.best));
            report.audit.merge(fit.audit);
            models = fit.params;
            break;
          }
          case Method::CFL: {
            CflConfig cc = spec.cfl;
            cc.seed = derive_seed(info.seed, "cfl");
            models.assign(data.train.size(), cfl_train(data.train, cc).params);
            break;
          }
          case Method::Local:
            for (const auto& d : data.train) models.push_back(local_mle(d).params);
            break;
        }
        for (std::size_t i = 0; i < data.test.size(); ++i)
          report.samples.push_back(
              {method, data.train[i].client_id, r, score_client(models[i], data.test[i])});
      } catch (const std::exception& e) {
        report.errors.push_back("replication " + std::to_string(r) + ": " + to_string(method) +
                                ": " + e.what());
        report.partial = true;
      }
    }
    report.reps.push_back(info);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_report_csv(std::ostream& out, const std::vector<Sample>& samples) {
  out << "method,client_id,replication,mape_pct\n" << std::setprecision(17);
  for (const auto& s : samples)
    out << to_string(s.method) << ',' << s.client_id << ',' << s.replication << ',' << s.value
        << '\n';
}

std::vector<Sample> read_report_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const auto methods = t.text_column("method");
  const auto clients = t.text_column("client_id");
  const auto reps = t.column("replication");
  const auto values = t.column("mape_pct");
  std::vector<Sample> out;
  for (std::size_t i = 0; i < methods.size(); ++i)
    out.push_back({parse_method(methods[i]), clients[i], static_cast<int>(reps[i]), values[i]});
  return out;
}

namespace {

nlohmann::ordered_json summary_object(const Summary& s, std::size_t n) {
  return {{"median", s.median}, {"iqr", s.iqr}, {"q1", s.q1}, {"q3", s.q3}, {"n", n}};
}

}  // namespace

std::string summary_json(const ExperimentReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["tool_version"] = kToolVersion;
  j["study"] = report.study;
  j["seed"] = report.seed;
  j["replications"] = report.replications;
  j["partial"] = report.partial;
  ordered_json methods = ordered_json::object();
  for (Method m : report.methods) {
    const auto all = report.values(m);
    if (all.empty()) {
      methods[to_string(m)] = nullptr;
      continue;
    }
    ordered_json entry = summary_object(summarize(all), all.size());
    ordered_json clients = ordered_json::object();
    for (const auto& id : report.client_ids) {
      const auto v = report.values(m, id);
      if (!v.empty()) clients[id] = summary_object(summarize(v), v.size());
    }
    entry["clients"] = clients;
    methods[to_string(m)] = entry;
  }
  j["methods"] = methods;
  ordered_json reps = ordered_json::array();
  for (const auto& r : report.reps) {
    ordered_json e{{"replication", r.replication}, {"seed", r.seed}};
    if (r.chosen) {
      e["lambda"] = r.chosen->lambda;
      e["alpha"] = r.chosen->alpha;
      e["theta"] = r.chosen->theta;
      e["loocv_score"] = r.loocv_score;
    }
    reps.push_back(e);
  }
  j["hyperparameters"] = reps;
  j["errors"] = report.errors;
  j["weight_audit"] = {{"min_weight", report.audit.min_weight},
                       {"max_sum_error", report.audit.max_sum_error},
                       {"vectors_checked", report.audit.vectors_checked}};
  j["wall_seconds"] = report.wall_seconds;
  return j.dump(2) + "\n";
}

void emit_report(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path csv_path = fs::path(dir) / "report.csv";
  const fs::path json_path = fs::path(dir) / "summary.json";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write '" + csv_path.string() + "'");
  write_report_csv(csv, report.samples);
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot write '" + json_path.string() + "'");
  js << summary_json(report);
  if (!csv || !js) throw std::runtime_error("write failed in '" + dir + "'");
}

}  // namespace pfl
