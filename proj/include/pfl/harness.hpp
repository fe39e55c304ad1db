#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfl/baselines.hpp"
#include "pfl/dataset.hpp"
#include "pfl/fed_config.hpp"
#include "pfl/server.hpp"

namespace pfl {

inline constexpr const char* kToolVersion = "1.0.0";

enum class Method { PFL, CFL, Local };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct Summary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

/// Quantiles average the two neighbouring order statistics at discontinuities, so
/// {1,2,3,4} gives median 2.5, Q1 1.5, Q3 3.5.
double quantile(std::span<const double> samples, double p);
Summary summarize(std::span<const double> samples);

struct HyperGrid {
  std::vector<double> lambdas{0.01, 0.1, 1.0, 10.0};
  std::vector<double> alphas{0.001, 0.005, 0.01, 0.05};
  std::vector<double> thetas{0.5, 1.0, 5.0, 10.0};
  KernelKind kind = KernelKind::NegExp;
  double lambda_p = 1.0;  // MCP / SCAD scale

  void validate() const;
};

struct GridPoint {
  double lambda = 0.0;
  double alpha = 0.0;
  double theta = 0.0;
};

/// Copy of base with the grid point's lambda, alpha and kernel.
FedConfig apply_grid_point(const FedConfig& base, const HyperGrid& grid, const GridPoint& p);

struct LoocvOptions {
  FedConfig base;
  int max_folds = 0;          // 0 keeps every fold
  std::uint64_t seed = 0;     // picks folds when capped
  bool warm_start = true;     // start fold fits from the full-data fit of the same grid point
  WeightAudit* audit = nullptr;
};

struct GridScore {
  GridPoint point;
  double score = 0.0;  // mean held-out percentage error; +inf when a fit failed
  std::string error;
};

struct LoocvResult {
  GridPoint best;
  double best_score = 0.0;
  std::vector<GridScore> scores;
  std::vector<GridPoint> infeasible;
  int folds = 0;
};

/// Fold j holds out training unit j of every client that has one, fits on the rest and
/// scores the held-out units by percentage error on exp(y). Lowest mean wins; ties go to
/// larger lambda, then smaller alpha, then smaller theta.
LoocvResult loocv_select(const std::vector<ClientDataset>& train, const HyperGrid& grid,
                         const LoocvOptions& opts);

/// Held-out units of one client. Prediction is max(0, exp(median) - offset), scored
/// against truth as a percentage error.
struct EvalSet {
  ClientDataset data;
  std::vector<double> truth;
  std::vector<double> offset;
};

struct ReplicationData {
  std::vector<ClientDataset> train;
  std::vector<EvalSet> test;
};

using DataProvider = std::function<ReplicationData(std::uint64_t data_seed)>;

/// Mean percentage error of one model on one client's held-out units.
double score_client(const ClientParams& params, const EvalSet& eval);

/// Turns simulated units into an evaluation set with truth exp(y_log).
EvalSet eval_from_log_responses(const ClientDataset& data);

struct ExperimentSpec {
  std::string study = "study1";
  DataProvider data;
  std::vector<Method> methods{Method::PFL, Method::CFL, Method::Local};
  int replications = 20;
  HyperGrid hyper_grids;
  std::uint64_t seed = 0;
  FedConfig fed;
  CflConfig cfl;
  int loocv_max_folds = 0;

  void validate() const;
};

struct Sample {
  Method method = Method::PFL;
  std::string client_id;
  int replication = 0;
  double value = 0.0;  // percentage error
};

struct ReplicationInfo {
  int replication = 0;
  std::uint64_t seed = 0;
  std::optional<GridPoint> chosen;
  double loocv_score = 0.0;
};

struct ExperimentReport {
  std::string study;
  std::uint64_t seed = 0;
  int replications = 0;
  std::vector<Method> methods;
  std::vector<std::string> client_ids;
  std::vector<Sample> samples;
  std::vector<ReplicationInfo> reps;
  std::vector<std::string> errors;
  bool partial = false;
  double wall_seconds = 0.0;
  WeightAudit audit;  // every aggregation of every federated run, cross-validation included

  std::vector<double> values(Method m) const;
  std::vector<double> values(Method m, const std::string& client_id) const;
};

ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Writes <dir>/report.csv and <dir>/summary.json.
void emit_report(const ExperimentReport& report, const std::string& dir);

/// Summary JSON text computed from the raw samples alone (plus metadata).
std::string summary_json(const ExperimentReport& report);

/// Reads the long CSV back (method,client_id,replication,mape_pct).
std::vector<Sample> read_report_csv(std::istream& in);
void write_report_csv(std::ostream& out, const std::vector<Sample>& samples);

}  // namespace pfl
