#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfl/dataset.hpp"

namespace pfl::cmapss {

/// One run-to-failure engine from a C-MAPSS training file.
struct EngineUnit {
  int unit_id = 0;
  std::vector<int> cycles;        // 1..L
  Eigen::MatrixXd op_settings;    // L x 3
  Eigen::MatrixXd sensors;        // L x 21, column k holds sensor k+1

  int failure_time() const { return static_cast<int>(cycles.size()); }
};

/// Whitespace-separated rows: unit, cycle, 3 settings, 21 sensors. Errors carry the line number.
std::vector<EngineUnit> parse_cmapss(std::istream& in);
std::vector<EngineUnit> parse_cmapss_file(const std::string& path);
void serialize_cmapss(std::ostream& out, const std::vector<EngineUnit>& units);

inline constexpr std::array<int, 4> kSelectedSensors{4, 15, 17, 20};

/// L x 4 matrix of sensors 4, 15, 17, 20 in that order.
Eigen::MatrixXd select_sensors(const EngineUnit& unit);

/// unit_id -> failure mode (1 or 2).
using FailureModes = std::map<int, int>;

/// CSV with columns unit_id,fm.
FailureModes read_labels(std::istream& in);

/// Uses the label map verbatim when given; otherwise splits the engines by 2-means on the
/// standardized mean of the last 5 cycles of the selected sensors, larger cluster = mode 1.
FailureModes assign_failure_modes(const std::vector<EngineUnit>& units,
                                  const FailureModes* labels = nullptr);

/// Natural cubic smoothing spline with knots at the observation times.
struct SplineFit {
  Eigen::VectorXd knots;
  Eigen::VectorXd values;   // fitted curve at the knots
  Eigen::VectorXd second;   // second derivative at the knots, zero at both ends
  double penalty = 0.0;

  double operator()(double t) const;
  double derivative(double t) const;
};

/// Minimizes sum (s(t_k) - z_k)^2 + rho * integral s''^2 (Reinsch).
SplineFit smooth_spline_fit(const Eigen::VectorXd& t, const Eigen::VectorXd& z, double rho);

std::vector<double> default_rho_grid();

/// 5-fold cross-validation (points assigned to folds by index mod 5); ties go to the larger rho.
double select_rho(const Eigen::VectorXd& t, const Eigen::VectorXd& z,
                  const std::vector<double>& grid);

/// (1, level_1, slope_1, ..., level_4, slope_4) from cycles 1..observed_up_to. Level is the
/// smoothed value at the last observed cycle and slope its per-cycle derivative.
Eigen::VectorXd extract_case_features(const EngineUnit& unit, int observed_up_to);

inline constexpr double kTrainFraction = 0.4;
inline constexpr double kTruncation = 0.7;

/// Number of cycles observed for a truncated test engine.
int truncated_length(int failure_time);

struct ClientTest {
  ClientDataset data;               // features of truncated signals, responses log failure time
  std::vector<int> unit_ids;
  std::vector<double> observed;     // cycles seen
  std::vector<double> rul_truth;    // failure_time - observed
};

struct CaseSplit {
  std::array<std::vector<int>, 4> train_ids;
  std::array<std::vector<int>, 2> test_pool;   // per failure mode
  double truncation = kTruncation;
};

struct CaseData {
  CaseSplit split;
  std::vector<ClientDataset> train;  // 4 clients
  std::vector<ClientTest> test;      // 4 clients; clients 1,2 and 3,4 share a pool
};

/// Per-engine features, computed once per data set.
struct FeatureCache {
  std::map<int, Eigen::VectorXd> full;
  std::map<int, Eigen::VectorXd> truncated;
  std::map<int, int> failure_time;
};

FeatureCache build_feature_cache(const std::vector<EngineUnit>& units);

/// Mode 1 engines are shuffled and dealt to clients 1 and 2, mode 2 to clients 3 and 4;
/// floor(40%) of each client's engines train, the rest join the mode's shared test pool.
CaseData build_case_split(const FeatureCache& cache, const FailureModes& modes,
                          std::uint64_t seed);
CaseData build_case_split(const std::vector<EngineUnit>& units, const FailureModes& modes,
                          std::uint64_t seed);

/// unit_id,role,y_log,f1..f8,rul_truth (rul_truth empty on train rows).
void write_case_features_csv(std::ostream& out, const ClientDataset& train,
                             const ClientTest& test, const std::vector<int>& train_ids);

}  // namespace pfl::cmapss
