#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pfl/dataset.hpp"
#include "pfl/rng.hpp"

namespace pfl::simgen {

/// Settings for one simulated federation.
struct SimScenario {
  std::size_t m = 10;
  std::vector<int> n_train;   // per client
  std::vector<int> n_test;    // per client
  double sigma_scenario = 0.5;
  double c_mean = 4.0;
  double threshold = 2.0;     // D
  double dt = 0.001;
  double sigma_obs = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One simulated run-to-failure unit.
struct SimUnit {
  int unit_id = 0;
  double c = 0.0;       // true path coefficient
  double y_log = 0.0;   // log failure time, -c/D + eps
  double ttf = 0.0;     // exp(y_log) clamped into (dt, 0.999); bounds the signal horizon
  bool clamped = false;
  std::vector<double> tau;  // dt, 2dt, ... strictly below ttf
  std::vector<double> x;    // observed signal

  /// Failure time used as ground truth for percentage errors.
  double true_ttf() const;
};

struct SimClient {
  std::string client_id;
  double gain = 1.0;  // client sensor gain applied to the observed signal
  std::vector<SimUnit> train;
  std::vector<SimUnit> test;
};

struct Study {
  SimScenario scenario;
  std::vector<SimClient> clients;
  std::size_t clamped_units = 0;
};

/// Builds a unit from its draws. Signal x(tau) = gain * (-c / ln tau) + N(0, sigma_obs^2).
SimUnit make_unit(int unit_id, double c, double eps, double gain, double threshold, double dt,
                  double sigma_obs, Rng& noise_rng);

/// Draws the client gain and n units: c ~ N(c_mean, sigma^2), eps ~ SEV(0,1).
SimClient gen_client(const SimScenario& scenario, std::size_t client_index, int n_train,
                     int n_test, std::uint64_t client_seed);

/// Least-squares projection of the signal onto the known path shape u(tau) = -1/ln(tau):
/// returns (1, c_hat).
Eigen::VectorXd extract_feature(const SimUnit& unit);

ClientDataset to_dataset(const std::vector<SimUnit>& units, const std::string& client_id);

Study build_study(const SimScenario& scenario);

/// 10 clients x (50 train + 50 test).
Study build_study1(double sigma_scenario, std::uint64_t seed);
/// 20 clients, n train each, 100 test each, sigma 0.5.
Study build_study2_balanced(int n_per_client, std::uint64_t seed);
/// 20 clients with the given training sizes (default 50, 60, ..., 240), 100 test each.
Study build_study2_imbalanced(const std::vector<int>& sizes, std::uint64_t seed);
std::vector<int> default_imbalanced_sizes();
/// Three clients with 25 / 10 / 5 training units and 50 test units each.
Study build_three_client(std::uint64_t seed);

/// Per-client CSV: unit_id,y_log,ttf,feature_c_hat.
void write_units_csv(std::ostream& out, const std::vector<SimUnit>& units);
/// Long-format signal CSV: unit_id,tau,x.
void write_signals_csv(std::ostream& out, const std::vector<SimUnit>& units);

/// Reads a unit CSV back as a dataset (features (1, feature_c_hat), response y_log).
ClientDataset read_units_csv(std::istream& in, const std::string& client_id);

}  // namespace pfl::simgen
