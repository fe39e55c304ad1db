#include "pfl/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pfl/csv.hpp"

namespace pfl::simgen {

void SimScenario::validate() const {
  if (m < 1) throw std::invalid_argument("scenario: m must be >= 1");
  if (n_train.size() != m || n_test.size() != m)
    throw std::invalid_argument("scenario: per-client size lists must have m entries");
  for (std::size_t i = 0; i < m; ++i)
    if (n_train[i] < 1 || n_test[i] < 0)
      throw std::invalid_argument("scenario: sample counts must be positive");
  if (!(sigma_scenario > 0.0)) throw std::invalid_argument("scenario: sigma_scenario must be > 0");
  if (!(c_mean > 0.0)) throw std::invalid_argument("scenario: c_mean must be > 0");
  if (!(threshold > 0.0)) throw std::invalid_argument("scenario: threshold D must be > 0");
  if (!(dt > 0.0 && dt < 1.0)) throw std::invalid_argument("scenario: dt must lie in (0,1)");
  if (!(sigma_obs >= 0.0)) throw std::invalid_argument("scenario: sigma_obs must be >= 0");
}

double SimUnit::true_ttf() const { return std::exp(y_log); }

SimUnit make_unit(int unit_id, double c, double eps, double gain, double threshold, double dt,
                  double sigma_obs, Rng& noise_rng) {
  SimUnit u;
  u.unit_id = unit_id;
  u.c = c;
  u.y_log = -c / threshold + eps;
  const double lo = dt * (1.0 + 1e-6);
  const double hi = 0.999;
  u.ttf = std::exp(u.y_log);
  if (u.ttf < lo || u.ttf > hi) {
    u.clamped = true;
    u.ttf = std::clamp(u.ttf, lo, hi);
  }
  // Largest k with k*dt strictly below ttf.
  const auto count = static_cast<int>(std::ceil(u.ttf / dt - 1e-9)) - 1;
  u.tau.reserve(static_cast<std::size_t>(count));
  u.x.reserve(static_cast<std::size_t>(count));
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int k = 1; k <= count; ++k) {
    const double tau = k * dt;
    u.tau.push_back(tau);
    const double e = sigma_obs > 0.0 ? sigma_obs * noise(noise_rng) : 0.0;
    u.x.push_back(gain * (-c / std::log(tau)) + e);
  }
  return u;
}

SimClient gen_client(const SimScenario& scenario, std::size_t client_index, int n_train,
                     int n_test, std::uint64_t client_seed) {
  SimClient client;
  client.client_id = "client" + std::to_string(client_index + 1);

  Rng gain_rng(derive_seed(client_seed, "gain"));
  std::normal_distribution<double> cbar(scenario.c_mean, scenario.sigma_scenario);
  client.gain = cbar(gain_rng) / scenario.c_mean;

  Rng unit_rng(derive_seed(client_seed, "units"));
  Rng noise_rng(derive_seed(client_seed, "noise"));
  std::normal_distribution<double> coef(scenario.c_mean, scenario.sigma_scenario);
  const int total = n_train + n_test;
  for (int j = 0; j < total; ++j) {
    const double c = coef(unit_rng);
    const double eps = std::log(-std::log(uniform_open(unit_rng)));  // SEV(0,1)
    SimUnit u = make_unit(j, c, eps, client.gain, scenario.threshold, scenario.dt,
                          scenario.sigma_obs, noise_rng);
    (j < n_train ? client.train : client.test).push_back(std::move(u));
  }
  return client;
}

Eigen::VectorXd extract_feature(const SimUnit& unit) {
  if (unit.x.empty() || unit.x.size() != unit.tau.size())
    throw std::invalid_argument("extract_feature: empty or inconsistent signal");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < unit.x.size(); ++k) {
    const double u = -1.0 / std::log(unit.tau[k]);
    num += unit.x[k] * u;
    den += u * u;
  }
  Eigen::VectorXd f(2);
  f << 1.0, num / den;
  return f;
}

ClientDataset to_dataset(const std::vector<SimUnit>& units, const std::string& client_id) {
  ClientDataset d;
  d.client_id = client_id;
  d.features.resize(static_cast<Eigen::Index>(units.size()), 2);
  d.responses.resize(static_cast<Eigen::Index>(units.size()));
  for (std::size_t j = 0; j < units.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    d.features.row(r) = extract_feature(units[j]).transpose();
    d.responses(r) = units[j].y_log;
  }
  return d;
}

Study build_study(const SimScenario& scenario) {
  scenario.validate();
  Study s;
  s.scenario = scenario;
  for (std::size_t i = 0; i < scenario.m; ++i) {
    s.clients.push_back(gen_client(scenario, i, scenario.n_train[i], scenario.n_test[i],
                                   derive_seed(scenario.seed, static_cast<std::uint64_t>(i))));
    for (const auto* part : {&s.clients.back().train, &s.clients.back().test})
      for (const auto& u : *part) s.clamped_units += u.clamped ? 1 : 0;
  }
  return s;
}

Study build_study1(double sigma_scenario, std::uint64_t seed) {
  SimScenario sc;
  sc.m = 10;
  sc.n_train.assign(10, 50);
  sc.n_test.assign(10, 50);
  sc.sigma_scenario = sigma_scenario;
  sc.seed = seed;
  return build_study(sc);
}

Study build_study2_balanced(int n_per_client, std::uint64_t seed) {
  if (n_per_client < 1) throw std::invalid_argument("study2 balanced: n must be >= 1");
  SimScenario sc;
  sc.m = 20;
  sc.n_train.assign(20, n_per_client);
  sc.n_test.assign(20, 100);
  sc.sigma_scenario = 0.5;
  sc.seed = seed;
  return build_study(sc);
}

std::vector<int> default_imbalanced_sizes() {
  std::vector<int> sizes;
  for (int n = 50; n <= 240; n += 10) sizes.push_back(n);
  return sizes;
}

Study build_study2_imbalanced(const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.size() != 20)
    throw std::invalid_argument("study2 imbalanced: expected 20 client sizes, got " +
                                std::to_string(sizes.size()));
  SimScenario sc;
  sc.m = 20;
  sc.n_train = sizes;
  sc.n_test.assign(20, 100);
  sc.sigma_scenario = 0.5;
  sc.seed = seed;
  return build_study(sc);
}

Study build_three_client(std::uint64_t seed) {
  SimScenario sc;
  sc.m = 3;
  sc.n_train = {25, 10, 5};
  sc.n_test.assign(3, 50);
  sc.sigma_scenario = 0.5;
  sc.seed = seed;
  return build_study(sc);
}

void write_units_csv(std::ostream& out, const std::vector<SimUnit>& units) {
  out << "unit_id,y_log,ttf,feature_c_hat\n" << std::setprecision(17);
  for (const auto& u : units)
    out << u.unit_id << ',' << u.y_log << ',' << u.ttf << ',' << extract_feature(u)(1) << '\n';
}

void write_signals_csv(std::ostream& out, const std::vector<SimUnit>& units) {
  out << "unit_id,tau,x\n" << std::setprecision(17);
  for (const auto& u : units)
    for (std::size_t k = 0; k < u.x.size(); ++k)
      out << u.unit_id << ',' << u.tau[k] << ',' << u.x[k] << '\n';
}

ClientDataset read_units_csv(std::istream& in, const std::string& client_id) {
  const CsvTable table = read_csv(in);
  const auto y = table.column("y_log");
  const auto c = table.column("feature_c_hat");
  ClientDataset d;
  d.client_id = client_id;
  d.features.resize(static_cast<Eigen::Index>(y.size()), 2);
  d.responses.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t j = 0; j < y.size(); ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    d.features(r, 0) = 1.0;
    d.features(r, 1) = c[j];
    d.responses(r) = y[j];
  }
  d.validate();
  return d;
}

}  // namespace pfl::simgen
