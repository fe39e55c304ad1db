#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pfl/dataset.hpp"
#include "pfl/params.hpp"

namespace pfl {

struct LocalFit {
  ClientParams params;
  TransformedParams transformed;
  double grad_norm = 0.0;
  int iterations = 0;
  bool degenerate = false;  // near-exact fit drove sigma toward 0
};

/// Independent per-client maximum likelihood fit (Newton on the convex transformed nll).
/// Requires n >= K+2 rows.
LocalFit local_mle(const ClientDataset& data);

/// Conventional federated learning: FedAvg over a single shared model.
struct CflConfig {
  int rounds = 200;
  int local_steps = 5;      // E
  double local_lr = 0.1;    // starting step for per-step backtracking
  double early_stop_tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CflResult {
  ClientParams params;
  TransformedParams transformed;
  int rounds = 0;
  bool early_stopped = false;
};

/// Every round each client takes E backtracking gradient steps on its mean nll from the
/// current global model; the server replaces the global model by the n_i-weighted mean.
CflResult cfl_train(const std::vector<ClientDataset>& datasets, const CflConfig& cfg);

/// |pred - truth| / truth * 100. truth must be positive.
double mape(double pred, double truth);
double mean_mape(std::span<const double> pred, std::span<const double> truth);

}  // namespace pfl
