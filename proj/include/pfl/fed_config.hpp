#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pfl/similarity.hpp"

namespace pfl {

/// Invalid or infeasible configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Hyperparameters of the personalized federated loop.
///
/// The proximal coefficient is lambda / (2 alpha), so lambda scales both the
/// similarity penalty and the strength of the pull toward the aggregated model.
struct FedConfig {
  double lambda = 1.0;    // regularization weight on the similarity penalty
  double alpha = 0.01;    // gradient step on the penalty
  SimilarityKernel kernel = SimilarityKernel::neg_exp(1.0);
  int max_iter = 200;     // M*
  double inner_tol = 1e-8;
  int inner_max_iter = 100;
  double early_stop_tol = 1e-6;
  std::uint64_t seed = 0;
  bool record_trace = true;

  /// Aggregation step; always exactly 2 * alpha.
  double gamma() const { return 2.0 * alpha; }

  void validate() const;

  /// Largest gamma for which every self-weight stays nonnegative with m clients.
  double max_feasible_gamma(std::size_t m) const;

  /// Throws ConfigError when gamma (m-1) A'(0) > 1.
  void check_feasible(std::size_t m) const;
  bool is_feasible(std::size_t m) const;
};

}  // namespace pfl
