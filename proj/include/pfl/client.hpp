#pragma once

#include <cstdint>

#include "pfl/dataset.hpp"
#include "pfl/fed_config.hpp"
#include "pfl/newton.hpp"
#include "pfl/params.hpp"

namespace pfl {

/// Proximal refinement on private data:
///   argmin_w  l(w) + (lambda / (2 alpha)) ||w - s||^2,
/// warm-started at s. lambda = 0 reduces to the local MLE.
TransformedParams prox_step(const ClientDataset& data, const TransformedParams& s,
                            const FedConfig& cfg);

/// Same as prox_step but also returns solver diagnostics.
NewtonResult prox_step_detailed(const ClientDataset& data, const TransformedParams& s,
                                const FedConfig& cfg);

/// Initial parameters drawn from U(0,10)^(K+2) on a stream keyed by (seed, client_id).
TransformedParams initial_params(std::uint64_t seed, const std::string& client_id,
                                 Eigen::Index dim);

/// A participant in the federated loop; owns its data and exposes parameters only.
class FederatedClient {
 public:
  explicit FederatedClient(ClientDataset data);

  const std::string& id() const { return data_.client_id; }
  Eigen::Index dim() const { return data_.features.cols() + 1; }

  TransformedParams initialize(std::uint64_t seed) const;
  TransformedParams refine(const TransformedParams& personalized, const FedConfig& cfg) const;

 private:
  ClientDataset data_;
};

}  // namespace pfl
