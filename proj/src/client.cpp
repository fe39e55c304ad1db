#include "pfl/client.hpp"

#include "pfl/rng.hpp"

namespace pfl {

NewtonResult prox_step_detailed(const ClientDataset& data, const TransformedParams& s,
                                const FedConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("prox_step: alpha must be > 0");
  if (!(cfg.lambda >= 0.0)) throw ConfigError("prox_step: lambda must be >= 0");
  NewtonOptions opts;
  opts.tol = cfg.inner_tol;
  opts.max_iter = cfg.inner_max_iter;
  return minimize_penalized_nll(data, s, cfg.lambda / cfg.alpha, s, opts);
}

TransformedParams prox_step(const ClientDataset& data, const TransformedParams& s,
                            const FedConfig& cfg) {
  return prox_step_detailed(data, s, cfg).w;
}

TransformedParams initial_params(std::uint64_t seed, const std::string& client_id,
                                 Eigen::Index dim) {
  Rng rng(derive_seed(seed, "init/" + client_id));
  Eigen::VectorXd w(dim);
  for (Eigen::Index k = 0; k < dim; ++k) w(k) = 10.0 * uniform_open(rng);
  return TransformedParams::unpack(w);
}

FederatedClient::FederatedClient(ClientDataset data) : data_(std::move(data)) {
  data_.validate();
}

TransformedParams FederatedClient::initialize(std::uint64_t seed) const {
  return initial_params(seed, data_.client_id, dim());
}

TransformedParams FederatedClient::refine(const TransformedParams& personalized,
                                          const FedConfig& cfg) const {
  return prox_step(data_, personalized, cfg);
}

}  // namespace pfl
