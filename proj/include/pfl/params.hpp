#pragma once

#include <Eigen/Dense>

namespace pfl {

/// Per-client regression parameters on the natural scale: location x'beta, scale sigma.
struct ClientParams {
  Eigen::VectorXd beta;  // intercept first
  double sigma = 1.0;

  void validate() const;
};

/// Convex reparameterization: beta_t = beta / sigma, sigma_t = 1 / sigma.
struct TransformedParams {
  Eigen::VectorXd beta_t;
  double sigma_t = 1.0;

  Eigen::Index dim() const { return beta_t.size() + 1; }

  /// Packed as (beta_t_0, ..., beta_t_K, sigma_t).
  Eigen::VectorXd packed() const;
  static TransformedParams unpack(const Eigen::VectorXd& w);

  void validate() const;
};

TransformedParams transform(const ClientParams& params);
ClientParams untransform(const TransformedParams& w);

}  // namespace pfl
