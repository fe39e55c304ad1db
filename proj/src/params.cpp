#include "pfl/params.hpp"

#include <cmath>
#include <stdexcept>

namespace pfl {

void ClientParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("ClientParams: sigma must be positive and finite");
  if (beta.size() < 1 || !beta.allFinite())
    throw std::invalid_argument("ClientParams: beta must be nonempty and finite");
}

Eigen::VectorXd TransformedParams::packed() const {
  Eigen::VectorXd w(dim());
  w.head(beta_t.size()) = beta_t;
  w(beta_t.size()) = sigma_t;
  return w;
}

TransformedParams TransformedParams::unpack(const Eigen::VectorXd& w) {
  if (w.size() < 2) throw std::invalid_argument("TransformedParams: packed vector too short");
  TransformedParams out;
  out.beta_t = w.head(w.size() - 1);
  out.sigma_t = w(w.size() - 1);
  return out;
}

void TransformedParams::validate() const {
  if (!(sigma_t > 0.0) || !std::isfinite(sigma_t))
    throw std::invalid_argument("TransformedParams: sigma_t must be positive and finite");
  if (beta_t.size() < 1 || !beta_t.allFinite())
    throw std::invalid_argument("TransformedParams: beta_t must be nonempty and finite");
}

TransformedParams transform(const ClientParams& params) {
  params.validate();
  return {params.beta / params.sigma, 1.0 / params.sigma};
}

ClientParams untransform(const TransformedParams& w) {
  w.validate();
  return {w.beta_t / w.sigma_t, 1.0 / w.sigma_t};
}

}  // namespace pfl
