#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "pfl/dataset.hpp"
#include "pfl/params.hpp"

namespace pfl {

namespace sev {

double pdf(double eps);
double log_pdf(double eps);
double cdf(double eps);
double quantile(double p);

/// Number of times exp() arguments were clamped at the overflow guard since start.
std::size_t overflow_clamp_count();

}  // namespace sev

/// Negative log-likelihood of the SEV regression in transformed parameters:
///   l(w) = -sum_j [ log sigma_t + z_j - exp(z_j) ],  z_j = y_j sigma_t - x_j' beta_t.
double nll(const TransformedParams& w, const ClientDataset& data);

/// Gradient in packed order (beta_t_0..beta_t_K, sigma_t).
Eigen::VectorXd nll_grad(const TransformedParams& w, const ClientDataset& data);

/// Exact Hessian in packed order. Positive semidefinite everywhere on sigma_t > 0.
Eigen::MatrixXd nll_hessian(const TransformedParams& w, const ClientDataset& data);

/// Value, gradient and Hessian in one pass over the data.
struct NllDerivatives {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};
NllDerivatives nll_derivatives(const TransformedParams& w, const ClientDataset& data,
                               bool with_hessian = true);

/// Quantile of the predicted failure-time distribution on the response scale.
double predict_quantile(const ClientParams& params, const Eigen::VectorXd& x, double p);

/// Median prediction, the point forecast used throughout.
inline double predict_median(const ClientParams& params, const Eigen::VectorXd& x) {
  return predict_quantile(params, x, 0.5);
}

}  // namespace pfl
