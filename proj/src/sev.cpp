#include "pfl/sev.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace pfl {

namespace {

constexpr double kExpGuard = 700.0;
std::atomic<std::size_t> g_clamp_count{0};


}  // namespace

namespace sev {

double pdf(double eps) { return std::exp(eps - std::exp(eps)); }

double log_pdf(double eps) { return eps - std::exp(eps); }

double cdf(double eps) { return -std::expm1(-std::exp(eps)); }

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("sev::quantile: p must lie in (0,1)");
  return std::log(-std::log1p(-p));
}

std::size_t overflow_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }

}  // namespace sev

namespace {

void check_shapes(const TransformedParams& w, const ClientDataset& data) {
  if (!(w.sigma_t > 0.0)) throw std::invalid_argument("nll: sigma_t must be positive");
  if (w.beta_t.size() != data.features.cols())
    throw std::invalid_argument("nll: parameter dimension does not match features");
}

// z_j = y_j sigma_t - x_j' beta_t, with z clamped before exponentiation.
Eigen::ArrayXd residuals(const TransformedParams& w, const ClientDataset& data,
                         Eigen::ArrayXd& ez) {
  Eigen::ArrayXd z = (data.responses * w.sigma_t - data.features * w.beta_t).array();
  const auto clamped = (z > kExpGuard).count();
  if (clamped > 0) g_clamp_count.fetch_add(static_cast<std::size_t>(clamped));
  ez = z.min(kExpGuard).exp();
  return z;
}

}  // namespace

NllDerivatives nll_derivatives(const TransformedParams& w, const ClientDataset& data,
                               bool with_hessian) {
  check_shapes(w, data);
  const Eigen::Index p = w.beta_t.size();
  const auto n = static_cast<double>(data.rows());
  Eigen::ArrayXd ez;
  const Eigen::ArrayXd z = residuals(w, data, ez);

  NllDerivatives out;
  out.value = -(n * std::log(w.sigma_t) + (z - ez).sum());
  const Eigen::VectorXd r = (1.0 - ez).matrix();
  out.grad.resize(p + 1);
  out.grad.head(p).noalias() = data.features.transpose() * r;
  out.grad(p) = -data.responses.dot(r) - n / w.sigma_t;

  if (with_hessian) {
    // d2/dbeta2 = sum ez x x', d2/dbeta dsigma = -sum ez y x, d2/dsigma2 = n/st^2 + sum ez y^2
    out.hess.resize(p + 1, p + 1);
    const Eigen::MatrixXd wx = data.features.array().colwise() * ez;
    const Eigen::MatrixXd bb = data.features.transpose() * wx;
    out.hess.topLeftCorner(p, p) = 0.5 * (bb + bb.transpose());
    out.hess.col(p).head(p).noalias() = -(wx.transpose() * data.responses);
    out.hess.row(p).head(p) = out.hess.col(p).head(p).transpose();
    out.hess(p, p) = n / (w.sigma_t * w.sigma_t) +
                     (ez * data.responses.array().square()).sum();
  }
  return out;
}

double nll(const TransformedParams& w, const ClientDataset& data) {
  check_shapes(w, data);
  Eigen::ArrayXd ez;
  const Eigen::ArrayXd z = residuals(w, data, ez);
  return -(static_cast<double>(data.rows()) * std::log(w.sigma_t) + (z - ez).sum());
}

Eigen::VectorXd nll_grad(const TransformedParams& w, const ClientDataset& data) {
  return nll_derivatives(w, data, false).grad;
}

Eigen::MatrixXd nll_hessian(const TransformedParams& w, const ClientDataset& data) {
  return nll_derivatives(w, data, true).hess;
}

double predict_quantile(const ClientParams& params, const Eigen::VectorXd& x, double p) {
  if (x.size() != params.beta.size())
    throw std::invalid_argument("predict_quantile: feature length does not match beta");
  return x.dot(params.beta) + params.sigma * sev::quantile(p);
}

}  // namespace pfl
