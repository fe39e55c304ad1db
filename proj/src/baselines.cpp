#include "pfl/baselines.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pfl/client.hpp"
#include "pfl/newton.hpp"
#include "pfl/rng.hpp"
#include "pfl/sev.hpp"

namespace pfl {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

// Least-squares start: OLS location, moment-matched SEV scale.
TransformedParams ols_start(const ClientDataset& data) {
  const Eigen::MatrixXd& x = data.features;
  Eigen::VectorXd beta = x.colPivHouseholderQr().solve(data.responses);
  const Eigen::VectorXd resid = data.responses - x * beta;
  const double dof = std::max<double>(1.0, static_cast<double>(x.rows() - x.cols()));
  double sd = std::sqrt(resid.squaredNorm() / dof);
  const double scale = std::max(1.0, data.responses.cwiseAbs().maxCoeff());
  sd = std::max(sd, 1e-6 * scale);
  const double sigma = sd * std::sqrt(6.0) / M_PI;
  beta(0) += kEulerGamma * sigma;
  return transform(ClientParams{beta, sigma});
}

}  // namespace

LocalFit local_mle(const ClientDataset& data) {
  data.validate();
  const Eigen::Index k2 = data.features.cols() + 1;
  if (data.rows() < k2) {
    std::ostringstream msg;
    msg << "local_mle: client '" << data.client_id << "' has " << data.rows()
        << " rows, needs at least " << k2 << " (under-determined)";
    throw std::invalid_argument(msg.str());
  }
  const TransformedParams start = ols_start(data);
  NewtonOptions opts;
  opts.tol = 1e-9;
  opts.max_iter = 200;
  const NewtonResult r = minimize_penalized_nll(data, start, 0.0, start, opts);

  LocalFit fit;
  fit.transformed = r.w;
  fit.params = untransform(r.w);
  fit.grad_norm = r.residual;
  fit.iterations = r.iterations;
  fit.degenerate = r.degenerate;
  return fit;
}

void CflConfig::validate() const {
  if (rounds < 1) throw ConfigError("cfl: rounds must be >= 1");
  if (local_steps < 1) throw ConfigError("cfl: local_steps must be >= 1");
  if (!(local_lr > 0.0)) throw ConfigError("cfl: local_lr must be > 0");
  if (!(early_stop_tol >= 0.0)) throw ConfigError("cfl: early_stop_tol must be >= 0");
}

namespace {

// E gradient steps on the mean nll with Armijo backtracking from lr0.
Eigen::VectorXd local_gd(const ClientDataset& data, Eigen::VectorXd w, int steps, double lr0) {
  const double inv_n = 1.0 / static_cast<double>(data.rows());
  const Eigen::Index p = w.size() - 1;
  for (int s = 0; s < steps; ++s) {
    const auto t = TransformedParams::unpack(w);
    const auto d = nll_derivatives(t, data, false);
    const Eigen::VectorXd g = d.grad * inv_n;
    const double f = d.value * inv_n;
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) break;
    double lr = lr0;
    if (g(p) > 0.0) lr = std::min(lr, 0.99 * w(p) / g(p));
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, lr *= 0.5) {
      Eigen::VectorXd trial = w - lr * g;
      const double ft = nll(TransformedParams::unpack(trial), data) * inv_n;
      if (std::isfinite(ft) && ft <= f - 1e-4 * lr * g2) {
        w = std::move(trial);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return w;
}

}  // namespace

CflResult cfl_train(const std::vector<ClientDataset>& datasets, const CflConfig& cfg) {
  if (datasets.empty()) throw std::invalid_argument("cfl_train: no clients");
  cfg.validate();
  const Eigen::Index cols = datasets.front().features.cols();
  double total = 0.0;
  for (const auto& d : datasets) {
    d.validate();
    if (d.features.cols() != cols)
      throw std::invalid_argument("cfl_train: clients disagree on feature count");
    total += static_cast<double>(d.rows());
  }

  Eigen::VectorXd global = initial_params(cfg.seed, "cfl/global", cols + 1).packed();
  CflResult res;
  for (int r = 1; r <= cfg.rounds; ++r) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(global.size());
    for (const auto& d : datasets) {
      const Eigen::VectorXd local = local_gd(d, global, cfg.local_steps, cfg.local_lr);
      next += (static_cast<double>(d.rows()) / total) * local;
    }
    if (!next.allFinite() || !(next(next.size() - 1) > 0.0)) {
      std::ostringstream msg;
      msg << "cfl_train: non-finite global model at round " << r;
      throw std::runtime_error(msg.str());
    }
    const double move = (next - global).lpNorm<Eigen::Infinity>();
    global = std::move(next);
    res.rounds = r;
    if (move < cfg.early_stop_tol) {
      res.early_stopped = true;
      break;
    }
  }
  res.transformed = TransformedParams::unpack(global);
  res.params = untransform(res.transformed);
  return res;
}

double mape(double pred, double truth) {
  if (!(truth > 0.0)) throw std::domain_error("mape: truth must be positive");
  return std::abs(pred - truth) / truth * 100.0;
}

double mean_mape(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw std::invalid_argument("mean_mape: size mismatch or empty");
  double acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) acc += mape(pred[k], truth[k]);
  return acc / static_cast<double>(pred.size());
}

}  // namespace pfl
