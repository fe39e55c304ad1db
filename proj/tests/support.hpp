#pragma once

// Shared helpers for the test binaries: seeded random instances, finite differences and
// a test-only centralized solver for the joint federated objective.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfl/dataset.hpp"
#include "pfl/params.hpp"
#include "pfl/rng.hpp"
#include "pfl/sev.hpp"
#include "pfl/similarity.hpp"

namespace testing {

using pfl::ClientDataset;
using pfl::Rng;
using pfl::TransformedParams;

inline double unif(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double sev_draw(Rng& rng) { return std::log(-std::log(pfl::uniform_open(rng))); }

/// n rows with K random features in [-1, 1] and SEV responses from (beta, sigma).
inline ClientDataset sev_dataset(Rng& rng, int n, const Eigen::VectorXd& beta, double sigma,
                                 const std::string& id = "c") {
  ClientDataset d;
  d.client_id = id;
  const auto p = beta.size();
  d.features.resize(n, p);
  d.responses.resize(n);
  for (int j = 0; j < n; ++j) {
    d.features(j, 0) = 1.0;
    for (Eigen::Index k = 1; k < p; ++k) d.features(j, k) = unif(rng, -1.0, 1.0);
    d.responses(j) = d.features.row(j).dot(beta) + sigma * sev_draw(rng);
  }
  return d;
}

inline ClientDataset random_dataset(Rng& rng, int n, int K, const std::string& id = "c") {
  Eigen::VectorXd beta(K + 1);
  for (int k = 0; k <= K; ++k) beta(k) = unif(rng, -1.0, 1.0);
  return sev_dataset(rng, n, beta, unif(rng, 0.3, 2.0), id);
}

inline TransformedParams random_params(Rng& rng, int K) {
  TransformedParams w;
  w.beta_t.resize(K + 1);
  for (int k = 0; k <= K; ++k) w.beta_t(k) = unif(rng, -1.0, 1.0);
  w.sigma_t = unif(rng, 0.5, 2.0);
  return w;
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd a = x, b = x;
    a(k) += h;
    b(k) -= h;
    g(k) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd a = x, b = x;
    a(k) += h;
    b(k) -= h;
    j.col(k) = (f(a) - f(b)) / (2 * h);
  }
  return j;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Direct nll from the SEV density at the untransformed parameters; shares no code with
/// the library's transformed-parameter formula.
inline double density_nll(const pfl::ClientParams& p, const ClientDataset& d) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < d.rows(); ++j) {
    const double eps = (d.responses(j) - d.features.row(j).dot(p.beta)) / p.sigma;
    total += std::log(p.sigma) - (eps - std::exp(eps));
  }
  return total;
}

/// Joint objective sum_i l_i(w_i) + lambda * sum_{i<h} A(||w_i - w_h||^2) over the stacked
/// transformed parameters, with its analytic gradient.
struct JointObjective {
  const std::vector<ClientDataset>* data;
  pfl::SimilarityKernel kernel;
  double lambda;

  Eigen::Index dim() const { return (*data)[0].features.cols() + 1; }

  double value(const Eigen::VectorXd& x) const {
    const Eigen::Index p = dim();
    const std::size_t m = data->size();
    double f = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const Eigen::VectorXd wi = x.segment(static_cast<Eigen::Index>(i) * p, p);
      if (!(wi(p - 1) > 0.0)) return std::numeric_limits<double>::infinity();
      f += pfl::nll(TransformedParams::unpack(wi), (*data)[i]);
      for (std::size_t h = i + 1; h < m; ++h) {
        const Eigen::VectorXd wh = x.segment(static_cast<Eigen::Index>(h) * p, p);
        f += lambda * kernel.value((wi - wh).squaredNorm());
      }
    }
    return f;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
    const Eigen::Index p = dim();
    const std::size_t m = data->size();
    Eigen::VectorXd g(x.size());
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i) * p;
      const Eigen::VectorXd wi = x.segment(ii, p);
      Eigen::VectorXd gi = pfl::nll_grad(TransformedParams::unpack(wi), (*data)[i]);
      for (std::size_t h = 0; h < m; ++h) {
        if (h == i) continue;
        const Eigen::VectorXd diff = wi - x.segment(static_cast<Eigen::Index>(h) * p, p);
        gi += lambda * kernel.deriv(diff.squaredNorm()) * 2.0 * diff;
      }
      g.segment(ii, p) = gi;
    }
    return g;
  }
};

/// Damped Newton with a finite-difference Hessian of the analytic gradient, shifted to be
/// positive definite when needed. Returns the stationary point reached from x0.
inline Eigen::VectorXd centralized_minimize(const JointObjective& obj, Eigen::VectorXd x,
                                            double tol = 1e-10, int max_iter = 500) {
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = obj.grad(x);
    if (g.lpNorm<Eigen::Infinity>() < tol) break;
    Eigen::MatrixXd h = fd_jacobian([&](const Eigen::VectorXd& v) { return obj.grad(v); }, x, 1e-6);
    h = 0.5 * (h + h.transpose());
    double shift = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (;;) {
      llt.compute(h + shift * Eigen::MatrixXd::Identity(h.rows(), h.cols()));
      if (llt.info() == Eigen::Success) break;
      shift = shift == 0.0 ? 1e-6 : shift * 10.0;
    }
    const Eigen::VectorXd dir = llt.solve(-g);
    const double f0 = obj.value(x);
    double step = 1.0;
    Eigen::VectorXd trial = x;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      trial = x + step * dir;
      const double ft = obj.value(trial);
      if (std::isfinite(ft) && ft <= f0 + 1e-4 * step * g.dot(dir)) break;
    }
    if ((trial - x).lpNorm<Eigen::Infinity>() < 1e-15) break;
    x = trial;
  }
  return x;
}

}  // namespace testing
