#include "pfl/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pfl/sev.hpp"

namespace pfl {

namespace {

struct Eval {
  double f;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
};

Eval evaluate(const ClientDataset& data, const Eigen::VectorXd& anchor, double mu,
              const Eigen::VectorXd& w, bool with_hessian) {
  const auto t = TransformedParams::unpack(w);
  auto d = nll_derivatives(t, data, with_hessian);
  Eval e;
  const Eigen::VectorXd diff = w - anchor;
  e.f = d.value + 0.5 * mu * diff.squaredNorm();
  e.g = d.grad + mu * diff;
  if (with_hessian) {
    e.h = std::move(d.hess);
    e.h.diagonal().array() += mu;
  }
  return e;
}

double objective_only(const ClientDataset& data, const Eigen::VectorXd& anchor, double mu,
                      const Eigen::VectorXd& w) {
  const double diff2 = (w - anchor).squaredNorm();
  return nll(TransformedParams::unpack(w), data) + 0.5 * mu * diff2;
}

}  // namespace

NewtonResult minimize_penalized_nll(const ClientDataset& data, const TransformedParams& anchor,
                                    double mu, const TransformedParams& start,
                                    const NewtonOptions& opts) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("penalized nll: mu must be finite and >= 0");
  start.validate();
  const Eigen::VectorXd a = anchor.packed();
  Eigen::VectorXd w = start.packed();
  const Eigen::Index p = w.size() - 1;  // sigma_t slot
  if (a.size() != w.size()) throw std::invalid_argument("penalized nll: dimension mismatch");

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const double floor_tol =
      16.0 * kEps * mu * std::max({1.0, a.lpNorm<Eigen::Infinity>(), w.lpNorm<Eigen::Infinity>()});
  const double tol = std::max(opts.tol, floor_tol);

  NewtonResult res;
  res.tolerance_used = tol;
  Eval cur = evaluate(data, a, mu, w, true);
  for (int it = 0;; ++it) {
    res.residual = cur.g.lpNorm<Eigen::Infinity>();
    res.iterations = it;
    if (res.residual <= tol) break;
    if (mu == 0.0 && w(p) > opts.max_sigma_t) {
      res.degenerate = true;
      break;
    }
    if (it >= opts.max_iter) {
      std::ostringstream msg;
      msg << "Newton solver for client '" << data.client_id << "' hit " << opts.max_iter
          << " iterations with gradient residual " << res.residual << " (tolerance " << tol
          << ")";
      throw ConvergenceError(msg.str(), res.residual, it);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.h);
    Eigen::VectorXd dir = ldlt.solve(-cur.g);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || cur.g.dot(dir) >= 0.0) {
      // Singular curvature (mu = 0 with rank-deficient features): fall back to a ridge.
      Eigen::MatrixXd hr = cur.h;
      hr.diagonal().array() += 1e-8 * std::max(1.0, cur.h.diagonal().maxCoeff());
      dir = hr.ldlt().solve(-cur.g);
      if (!dir.allFinite() || cur.g.dot(dir) >= 0.0) dir = -cur.g;
    }

    double step = 1.0;
    if (dir(p) < 0.0) step = std::min(step, 0.99 * w(p) / -dir(p));
    const double slope = cur.g.dot(dir);
    Eigen::VectorXd trial;
    Eval next;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      // Once the required decrease is below the resolution of f, Armijo says nothing.
      if (cur.f + opts.armijo_c * step * slope == cur.f) break;
      trial = w + step * dir;
      double f_trial;
      if (bt == 0) {
        // The first trial is usually accepted; evaluate everything at once.
        next = evaluate(data, a, mu, trial, true);
        f_trial = next.f;
      } else {
        f_trial = objective_only(data, a, mu, trial);
      }
      if (std::isfinite(f_trial) && f_trial <= cur.f + opts.armijo_c * step * slope) {
        accepted = true;
        if (bt > 0) next = evaluate(data, a, mu, trial, true);
        break;
      }
    }
    if (!accepted) {
      // Rounding can hide a true decrease near the optimum; take the full step if it
      // shrinks the gradient.
      trial = w + std::min(1.0, dir(p) < 0.0 ? 0.99 * w(p) / -dir(p) : 1.0) * dir;
      Eval probe = evaluate(data, a, mu, trial, true);
      if (!(probe.g.lpNorm<Eigen::Infinity>() < res.residual)) {
        // An unpenalized fit whose scale has collapsed is an exact fit, not a failure.
        const double y_scale = std::max(1.0, data.responses.lpNorm<Eigen::Infinity>());
        if (mu == 0.0 && dir(p) > 0.0 && 1.0 / w(p) < 1e-6 * y_scale) {
          res.degenerate = true;
          break;
        }
        std::ostringstream msg;
        msg << "Newton line search stalled for client '" << data.client_id
            << "' with gradient residual " << res.residual;
        throw ConvergenceError(msg.str(), res.residual, it);
      }
      w = trial;
      cur = std::move(probe);
      continue;
    }
    w = trial;
    cur = std::move(next);
  }
  res.w = TransformedParams::unpack(w);
  res.objective = cur.f;
  return res;
}

}  // namespace pfl
