#pragma once

#include <stdexcept>
#include <string>

#include "pfl/dataset.hpp"
#include "pfl/params.hpp"

namespace pfl {

/// Raised when an iterative solver stops without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

struct NewtonOptions {
  double tol = 1e-8;         // infinity-norm of the objective gradient
  int max_iter = 100;
  double armijo_c = 1e-4;
  double max_sigma_t = 1e10; // beyond this the unpenalized fit is declared degenerate
};

struct NewtonResult {
  TransformedParams w;
  double objective = 0.0;
  double residual = 0.0;  // gradient infinity-norm at w
  double tolerance_used = 0.0;
  int iterations = 0;
  bool degenerate = false;  // sigma_t ran off toward infinity (exact fit)
};

/// Minimizes nll(w; data) + (mu/2) ||w - anchor||^2 by damped Newton with Armijo
/// backtracking. Steps are truncated to keep sigma_t > 0. mu = 0 gives the MLE.
///
/// The stopping test is ||grad||_inf <= max(tol, floor) where floor is the rounding
/// resolution of the penalty term mu * |w|; below it the residual is not representable.
/// Throws ConvergenceError if max_iter is exhausted first.
NewtonResult minimize_penalized_nll(const ClientDataset& data, const TransformedParams& anchor,
                                    double mu, const TransformedParams& start,
                                    const NewtonOptions& opts = {});

}  // namespace pfl
