#include "pfl/fed_config.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pfl {

void FedConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(inner_tol > 0.0)) throw ConfigError("inner_tol must be > 0");
  if (inner_max_iter < 1) throw ConfigError("inner_max_iter must be >= 1");
  if (!(early_stop_tol >= 0.0)) throw ConfigError("early_stop_tol must be >= 0");
}

double FedConfig::max_feasible_gamma(std::size_t m) const {
  if (m <= 1) return std::numeric_limits<double>::infinity();
  return 1.0 / (static_cast<double>(m - 1) * kernel.deriv(0.0));
}

bool FedConfig::is_feasible(std::size_t m) const {
  if (m <= 1) return true;
  return gamma() * static_cast<double>(m - 1) * kernel.deriv(0.0) <= 1.0 + 1e-12;
}

void FedConfig::check_feasible(std::size_t m) const {
  if (is_feasible(m)) return;
  std::ostringstream msg;
  msg << "infeasible aggregation step: gamma*(m-1)*A'(0) = "
      << gamma() * static_cast<double>(m - 1) * kernel.deriv(0.0)
      << " > 1 for m=" << m << "; maximal admissible gamma = " << max_feasible_gamma(m)
      << " (alpha <= " << max_feasible_gamma(m) / 2.0 << ")";
  throw ConfigError(msg.str());
}

}  // namespace pfl
