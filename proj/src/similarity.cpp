#include "pfl/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pfl {

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "neg_exp" || name == "negexp") return KernelKind::NegExp;
  if (name == "mcp") return KernelKind::MCP;
  if (name == "scad_std" || name == "scad") return KernelKind::SCADStd;
  throw std::invalid_argument("unknown kernel '" + name + "' (expected neg_exp, mcp, scad_std)");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::NegExp: return "neg_exp";
    case KernelKind::MCP: return "mcp";
    case KernelKind::SCADStd: return "scad_std";
  }
  return "unknown";
}

SimilarityKernel::SimilarityKernel(KernelKind kind, double theta, double lambda_p)
    : kind_(kind), theta_(theta), lambda_p_(lambda_p) {
  check_parameters();
  cert_ = validate_kernel(*this);
}

SimilarityKernel SimilarityKernel::neg_exp(double theta) {
  return SimilarityKernel(KernelKind::NegExp, theta, 0.0);
}
SimilarityKernel SimilarityKernel::mcp(double lambda_p, double theta) {
  return SimilarityKernel(KernelKind::MCP, theta, lambda_p);
}
SimilarityKernel SimilarityKernel::scad_std(double lambda_p, double theta) {
  return SimilarityKernel(KernelKind::SCADStd, theta, lambda_p);
}
SimilarityKernel SimilarityKernel::make(KernelKind kind, double theta, double lambda_p) {
  return SimilarityKernel(kind, theta, lambda_p);
}

void SimilarityKernel::check_parameters() const {
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("similarity kernel " + to_string(kind_) + ": " + what);
  };
  if (!std::isfinite(theta_)) fail("theta must be finite");
  switch (kind_) {
    case KernelKind::NegExp:
      if (!(theta_ > 0.0)) fail("theta must be > 0");
      break;
    case KernelKind::MCP:
      if (!(lambda_p_ > 0.0)) fail("lambda_p must be > 0");
      if (!(theta_ > 1.0)) fail("theta must be > 1");
      break;
    case KernelKind::SCADStd:
      if (!(lambda_p_ > 0.0)) fail("lambda_p must be > 0");
      if (!(theta_ > 2.0)) fail("theta must be > 2");
      break;
  }
}

double SimilarityKernel::value(double d2) const {
  if (!(d2 >= 0.0)) throw std::domain_error("similarity: squared distance must be >= 0");
  switch (kind_) {
    case KernelKind::NegExp:
      return -std::expm1(-d2 / theta_);
    case KernelKind::MCP: {
      const double knot = theta_ * lambda_p_;
      if (d2 <= knot) return lambda_p_ * d2 - d2 * d2 / (2.0 * theta_);
      return theta_ * lambda_p_ * lambda_p_ / 2.0;
    }
    case KernelKind::SCADStd: {
      const double lam = lambda_p_;
      if (d2 <= lam) return lam * d2;
      if (d2 <= theta_ * lam)
        return (2.0 * theta_ * lam * d2 - d2 * d2 - lam * lam) / (2.0 * (theta_ - 1.0));
      return lam * lam * (theta_ + 1.0) / 2.0;
    }
  }
  return 0.0;
}

double SimilarityKernel::deriv(double d2) const {
  if (!(d2 >= 0.0)) throw std::domain_error("similarity: squared distance must be >= 0");
  switch (kind_) {
    case KernelKind::NegExp:
      return std::exp(-d2 / theta_) / theta_;
    case KernelKind::MCP:
      return d2 <= theta_ * lambda_p_ ? lambda_p_ - d2 / theta_ : 0.0;
    case KernelKind::SCADStd: {
      const double lam = lambda_p_;
      if (d2 <= lam) return lam;
      if (d2 <= theta_ * lam) return (theta_ * lam - d2) / (theta_ - 1.0);
      return 0.0;  // flat branch; the continuity constant never reaches the gradient
    }
  }
  return 0.0;
}

double a_value(const SimilarityKernel& kernel, double d2) { return kernel.value(d2); }
double a_deriv(const SimilarityKernel& kernel, double d2) { return kernel.deriv(d2); }

KernelCertificate validate_kernel(const SimilarityKernel& kernel) {
  // Grid: 0 plus log-spaced points reaching well past every kink and scale.
  double scale = kernel.theta();
  if (kernel.kind() != KernelKind::NegExp) scale = kernel.theta() * kernel.lambda_p();
  const double hi = 50.0 * std::max(scale, 1.0);
  const double lo = 1e-6 * std::min(scale, 1.0);
  constexpr int kPoints = 2001;

  std::vector<double> grid;
  grid.reserve(kPoints + 1);
  grid.push_back(0.0);
  for (int k = 0; k < kPoints; ++k)
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (kPoints - 1)));

  auto fail = [&](const std::string& property, double at) {
    std::ostringstream msg;
    msg << "similarity kernel " << to_string(kernel.kind()) << " violates " << property
        << " at d2=" << at;
    throw std::invalid_argument(msg.str());
  };

  KernelCertificate cert;
  cert.grid_points = static_cast<int>(grid.size());
  if (kernel.value(0.0) != 0.0) fail("A(0) = 0", 0.0);
  cert.derivative_at_zero = kernel.deriv(0.0);
  if (!std::isfinite(cert.derivative_at_zero) || cert.derivative_at_zero < 0.0)
    fail("finite nonnegative A'(0+)", 0.0);

  const double tol = 1e-12 * std::max(1.0, std::abs(kernel.value(hi)));
  double worst_mono = 0.0, worst_deriv = 0.0, worst_concave = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double a = grid[k - 1], b = grid[k];
    const double va = kernel.value(a), vb = kernel.value(b);
    const double da = kernel.deriv(a), db = kernel.deriv(b);
    if (!std::isfinite(vb) || !std::isfinite(db)) fail("finite values", b);
    if (va - vb > cert.max_monotonicity_violation) {
      cert.max_monotonicity_violation = va - vb;
      worst_mono = b;
    }
    if (db - da > cert.max_derivative_increase) {
      cert.max_derivative_increase = db - da;
      worst_deriv = b;
    }
    if (db < 0.0) fail("A' >= 0", b);
    const double gap = 0.5 * (va + vb) - kernel.value(0.5 * (a + b));
    if (gap > cert.max_concavity_violation) {
      cert.max_concavity_violation = gap;
      worst_concave = 0.5 * (a + b);
    }
  }
  if (cert.max_monotonicity_violation > tol) fail("A nondecreasing", worst_mono);
  if (cert.max_derivative_increase > 1e-12 * std::max(1.0, cert.derivative_at_zero))
    fail("A' nonincreasing", worst_deriv);
  if (cert.max_concavity_violation > tol) fail("A concave", worst_concave);
  return cert;
}

}  // namespace pfl
