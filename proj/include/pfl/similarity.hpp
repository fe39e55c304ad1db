#pragma once

#include <string>

namespace pfl {

enum class KernelKind { NegExp, MCP, SCADStd };

KernelKind parse_kernel_kind(const std::string& name);  // "neg_exp", "mcp", "scad_std"
std::string to_string(KernelKind kind);

/// Result of the numerical property check run at kernel construction.
struct KernelCertificate {
  int grid_points = 0;
  double max_monotonicity_violation = 0.0;  // A decreasing anywhere
  double max_concavity_violation = 0.0;     // midpoint below chord
  double max_derivative_increase = 0.0;     // A' increasing anywhere
  double derivative_at_zero = 0.0;
};

/// Similarity function A(d2) of the squared parameter distance, with derivative A'.
/// Instances only exist in validated form; use the factory functions.
class SimilarityKernel {
 public:
  static SimilarityKernel neg_exp(double theta);
  static SimilarityKernel mcp(double lambda_p, double theta);
  /// Textbook SCAD penalty evaluated at d2.
  static SimilarityKernel scad_std(double lambda_p, double theta);
  static SimilarityKernel make(KernelKind kind, double theta, double lambda_p);

  KernelKind kind() const { return kind_; }
  double theta() const { return theta_; }
  double lambda_p() const { return lambda_p_; }
  const KernelCertificate& certificate() const { return cert_; }

  double value(double d2) const;
  double deriv(double d2) const;

 private:
  SimilarityKernel(KernelKind kind, double theta, double lambda_p);
  void check_parameters() const;

  KernelKind kind_;
  double theta_;
  double lambda_p_;
  KernelCertificate cert_;
};

double a_value(const SimilarityKernel& kernel, double d2);
double a_deriv(const SimilarityKernel& kernel, double d2);

/// Grid check of: A(0)=0, A nondecreasing and concave, A' nonincreasing and finite at 0+.
/// Throws std::invalid_argument naming the failed property and grid point.
KernelCertificate validate_kernel(const SimilarityKernel& kernel);

}  // namespace pfl
