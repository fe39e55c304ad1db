#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "pfl/similarity.hpp"

using namespace pfl;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(lo * std::pow(hi / lo, k / double(n - 1)));
  return g;
}

std::vector<SimilarityKernel> sample_kernels() {
  return {SimilarityKernel::neg_exp(1.0), SimilarityKernel::neg_exp(0.3),
          SimilarityKernel::neg_exp(10.0), SimilarityKernel::mcp(1.0, 2.0),
          SimilarityKernel::mcp(0.5, 5.0), SimilarityKernel::scad_std(1.0, 3.7),
          SimilarityKernel::scad_std(0.2, 2.5)};
}

}  // namespace

TEST_CASE("negative exponential values") {
  const auto k = SimilarityKernel::neg_exp(1.0);
  CHECK(a_value(k, 0.0) == 0.0);
  CHECK(a_value(k, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(a_deriv(SimilarityKernel::neg_exp(2.0), 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(a_value(k, -1e-3), std::domain_error);
  CHECK_THROWS_AS(a_deriv(k, -1.0), std::domain_error);
}

TEST_CASE("mcp values and kink") {
  const auto k = SimilarityKernel::mcp(1.0, 2.0);
  CHECK(a_value(k, 5.0) == doctest::Approx(1.0));
  CHECK(a_deriv(k, 3.0) == 0.0);
  const double kink = 2.0;
  CHECK(std::abs(a_value(k, std::nextafter(kink, 0.0)) - a_value(k, std::nextafter(kink, 10.0))) <
        1e-12);
  CHECK(a_deriv(k, kink - 1e-9) < 1e-8);
  CHECK(a_deriv(k, kink + 1e-9) == 0.0);
  CHECK(k.certificate().max_concavity_violation < 1e-12);
}

TEST_CASE("scad_std pieces join continuously") {
  const double lam = 1.0, theta = 3.7;
  const auto k = SimilarityKernel::scad_std(lam, theta);
  CHECK(a_value(k, 0.5) == doctest::Approx(0.5));
  for (double knot : {lam, theta * lam}) {
    CHECK(std::abs(a_value(k, knot * (1 - 1e-12)) - a_value(k, knot * (1 + 1e-12))) < 1e-10);
    CHECK(std::abs(a_deriv(k, knot * (1 - 1e-9)) - a_deriv(k, knot * (1 + 1e-9))) < 1e-6);
  }
  CHECK(a_value(k, 100.0) == doctest::Approx(lam * lam * (theta + 1) / 2));
}

TEST_CASE("construction rejects invalid parameters") {
  CHECK_THROWS_AS(SimilarityKernel::neg_exp(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(SimilarityKernel::neg_exp(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SimilarityKernel::mcp(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SimilarityKernel::mcp(0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(SimilarityKernel::scad_std(1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_kind("gaussian"), std::invalid_argument);
  CHECK(parse_kernel_kind("mcp") == KernelKind::MCP);
  CHECK(to_string(parse_kernel_kind("scad_std")) == "scad_std");
}

TEST_CASE("derivative matches finite differences on a log grid") {
  for (const auto& k : sample_kernels()) {
    for (double d2 : log_grid(1e-3, 50.0, 200)) {
      const double h = 1e-6 * std::max(1.0, d2);
      if (d2 - h < 0) continue;
      const double fd = (a_value(k, d2 + h) - a_value(k, d2 - h)) / (2 * h);
      const double an = a_deriv(k, d2);
      // Skip the kinks of the piecewise kernels, where A'' jumps.
      const bool near_kink =
          k.kind() != KernelKind::NegExp &&
          (std::abs(d2 - k.lambda_p()) < 2 * h || std::abs(d2 - k.theta() * k.lambda_p()) < 2 * h);
      if (near_kink) continue;
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("boundedness, sign and monotone derivative") {
  for (const auto& k : sample_kernels()) {
    double prev_d = a_deriv(k, 0.0);
    CHECK(std::isfinite(prev_d));
    CHECK(a_value(k, 0.0) == 0.0);
    for (double d2 : log_grid(1e-4, 1e4, 400)) {
      const double v = a_value(k, d2);
      const double d = a_deriv(k, d2);
      CHECK(d >= 0.0);
      CHECK(d <= prev_d + 1e-15);
      prev_d = d;
      if (k.kind() == KernelKind::NegExp) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0 + 1e-15);
      }
      if (k.kind() == KernelKind::MCP) {
        CHECK(v >= 0.0);
        CHECK(v <= k.theta() * k.lambda_p() * k.lambda_p() / 2 + 1e-15);
      }
    }
    const auto cert = validate_kernel(k);
    CHECK(cert.grid_points > 1000);
    CHECK(cert.max_monotonicity_violation <= 0.0);
    CHECK(cert.derivative_at_zero == a_deriv(k, 0.0));
  }
}
