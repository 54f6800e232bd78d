#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lmtest/critical.hpp"
#include "lmtest/ellipse.hpp"

namespace lmtest {

/// Linear projection test: reject when ||Pi(y - theta*)||^2 >= threshold,
/// Pi the projection onto the coordinates in coords.
struct LptTest {
  std::size_t k = 0;
  std::vector<std::size_t> coords;  // 1-based, sorted
  Vector theta_star;
  double sigma = 0.0;
  double rho = 0.0;
  double threshold = 0.0;  // sigma^2 (k + sqrt(4k / rho))

  /// Threshold on the unsquared norm.
  double beta() const;
};

/// sigma^2 (k + sqrt(4k / rho)).
double lpt_threshold(double sigma, double rho, std::size_t k);

/// Test projecting onto the first k coordinates.
LptTest make_test(std::span<const double> theta_star, double sigma, double rho, std::size_t k);

struct BuiltTest {
  LptTest test;
  CriticalSolution upper;  // the solved eps_u and k_u
};

/// Solves eps_u, takes k = k_u(eps_u) and the first k coordinates.
BuiltTest build_test(const TestProblem& problem);

double test_statistic(const LptTest& test, std::span<const double> y);

/// 1 iff test_statistic(test, y) >= threshold.
int decide(const LptTest& test, std::span<const double> y);

/// eps^2 - f_k^u(eps)^2, the floor on the noncentrality ||Pi_k(theta - theta*)||^2
/// over alternatives at distance eps. Throws NumericError unless
/// f_k^u(eps) <= eps / sqrt(2).
double noncentrality_floor(const EllipseSpec& e, std::span<const double> theta_star, double eps,
                           std::size_t k);

struct AnalyticBound {
  double value = 1.0;  // rho when both Chebyshev conditions hold, else 1
  bool type1_ok = false;
  bool type2_ok = false;
  std::string diagnostic;
};

AnalyticBound analytic_error_bound(const LptTest& test, double eps, double c0_floor);

}  // namespace lmtest
