#include "lmtest/lpt.hpp"

#include <cmath>
#include <numeric>

#include "lmtest/errors.hpp"
#include "lmtest/widths.hpp"

namespace lmtest {

using detail::fmt_double;
using detail::throw_numeric;
using detail::throw_validation;

double LptTest::beta() const { return std::sqrt(threshold); }

double lpt_threshold(double sigma, double rho, std::size_t k) {
  if (!(sigma > 0.0)) throw_validation("lpt_threshold: sigma must be positive");
  if (!(rho > 0.0 && rho <= 0.5)) throw_validation("lpt_threshold: rho must lie in (0, 1/2]");
  if (k == 0) throw_validation("lpt_threshold: k must be >= 1");
  const double kd = static_cast<double>(k);
  return sigma * sigma * (kd + std::sqrt(4.0 * kd / rho));
}

LptTest make_test(std::span<const double> theta_star, double sigma, double rho, std::size_t k) {
  if (k > theta_star.size()) {
    throw_validation("make_test: k = " + std::to_string(k) + " exceeds d = " +
                     std::to_string(theta_star.size()));
  }
  LptTest t;
  t.k = k;
  t.coords.resize(k);
  std::iota(t.coords.begin(), t.coords.end(), std::size_t{1});
  t.theta_star.assign(theta_star.begin(), theta_star.end());
  t.sigma = sigma;
  t.rho = rho;
  t.threshold = lpt_threshold(sigma, rho, k);
  return t;
}

BuiltTest build_test(const TestProblem& problem) {
  BuiltTest out;
  out.upper = solve_eps_upper(problem);
  out.test = make_test(problem.theta_star(), problem.sigma(), problem.rho(), out.upper.k);
  return out;
}

namespace {
void check_y(const LptTest& test, std::span<const double> y) {
  if (y.size() != test.theta_star.size()) {
    throw_validation("test_statistic: y has " + std::to_string(y.size()) +
                     " entries, expected " + std::to_string(test.theta_star.size()));
  }
}
}  // namespace

double test_statistic(const LptTest& test, std::span<const double> y) {
  check_y(test, y);
  double s = 0.0;
  for (std::size_t j : test.coords) {
    const double r = y[j - 1] - test.theta_star[j - 1];
    s += r * r;
  }
  return s;
}

int decide(const LptTest& test, std::span<const double> y) {
  return test_statistic(test, y) >= test.threshold ? 1 : 0;
}

double noncentrality_floor(const EllipseSpec& e, std::span<const double> theta_star, double eps,
                           std::size_t k) {
  const LocalizedEllipse local(e, Vector(theta_star.begin(), theta_star.end()));
  const double w = local.width_upper(eps, k);
  const double cap = eps / std::sqrt(2.0);
  if (w > cap * (1.0 + 1e-12)) {
    throw_numeric("noncentrality_floor: width bound " + fmt_double(w) + " exceeds eps/sqrt(2) = " +
                  fmt_double(cap) + " at k = " + std::to_string(k));
  }
  return eps * eps - w * w;
}

AnalyticBound analytic_error_bound(const LptTest& test, double eps, double c0_floor) {
  if (!(eps > 0.0)) throw_validation("analytic_error_bound: eps must be positive");
  if (!(c0_floor >= 0.0)) throw_validation("analytic_error_bound: c0_floor must be >= 0");
  AnalyticBound out;
  const double s2 = test.sigma * test.sigma;
  const double kd = static_cast<double>(test.k);
  // Chebyshev on the chi-square_k null statistic with the stored threshold.
  out.type1_ok = test.threshold >= s2 * (kd + std::sqrt(4.0 * kd / test.rho)) * (1.0 - 1e-12);
  out.type2_ok = c0_floor / (s2 * std::sqrt(kd)) >= 4.0 / std::sqrt(test.rho) * (1.0 - 1e-12);
  if (out.type1_ok && out.type2_ok) {
    out.value = test.rho;
    return out;
  }
  out.value = 1.0;
  if (!out.type1_ok) out.diagnostic = "type-I condition threshold >= sigma^2 (k + sqrt(4k/rho)) failed";
  if (!out.type2_ok) {
    if (!out.diagnostic.empty()) out.diagnostic += "; ";
    out.diagnostic += "type-II condition c₀/(σ²√k) ≥ 4/√ρ failed";
  }
  return out;
}

}  // namespace lmtest
