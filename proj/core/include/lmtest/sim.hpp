#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lmtest/critical.hpp"
#include "lmtest/ellipse.hpp"
#include "lmtest/lpt.hpp"
#include "lmtest/rng.hpp"

namespace lmtest {

/// y = theta + sigma g, g_i = Substream(seed, trial_index, purpose).gaussian(i).
Vector sample_observation(std::span<const double> theta, double sigma, std::uint64_t seed,
                          std::uint64_t trial_index,
                          StreamPurpose purpose = StreamPurpose::Observation);

/// theta + sigma * noise; sigma = 0 is allowed and returns theta exactly.
Vector observe(std::span<const double> theta, double sigma, std::span<const double> noise);

struct Alternative {
  Vector theta;
  double c0 = 0.0;        // ||Pi(theta - theta*)||^2
  double distance = 0.0;  // ||theta - theta*||
};

struct AlternativeOptions {
  std::size_t starts = 1000;
  std::size_t angle_grid = 4096;
  std::uint64_t seed = 0xa17e;
  std::size_t threads = 0;
};

/// A point of E at distance eps from theta* with small projected separation
/// onto coords (1-based): the best two-coordinate construction (largest
/// out-of-projection axis against an in-projection axis), refined by
/// multistart pairwise-rotation search. Throws NumericError when no point of
/// E at distance eps is found.
Alternative worst_case_alternative(const EllipseSpec& e, std::span<const double> theta_star,
                                   double eps, std::span<const std::size_t> coords,
                                   const AlternativeOptions& options = {});

struct ErrorEstimate {
  double type1 = 0.0;
  double type2 = 0.0;
  double stderr1 = 0.0;
  double stderr2 = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t null_rejections = 0;
  std::size_t alt_acceptances = 0;

  double uniform_error() const { return type1 + type2; }
};

/// Type I: rejections under y ~ N(theta*, sigma^2 I); type II: acceptances
/// under y ~ N(theta_alt, sigma^2 I). Trial t uses its own substreams.
ErrorEstimate estimate_errors(const LptTest& test, std::span<const double> theta_alt,
                              std::size_t trials, std::uint64_t seed, std::size_t threads = 0);

struct RadiusEvaluation {
  double eps = 0.0;
  std::size_t k = 0;
  double uniform_error = 0.0;
};

struct EmpiricalRadius {
  double eps = 0.0;
  double eps_u = 0.0;
  double theorem2 = 0.0;
  std::size_t trials = 0;  // trials per evaluation actually used
  bool retried = false;
  std::vector<RadiusEvaluation> evaluations;
};

/// Smallest tested eps at which the test rebuilt at k_u(eps) has estimated
/// uniform error <= rho against the worst-case alternative; bisection of depth
/// 20 starting from [theorem2_radius, eps_u]. A measurement, not a certificate.
EmpiricalRadius empirical_radius(const TestProblem& problem, std::size_t trials,
                                 std::uint64_t seed, const LowerBoundConstants& consts = {},
                                 std::size_t threads = 0);

struct ExponentFit {
  double slope = 0.0;
  double stderr = 0.0;
  double intercept = 0.0;
};

/// OLS of log y on log x. Needs >= 3 positive rows spanning >= 1 decade in x.
ExponentFit fit_exponent(std::span<const std::pair<double, double>> rows);

std::vector<double> log_grid(double lo, double hi, std::size_t points);

struct SweepRow {
  double sigma = 0.0;
  double eps_u = 0.0;
  double eps_l = 0.0;
  std::size_t k_u = 0;
  std::size_t k_l = 0;
  double residual = 0.0;  // log eps_u^2 minus the fitted line
};

struct SweepFailure {
  double sigma = 0.0;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepFailure> failures;
  ExponentFit upper;  // log eps_u^2 against log sigma^2
  ExponentFit lower;  // log eps_l^2 against log sigma^2
  Family family = Family::Explicit;
};

/// Solves eps_u and eps_l per sigma (>= 8 grid points) and fits both slopes.
SweepResult sigma_sweep(const EllipseSpec& e, std::span<const double> theta_star,
                        std::span<const double> sigma_grid, double rho,
                        const LowerBoundConstants& consts = {}, std::size_t threads = 0);

struct TStarRow {
  double sigma = 0.0;
  TStar t;
};

struct TStarSweep {
  std::vector<TStarRow> rows;
  std::vector<SweepFailure> failures;
  ExponentFit upper;  // log t_u^2 against log sigma^2
  ExponentFit lower;  // log t_l^2 against log sigma^2
};

TStarSweep tstar_sweep(const EllipseSpec& e, std::size_t s, std::span<const double> sigma_grid,
                       double rho, std::size_t threads = 0);

}  // namespace lmtest
