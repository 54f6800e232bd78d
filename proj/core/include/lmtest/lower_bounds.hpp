#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmtest/ellipse.hpp"

namespace lmtest {

/// Sign-pattern cube theta* + h sum_i b_i e_i over coords, b in {-1, +1}^k.
/// Never materialised; pattern bit i selects the sign of coords[i].
struct CubeSupport {
  std::vector<std::size_t> coords;  // 1-based
  double halfside = 0.0;
};

/// Uniform prior over perturbations Delta (theta = theta* + Delta), given
/// either as explicit points or as an implicit sign-pattern cube.
struct PriorSupport {
  std::size_t dim = 0;
  std::vector<Vector> points;
  std::optional<CubeSupport> cube;
  double separation = 0.0;  // min ||Delta||
  bool membership_ok = false;
};

/// Explicit prior; separation computed, membership checked against E at theta*.
PriorSupport make_prior(const EllipseSpec& e, std::span<const double> theta_star,
                        std::vector<Vector> perturbations);

/// The 2^k perturbations (eps / sqrt(k)) sum_i b_i e_i on the cube coordinates
/// of E - theta* (axes where theta* vanishes first, by decreasing mu).
/// Membership is checked for every pattern when k <= 20, otherwise on 10^4
/// sampled patterns plus the worst corner. Throws NumericError naming a
/// violating pattern.
PriorSupport hypercube_prior(const EllipseSpec& e, std::span<const double> theta_star, double eps,
                             std::size_t k, std::uint64_t seed = 0);

/// Perturbation of a cube prior for a sign pattern given as bit words.
Vector cube_point(const PriorSupport& prior, std::span<const std::uint64_t> pattern);

struct Chi2Bound {
  double bound = 0.0;   // 1 - sqrt(value - 1) / 2, clamped to [0, 1]
  double value = 0.0;   // E exp(<eta, eta'> / sigma^2); +inf on overflow
  bool overflow = false;
  std::string diagnostic;
};

/// Closed form for the cube prior: value = cosh(x)^k, x = eps^2 / (k sigma^2).
Chi2Bound chi2_bound_hypercube(double eps, double sigma, std::size_t k);

struct EmpiricalChi2 {
  double bound = 0.0;
  double stderr_bound = 0.0;  // delta method from stderr_value
  double value = 0.0;
  double stderr_value = 0.0;
  bool exact = false;
  std::size_t pairs = 0;
  std::size_t overflow_count = 0;
};

inline constexpr std::size_t kExactPairLimit = 1000000;

/// Estimates E exp(<eta, eta'> / sigma^2) for eta, eta' i.i.d. from the prior;
/// exact enumeration when |support|^2 <= 10^6, otherwise n_pairs sampled pairs
/// (antithetic sign pairs for cube priors).
EmpiricalChi2 chi2_bound_empirical(const PriorSupport& prior, double sigma,
                                   std::size_t n_pairs = 10000, std::uint64_t seed = 0,
                                   std::size_t threads = 0);

struct ThetaDagger {
  Vector theta;
  double r = 0.0;
};

/// theta-dagger_i = theta*_i / (1 + r / mu_i) with r the root of
/// psi(r) = sum_i r^2 / (r + mu_i)^2 theta*_i^2 = a^2 eps^2, so that
/// ||theta* - theta-dagger|| = a eps. Requires ||theta*|| > a eps.
ThetaDagger theta_dagger(const EllipseSpec& e, std::span<const double> theta_star, double a,
                         double eps);

}  // namespace lmtest
