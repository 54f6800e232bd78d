#include "lmtest/lower_bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "lmtest/critical.hpp"
#include "lmtest/errors.hpp"
#include "lmtest/parallel.hpp"
#include "lmtest/rng.hpp"
#include "lmtest/widths.hpp"

namespace lmtest {

using detail::fmt_double;
using detail::throw_numeric;
using detail::throw_validation;

namespace {

constexpr double kLogOverflow = 700.0;
constexpr std::size_t kExhaustiveLimit = 20;
constexpr std::size_t kMembershipSamples = 10000;

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

bool pattern_bit(std::span<const std::uint64_t> pattern, std::size_t i) {
  return (pattern[i / 64] >> (i % 64)) & 1U;
}

std::string pattern_string(std::span<const std::uint64_t> pattern, std::size_t k) {
  std::string s;
  const std::size_t shown = std::min<std::size_t>(k, 64);
  for (std::size_t i = 0; i < shown; ++i) s += pattern_bit(pattern, i) ? '+' : '-';
  if (shown < k) s += "...";
  return s;
}

double bound_from_value(double value) {
  return std::clamp(1.0 - 0.5 * std::sqrt(std::max(0.0, value - 1.0)), 0.0, 1.0);
}

}  // namespace

PriorSupport make_prior(const EllipseSpec& e, std::span<const double> theta_star,
                        std::vector<Vector> perturbations) {
  if (theta_star.size() != e.dim()) throw_validation("make_prior: dimension mismatch");
  if (perturbations.empty()) throw_validation("make_prior: prior support must be non-empty");
  PriorSupport p;
  p.dim = e.dim();
  p.separation = std::numeric_limits<double>::infinity();
  p.membership_ok = true;
  Vector theta(e.dim());
  for (const auto& delta : perturbations) {
    if (delta.size() != e.dim()) throw_validation("make_prior: perturbation dimension mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = theta_star[i] + delta[i];
    p.membership_ok = p.membership_ok && contains(e, theta);
    p.separation = std::min(p.separation, l2_norm(delta));
  }
  p.points = std::move(perturbations);
  return p;
}

PriorSupport hypercube_prior(const EllipseSpec& e, std::span<const double> theta_star, double eps,
                             std::size_t k, std::uint64_t seed) {
  if (!(eps > 0.0)) throw_validation("hypercube_prior: eps must be positive");
  if (k == 0 || k > e.dim()) {
    throw_validation("hypercube_prior: k = " + std::to_string(k) + " outside [1, d]");
  }
  const LocalizedEllipse local(e, Vector(theta_star.begin(), theta_star.end()));
  PriorSupport p;
  p.dim = e.dim();
  p.cube = CubeSupport{local.cube_coords(k), eps / std::sqrt(static_cast<double>(k))};
  p.separation = eps;

  const auto mu = e.mu();
  const auto& coords = p.cube->coords;
  const double h = p.cube->halfside;
  double base = ellipse_norm_sq(e, theta_star);
  for (std::size_t j : coords) base -= theta_star[j - 1] * theta_star[j - 1] / mu[j - 1];
  const std::size_t words = (k + 63) / 64;
  std::vector<std::uint64_t> pattern(words, 0);
  auto norm_sq = [&](std::span<const std::uint64_t> bits) {
    double s = base;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = coords[i] - 1;
      const double v = theta_star[j] + (pattern_bit(bits, i) ? h : -h);
      s += v * v / mu[j];
    }
    return s;
  };
  auto fail = [&](std::span<const std::uint64_t> bits, double n2) {
    throw_numeric("hypercube_prior: sign pattern " + pattern_string(bits, k) +
                  " leaves the ellipse (||theta||_E^2 = " + fmt_double(n2) +
                  "); k = " + std::to_string(k) + " is too large at eps = " + fmt_double(eps));
  };
  if (k <= kExhaustiveLimit) {
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << k); ++b) {
      pattern[0] = b;
      const double n2 = norm_sq(pattern);
      if (n2 > 1.0 + kDefaultMembershipTol) fail(pattern, n2);
    }
  } else {
    // Worst corner: every sign agrees with theta*.
    for (std::size_t i = 0; i < k; ++i) {
      if (theta_star[coords[i] - 1] >= 0.0) pattern[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    double n2 = norm_sq(pattern);
    if (n2 > 1.0 + kDefaultMembershipTol) fail(pattern, n2);
    const Substream stream(seed, 0, StreamPurpose::PriorPairs);
    for (std::size_t t = 0; t < kMembershipSamples; ++t) {
      for (std::size_t w = 0; w < words; ++w) pattern[w] = stream.bits(t * words + w);
      n2 = norm_sq(pattern);
      if (n2 > 1.0 + kDefaultMembershipTol) fail(pattern, n2);
    }
  }
  p.membership_ok = true;
  return p;
}

Vector cube_point(const PriorSupport& prior, std::span<const std::uint64_t> pattern) {
  if (!prior.cube) throw_validation("cube_point: prior is not a cube");
  const auto& c = *prior.cube;
  if (pattern.size() * 64 < c.coords.size()) throw_validation("cube_point: pattern too short");
  Vector delta(prior.dim, 0.0);
  for (std::size_t i = 0; i < c.coords.size(); ++i) {
    delta[c.coords[i] - 1] = pattern_bit(pattern, i) ? c.halfside : -c.halfside;
  }
  return delta;
}

Chi2Bound chi2_bound_hypercube(double eps, double sigma, std::size_t k) {
  if (!(eps > 0.0) || !(sigma > 0.0)) {
    throw_validation("chi2_bound_hypercube: eps and sigma must be positive");
  }
  if (k == 0) throw_validation("chi2_bound_hypercube: k must be >= 1");
  const double kd = static_cast<double>(k);
  const double x = eps * eps / (kd * sigma * sigma);
  const double log_value = kd * log_cosh(x);
  Chi2Bound out;
  if (log_value > kLogOverflow) {
    out.overflow = true;
    out.value = std::numeric_limits<double>::infinity();
    out.bound = 0.0;
    out.diagnostic = "log E exp(<eta, eta'>/sigma^2) = " + fmt_double(log_value) +
                     " exceeds 700; bound is vacuous";
    return out;
  }
  const double excess = std::expm1(log_value);
  out.value = 1.0 + excess;
  out.bound = std::clamp(1.0 - 0.5 * std::sqrt(excess), 0.0, 1.0);
  return out;
}

EmpiricalChi2 chi2_bound_empirical(const PriorSupport& prior, double sigma, std::size_t n_pairs,
                                   std::uint64_t seed, std::size_t threads) {
  if (!(sigma > 0.0)) throw_validation("chi2_bound_empirical: sigma must be positive");
  const double s2 = sigma * sigma;
  const bool is_cube = prior.cube.has_value();
  const std::size_t k = is_cube ? prior.cube->coords.size() : 0;
  if (!is_cube && prior.points.empty()) {
    throw_validation("chi2_bound_empirical: prior support is empty");
  }
  const double support = is_cube ? (k >= 63 ? std::numeric_limits<double>::infinity()
                                            : std::ldexp(1.0, static_cast<int>(k)))
                                 : static_cast<double>(prior.points.size());
  EmpiricalChi2 out;
  out.exact = support * support <= static_cast<double>(kExactPairLimit);
  if (!out.exact && n_pairs < 10000) {
    throw_validation("chi2_bound_empirical: n_pairs must be >= 10^4, got " +
                     std::to_string(n_pairs));
  }

  // Log of each summand; reduced in index order so results do not depend on
  // the thread count.
  std::vector<double> logs;
  if (out.exact) {
    const auto n = static_cast<std::size_t>(support);
    logs.resize(n * n);
    if (is_cube) {
      const double hh = prior.cube->halfside * prior.cube->halfside / s2;
      parallel_for(
          n,
          [&](std::size_t a) {
            for (std::size_t b = 0; b < n; ++b) {
              const auto agree = static_cast<double>(k) -
                                 2.0 * static_cast<double>(std::popcount(
                                           static_cast<std::uint64_t>(a ^ b)));
              logs[a * n + b] = hh * agree;
            }
          },
          threads);
    } else {
      parallel_for(
          n,
          [&](std::size_t a) {
            for (std::size_t b = 0; b < n; ++b) {
              logs[a * n + b] = std::inner_product(prior.points[a].begin(), prior.points[a].end(),
                                                   prior.points[b].begin(), 0.0) /
                                s2;
            }
          },
          threads);
    }
  } else {
    logs.resize(n_pairs);
    const std::size_t words = (k + 63) / 64;
    parallel_for(
        n_pairs,
        [&](std::size_t t) {
          const Substream stream(seed, t, StreamPurpose::PriorPairs);
          if (is_cube) {
            // Antithetic pair (b, b') and (b, -b'): average exp(s) and exp(-s).
            std::size_t agree = 0;
            for (std::size_t w = 0; w < words; ++w) {
              std::uint64_t diff = stream.bits(2 * w) ^ stream.bits(2 * w + 1);
              const std::size_t valid = std::min<std::size_t>(64, k - 64 * w);
              if (valid < 64) diff &= (std::uint64_t{1} << valid) - 1;
              agree += valid - static_cast<std::size_t>(std::popcount(diff));
            }
            const double s = prior.cube->halfside * prior.cube->halfside / s2 *
                             (2.0 * static_cast<double>(agree) - static_cast<double>(k));
            logs[t] = log_cosh(s);
          } else {
            const std::size_t n = prior.points.size();
            const std::size_t a = static_cast<std::size_t>(stream.uniform(0) * static_cast<double>(n));
            const std::size_t b = static_cast<std::size_t>(stream.uniform(1) * static_cast<double>(n));
            const auto& pa = prior.points[std::min(a, n - 1)];
            const auto& pb = prior.points[std::min(b, n - 1)];
            logs[t] = std::inner_product(pa.begin(), pa.end(), pb.begin(), 0.0) / s2;
          }
        },
        threads);
  }

  out.pairs = logs.size();
  const double m = *std::max_element(logs.begin(), logs.end());
  out.overflow_count = static_cast<std::size_t>(
      std::count_if(logs.begin(), logs.end(), [](double l) { return l > kLogOverflow; }));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double l : logs) {
    const double w = std::exp(l - m);
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(logs.size());
  const double mean_w = sum / n;
  const double log_value = m + std::log(mean_w);
  if (log_value > kLogOverflow || out.overflow_count > 0) {
    out.value = std::numeric_limits<double>::infinity();
    out.stderr_value = std::numeric_limits<double>::infinity();
    out.bound = 0.0;
    out.stderr_bound = 0.0;
    return out;
  }
  out.value = std::exp(log_value);
  out.bound = bound_from_value(out.value);
  if (!out.exact && n > 1.0) {
    const double var_w = std::max(0.0, (sum_sq - n * mean_w * mean_w) / (n - 1.0));
    out.stderr_value = std::exp(m) * std::sqrt(var_w / n);
    const double excess = out.value - 1.0;
    out.stderr_bound = excess > 0.0 && out.bound > 0.0 ? out.stderr_value / (4.0 * std::sqrt(excess))
                                                       : 0.0;
  }
  return out;
}

ThetaDagger theta_dagger(const EllipseSpec& e, std::span<const double> theta_star, double a,
                         double eps) {
  if (!(a > 0.0 && a < 1.0)) throw_validation("theta_dagger: a must lie in (0, 1)");
  if (!(eps > 0.0)) throw_validation("theta_dagger: eps must be positive");
  if (theta_star.size() != e.dim()) throw_validation("theta_dagger: dimension mismatch");
  const double target = a * a * eps * eps;
  const double norm2 = l2_norm(theta_star);
  if (!(a * eps < norm2)) {
    throw_validation("theta_dagger: need ||theta*|| > a * eps, got ||theta*|| = " +
                     fmt_double(norm2) + ", a * eps = " + fmt_double(a * eps));
  }
  double lo = 0.0;
  double hi = e.mu()[0];
  while (phi_psi(e, theta_star, hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw_numeric("theta_dagger: root bracket overflow");
  }
  for (int it = 0; it < 300 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi_psi(e, theta_star, mid) >= target ? hi : lo) = mid;
  }
  ThetaDagger out;
  out.r = hi;
  const auto mu = e.mu();
  const std::size_t d = e.dim();
  out.theta.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.theta[i] = theta_star[i] * mu[i] / (mu[i] + out.r);

  if (!(ellipse_norm(e, out.theta) < ellipse_norm(e, theta_star))) {
    throw_numeric("theta_dagger: ||theta-dagger||_E did not decrease");
  }
  // theta* - theta-dagger must be a nonnegative multiple of M theta-dagger.
  Vector u(d), v(d);
  for (std::size_t i = 0; i < d; ++i) {
    u[i] = theta_star[i] - out.theta[i];
    v[i] = out.theta[i] / mu[i];
  }
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  double gap = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double g = u[i] / nu - v[i] / nv;
    gap += g * g;
  }
  if (std::sqrt(gap) > 1e-8) {
    throw_numeric("theta_dagger: residual direction deviates from M theta-dagger by " +
                  fmt_double(std::sqrt(gap)));
  }
  return out;
}

}  // namespace lmtest
