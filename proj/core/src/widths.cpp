#include "lmtest/widths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "lmtest/errors.hpp"
#include "lmtest/parallel.hpp"
#include "lmtest/rng.hpp"

namespace lmtest {

using detail::fmt_double;
using detail::throw_numeric;
using detail::throw_validation;

std::string_view to_string(WidthMethod method) {
  switch (method) {
    case WidthMethod::CenteredExact: return "centered_exact";
    case WidthMethod::ZeroCase: return "zero_case";
    case WidthMethod::ExtremalAxis: return "extremal_axis";
    case WidthMethod::GenericBound: return "generic_bound";
    case WidthMethod::BruteOracle: return "brute_oracle";
  }
  return "unknown";
}

std::string_view to_string(ExtremalBranch branch) {
  switch (branch) {
    case ExtremalBranch::TwoConstraint: return "two_constraint";
    case ExtremalBranch::ClampedZero: return "clamped_zero";
    case ExtremalBranch::BallOnly: return "ball_only";
    case ExtremalBranch::EllipseOnly: return "ellipse_only";
    case ExtremalBranch::FullProjection: return "full_projection";
  }
  return "unknown";
}

namespace {

void check_eps(double eps, const char* op) {
  if (!std::isfinite(eps) || !(eps > 0.0)) {
    throw_validation(std::string(op) + ": eps must be positive and finite, got " +
                     fmt_double(eps));
  }
}

void check_k(const EllipseSpec& e, std::size_t k, const char* op) {
  if (k > e.dim()) {
    throw_validation(std::string(op) + ": k = " + std::to_string(k) +
                     " exceeds d = " + std::to_string(e.dim()));
  }
}

void check_theta(const EllipseSpec& e, std::span<const double> theta,
                 const char* op) {
  if (theta.size() != e.dim()) {
    throw_validation(std::string(op) + ": theta* has " + std::to_string(theta.size()) +
                     " entries, ellipse has d = " + std::to_string(e.dim()));
  }
  for (double v : theta) {
    if (!std::isfinite(v)) throw_validation(std::string(op) + ": theta* is not finite");
  }
  if (!contains(e, theta)) {
    throw_validation(std::string(op) + ": theta* lies outside the ellipse (||theta*||_E^2 = " +
                     fmt_double(ellipse_norm_sq(e, theta)) + ")");
  }
}

// Positive root of a r^2 + 2 b r - c = 0 with a > 0, c >= 0.
double positive_root(double a, double b, double c) {
  if (c <= 0.0) return b >= 0.0 ? 0.0 : -2.0 * b / a;
  const double disc = std::sqrt(b * b + a * c);
  return b > 0.0 ? c / (b + disc) : (disc - b) / a;
}

void check_axis_problem(const EllipseSpec& e, double theta_s, std::size_t s,
                        double eps, std::size_t m, const char* op) {
  check_eps(eps, op);
  if (s == 0 || s > e.dim()) {
    throw_validation(std::string(op) + ": axis s = " + std::to_string(s) +
                     " outside [1, d]");
  }
  if (m < s) {
    throw_validation(std::string(op) + ": projection size m = " + std::to_string(m) +
                     " must be >= s = " + std::to_string(s));
  }
  const double mu_s = e.axis(s);
  if (!std::isfinite(theta_s) || theta_s * theta_s / mu_s > 1.0 + kDefaultMembershipTol) {
    throw_validation(std::string(op) + ": theta*_s = " + fmt_double(theta_s) +
                     " lies outside the ellipse");
  }
}

}  // namespace

double width_upper_zero(const EllipseSpec& e, double eps, std::size_t k) {
  check_eps(eps, "width_upper_zero");
  check_k(e, k, "width_upper_zero");
  return std::min(eps, std::sqrt(e.axis(k + 1)));
}

WidthBounds width_exact_centered(const EllipseSpec& e, double eps, std::size_t k) {
  const double w = width_upper_zero(e, eps, k);
  return {k, w, w, WidthMethod::CenteredExact};
}

double bernstein_l2_centered(const EllipseSpec& e, std::size_t k) {
  if (k >= e.dim()) {
    throw_validation("bernstein_l2_centered: k = " + std::to_string(k) +
                     " must be < d = " + std::to_string(e.dim()));
  }
  return std::sqrt(e.axis(k + 1));
}

ExtremalWidth width_upper_extremal(const EllipseSpec& e, double theta_star_s,
                                   std::size_t s, double eps, std::size_t m) {
  check_axis_problem(e, theta_star_s, s, eps, m, "width_upper_extremal");
  if (m >= e.dim()) return {0.0, 0.0, ExtremalBranch::FullProjection};
  const double mu_s = e.axis(s);
  const double mu_next = e.axis(m + 1);
  const double t = mu_next / mu_s;
  if (!(t < 1.0)) {
    throw_validation("width_upper_extremal: mu_{m+1} / mu_s = " + fmt_double(t) +
                     " must be < 1");
  }
  const double th = std::abs(theta_star_s);
  const double disc = (eps * eps - mu_next) / (1.0 - t) +
                      t * th * th / ((1.0 - t) * (1.0 - t));
  if (disc < 0.0) {
    throw_numeric("width_upper_extremal: negative discriminant " + fmt_double(disc) +
                  " (no two-constraint solution for eps = " + fmt_double(eps) + ")");
  }
  const double x = th / (1.0 - t) - std::sqrt(disc);
  const double tail_sq = mu_next * (1.0 - x * x / mu_s);
  if (tail_sq < 0.0) return {0.0, tail_sq, ExtremalBranch::ClampedZero};
  return {std::min(eps, std::sqrt(tail_sq)), tail_sq, ExtremalBranch::TwoConstraint};
}

ExtremalWidth extremal_tail_width(const EllipseSpec& e, double theta_star_s,
                                  std::size_t s, double eps, std::size_t m) {
  check_axis_problem(e, theta_star_s, s, eps, m, "extremal_tail_width");
  if (m >= e.dim()) return {0.0, 0.0, ExtremalBranch::FullProjection};
  const double mu_s = e.axis(s);
  const double mu_next = e.axis(m + 1);
  const double th = std::min(std::abs(theta_star_s), std::sqrt(mu_s));
  const double eps2 = eps * eps;
  // Maximise y^2 = min{ mu_next (1 - x^2 / mu_s), eps^2 - (x - th)^2 } over x.
  if (th * th / mu_s + eps2 / mu_next <= 1.0) {
    return {eps, eps2, ExtremalBranch::BallOnly};
  }
  if (eps2 - th * th >= mu_next) {
    return {std::sqrt(mu_next), mu_next, ExtremalBranch::EllipseOnly};
  }
  // The two curves cross once in (0, th); take that crossing.
  const double t = mu_next / mu_s;
  double x;
  if (1.0 - t > 1e-12) {
    const double disc = (eps2 - mu_next) / (1.0 - t) + t * th * th / ((1.0 - t) * (1.0 - t));
    x = th / (1.0 - t) - std::sqrt(std::max(0.0, disc));
  } else {
    x = (th * th + mu_next - eps2) / (2.0 * th);
  }
  x = std::clamp(x, 0.0, th);
  const double tail_sq = std::max(0.0, mu_next * (1.0 - x * x / mu_s));
  return {std::min(eps, std::sqrt(tail_sq)), tail_sq, ExtremalBranch::TwoConstraint};
}

double coordinate_tail_dual_bound(const EllipseSpec& e,
                                  std::span<const double> theta_star, double eps,
                                  std::size_t k) {
  check_eps(eps, "coordinate_tail_dual_bound");
  check_k(e, k, "coordinate_tail_dual_bound");
  check_theta(e, theta_star, "coordinate_tail_dual_bound");
  const std::size_t d = e.dim();
  if (k >= d) return 0.0;
  const auto mu = e.mu();
  const double mu_next = mu[k];
  const double eps2 = eps * eps;
  if (is_zero(theta_star)) return std::min(eps, std::sqrt(mu_next));
  const double rem = std::max(0.0, 1.0 - ellipse_norm_sq(e, theta_star));

  Vector a(d);
  for (std::size_t i = 0; i < d; ++i) a[i] = theta_star[i] / mu[i];
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // For fixed lambda, g(lambda, nu) is convex in nu with derivative
  // eps^2 - sum c_i^2 / q_i^2; locate its root by bisection.
  auto inner = [&](double lam) {
    const double nu_lo = std::max(0.0, 1.0 - lam / mu_next);
    auto q = [&](std::size_t i, double nu) {
      return lam / mu[i] + nu - (i >= k ? 1.0 : 0.0);
    };
    auto deriv = [&](double nu) {
      double sum = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double c = lam * a[i];
        if (c == 0.0) continue;
        const double qi = q(i, nu);
        if (qi <= 0.0) return -kInf;
        sum += (c / qi) * (c / qi);
      }
      return eps2 - sum;
    };
    auto value = [&](double nu) {
      double g = lam * rem + nu * eps2;
      for (std::size_t i = 0; i < d; ++i) {
        const double c = lam * a[i];
        if (c == 0.0) continue;
        const double qi = q(i, nu);
        if (qi <= 0.0) return kInf;
        g += c * c / qi;
      }
      return g;
    };
    if (deriv(nu_lo) >= 0.0) return value(nu_lo);
    double lo = nu_lo;
    double step = std::max(1e-12, 1e-6 * std::max(1.0, std::abs(nu_lo)));
    double hi = nu_lo + step;
    while (deriv(hi) < 0.0) {
      lo = hi;
      step *= 4.0;
      hi = nu_lo + step;
      if (!std::isfinite(hi)) return kInf;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (deriv(mid) < 0.0 ? lo : hi) = mid;
    }
    return std::min(value(hi), value(0.5 * (lo + hi)));
  };

  // h(lambda) = min_nu g is convex; coarse geometric scan, then golden section.
  constexpr int kGrid = 40;
  std::vector<double> lams{0.0};
  for (int j = -kGrid; j <= kGrid; ++j) lams.push_back(mu_next * std::ldexp(1.0, j));
  std::vector<double> vals(lams.size());
  for (std::size_t j = 0; j < lams.size(); ++j) vals[j] = inner(lams[j]);
  const std::size_t best = static_cast<std::size_t>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  double result = vals[best];
  double lo = lams[best == 0 ? 0 : best - 1];
  double hi = lams[std::min(best + 1, lams.size() - 1)];
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = inner(x1);
  double f2 = inner(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-12 * std::max(hi, 1e-300); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = inner(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = inner(x2);
    }
  }
  result = std::min({result, f1, f2});
  return std::sqrt(std::clamp(result, 0.0, eps2));
}

// ---------------------------------------------------------------------------

LocalizedEllipse::LocalizedEllipse(EllipseSpec e, Vector theta_star)
    : e_(std::move(e)), theta_(std::move(theta_star)) {
  check_theta(e_, theta_, "LocalizedEllipse");
  const std::size_t d = e_.dim();
  const auto mu = e_.mu();
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (theta_[i] != 0.0) {
      ++nonzero;
      axis_ = i + 1;
    }
  }
  shape_ = nonzero == 0 ? Shape::Zero : nonzero == 1 ? Shape::Axis : Shape::General;
  if (shape_ != Shape::Axis) axis_ = 0;
  enorm_ = ellipse_norm(e_, theta_);
  l2_ = l2_norm(theta_);

  tail_enorm_sq_.assign(d + 1, 0.0);
  for (std::size_t i = d; i-- > 0;) {
    tail_enorm_sq_[i] = tail_enorm_sq_[i + 1] + theta_[i] * theta_[i] / mu[i];
  }

  order_.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (theta_[i] == 0.0) order_.push_back(i);
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (theta_[i] != 0.0) order_.push_back(i);
  }
  inv_mu_prefix_.assign(d + 1, 0.0);
  lin_prefix_.assign(d + 1, 0.0);
  quad_prefix_.assign(d + 1, 0.0);
  min_mu_prefix_.assign(d + 1, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t i = order_[j];
    const double r = theta_[i] / mu[i];
    inv_mu_prefix_[j + 1] = inv_mu_prefix_[j] + 1.0 / mu[i];
    lin_prefix_[j + 1] = lin_prefix_[j] + std::abs(r);
    quad_prefix_[j + 1] = quad_prefix_[j] + r * r;
    min_mu_prefix_[j + 1] = std::min(min_mu_prefix_[j], mu[i]);
  }
}

double LocalizedEllipse::diameter_bound() const noexcept {
  return std::sqrt(e_.mu()[0]) + l2_;
}

double LocalizedEllipse::tail_enorm(std::size_t k) const {
  return std::sqrt(tail_enorm_sq_[std::min(k, dim())]);
}

WidthMethod LocalizedEllipse::width_upper_method(std::size_t k) const {
  switch (shape_) {
    case Shape::Zero: return WidthMethod::ZeroCase;
    case Shape::Axis: return k >= axis_ ? WidthMethod::ExtremalAxis : WidthMethod::GenericBound;
    case Shape::General: break;
  }
  return WidthMethod::GenericBound;
}

double LocalizedEllipse::width_upper(double eps, std::size_t k) const {
  check_eps(eps, "width_upper");
  check_k(e_, k, "width_upper");
  if (k >= dim()) return 0.0;
  const double mu_next = e_.axis(k + 1);
  switch (width_upper_method(k)) {
    case WidthMethod::ZeroCase: return std::min(eps, std::sqrt(mu_next));
    case WidthMethod::ExtremalAxis:
      return extremal_tail_width(e_, theta_[axis_ - 1], axis_, eps, k).value;
    default: break;
  }
  return std::min(eps, std::sqrt(mu_next) * (1.0 + tail_enorm(k)));
}

double LocalizedEllipse::ball_radius(std::size_t k) const {
  if (k >= dim()) return 0.0;
  const double rem = std::max(0.0, 1.0 - enorm_ * enorm_);
  const double s3 = quad_prefix_[k + 1];
  const double mu_min = min_mu_prefix_[k + 1];
  if (rem == 0.0) return 0.0;
  return rem / (std::sqrt(s3) + std::sqrt(s3 + rem / mu_min));
}

double LocalizedEllipse::width_lower(double radius, std::size_t k) const {
  if (!(radius >= 0.0)) throw_validation("width_lower: radius must be >= 0");
  return std::min(radius, ball_radius(k));
}

double LocalizedEllipse::cube_halfside(std::size_t k) const {
  if (k == 0) return 0.0;
  if (k > dim()) {
    throw_validation("cube_halfside: k = " + std::to_string(k) + " exceeds d = " +
                     std::to_string(dim()));
  }
  const double rem = std::max(0.0, 1.0 - enorm_ * enorm_);
  if (rem == 0.0) return 0.0;
  const double s1 = inv_mu_prefix_[k];
  const double s2 = lin_prefix_[k];
  return rem / (s2 + std::sqrt(s2 * s2 + s1 * rem));
}

std::vector<std::size_t> LocalizedEllipse::cube_coords(std::size_t k) const {
  if (k > dim()) throw_validation("cube_coords: k exceeds d");
  std::vector<std::size_t> out(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(k));
  for (auto& i : out) ++i;
  std::sort(out.begin(), out.end());
  return out;
}

WidthBounds width_generic_bounds(const EllipseSpec& e,
                                 std::span<const double> theta_star, double eps,
                                 std::size_t k) {
  check_eps(eps, "width_generic_bounds");
  check_k(e, k, "width_generic_bounds");
  const LocalizedEllipse local(e, Vector(theta_star.begin(), theta_star.end()));
  if (local.shape() == LocalizedEllipse::Shape::Zero) {
    return width_exact_centered(e, eps, k);
  }
  WidthBounds out{k, local.width_lower(eps, k), local.width_upper(eps, k),
                  local.width_upper_method(k)};
  if (out.method == WidthMethod::GenericBound && k < e.dim()) {
    out.upper = std::min(out.upper, coordinate_tail_dual_bound(e, theta_star, eps, k));
  }
  out.lower = std::min(out.lower, out.upper);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double binomial_capped(std::size_t n, std::size_t k, double cap) {
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > cap) return c;
  }
  return std::round(c);
}

// The r-th (0-based) k-subset of {0..n-1} in lexicographic order.
std::vector<std::size_t> unrank_subset(std::size_t n, std::size_t k, std::uint64_t r,
                                       const std::vector<std::vector<double>>& binom) {
  std::vector<std::size_t> out;
  out.reserve(k);
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < k; ++slot) {
    for (std::size_t v = next; v < n; ++v) {
      const auto count = static_cast<std::uint64_t>(binom[n - v - 1][k - slot - 1]);
      if (r < count) {
        out.push_back(v);
        next = v + 1;
        break;
      }
      r -= count;
    }
  }
  return out;
}

struct TailObjective {
  std::span<const double> mu;
  std::span<const double> theta;
  const std::vector<char>* in_tail;
  double eps;
  double rem;

  // Radius along direction u (unit) and the objective F = r^2 ||u_T||^2.
  double radius(std::span<const double> u, double* a_out, double* b_out) const {
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      a += u[i] * u[i] / mu[i];
      b += theta[i] * u[i] / mu[i];
    }
    if (a_out) *a_out = a;
    if (b_out) *b_out = b;
    return positive_root(a, b, rem);
  }

  double value(std::span<const double> u) const {
    const double r = std::min(eps, radius(u, nullptr, nullptr));
    double p = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if ((*in_tail)[i]) p += u[i] * u[i];
    }
    return r * r * p;
  }

  double gradient(std::span<const double> u, std::span<double> g) const {
    double a = 0.0;
    double b = 0.0;
    const double re = radius(u, &a, &b);
    const double r = std::min(eps, re);
    double p = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if ((*in_tail)[i]) p += u[i] * u[i];
    }
    const double slope = a * re + b;
    const bool ellipse_active = re < eps && slope > 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double gi = (*in_tail)[i] ? 2.0 * r * r * u[i] : 0.0;
      if (ellipse_active) {
        const double dr = -r * (r * u[i] + theta[i]) / (mu[i] * slope);
        gi += 2.0 * r * p * dr;
      }
      g[i] = gi;
    }
    return r * r * p;
  }
};

void normalize(std::span<double> u) {
  const double n = l2_norm(u);
  for (double& x : u) x /= n;
}

double ascend(const TailObjective& f, std::span<double> u, std::size_t max_iters) {
  const std::size_t d = u.size();
  Vector g(d), cand(d);
  double fu = f.gradient(u, g);
  double tau = 0.5;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const double gu = std::inner_product(g.begin(), g.end(), u.begin(), 0.0);
    for (std::size_t i = 0; i < d; ++i) g[i] -= gu * u[i];
    const double gn = l2_norm(g);
    if (gn < 1e-8 * std::max(fu, 1e-300) || gn == 0.0) break;
    tau = std::min(1.0, 2.0 * tau);
    bool moved = false;
    while (tau > 1e-14) {
      for (std::size_t i = 0; i < d; ++i) cand[i] = u[i] + tau * g[i] / gn;
      normalize(cand);
      const double fc = f.value(cand);
      if (fc > fu) {
        std::copy(cand.begin(), cand.end(), u.begin());
        moved = true;
        break;
      }
      tau *= 0.5;
    }
    if (!moved) break;
    fu = f.gradient(u, g);
  }
  return f.value(u);
}

}  // namespace

BruteForceResult brute_force_width_detail(const EllipseSpec& e,
                                          std::span<const double> theta_star,
                                          double eps, std::size_t k,
                                          const BruteForceOptions& options) {
  check_eps(eps, "brute_force_width");
  check_k(e, k, "brute_force_width");
  check_theta(e, theta_star, "brute_force_width");
  if (options.n_dirs == 0) throw_validation("brute_force_width: n_dirs must be >= 1");
  const std::size_t d = e.dim();
  const double n_subsets = binomial_capped(d, k, static_cast<double>(options.max_subsets));
  if (n_subsets > static_cast<double>(options.max_subsets)) {
    throw_validation("brute_force_width: C(" + std::to_string(d) + ", " + std::to_string(k) +
                     ") subsets exceeds the limit of " + std::to_string(options.max_subsets));
  }
  BruteForceResult result;
  result.subsets = static_cast<std::size_t>(n_subsets);
  if (k == d) {
    result.width = 0.0;
    for (std::size_t i = 1; i <= d; ++i) result.best_subset.push_back(i);
    return result;
  }

  std::vector<std::vector<double>> binom(d + 1, std::vector<double>(d + 1, 0.0));
  for (std::size_t n = 0; n <= d; ++n) {
    binom[n][0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j) binom[n][j] = binom[n - 1][j - 1] + binom[n - 1][j];
  }

  // Shared random directions: the same seeds serve every subset.
  const Substream dirs(options.seed, 0, StreamPurpose::Multistart);
  Vector seeds(options.n_dirs * d);
  for (std::size_t j = 0; j < options.n_dirs; ++j) {
    std::span<double> u(seeds.data() + j * d, d);
    for (std::size_t i = 0; i < d; ++i) u[i] = dirs.gaussian(j * d + i);
    normalize(u);
  }

  const double rem = std::max(0.0, 1.0 - ellipse_norm_sq(e, theta_star));
  std::vector<double> best(result.subsets, 0.0);
  parallel_for(
      result.subsets,
      [&](std::size_t idx) {
        const auto subset = unrank_subset(d, k, idx, binom);
        std::vector<char> in_tail(d, 1);
        for (std::size_t i : subset) in_tail[i] = 0;
        const TailObjective f{e.mu(), theta_star, &in_tail, eps, rem};

        std::vector<std::pair<double, std::size_t>> scored(options.n_dirs);
        for (std::size_t j = 0; j < options.n_dirs; ++j) {
          scored[j] = {f.value(std::span<const double>(seeds.data() + j * d, d)), j};
        }
        const std::size_t top = std::min(options.n_refine, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top),
                          scored.end(), [](const auto& x, const auto& y) {
                            return x.first > y.first || (x.first == y.first && x.second < y.second);
                          });
        double value = scored.front().first;
        Vector u(d);
        for (std::size_t j = 0; j < top; ++j) {
          std::copy_n(seeds.begin() + static_cast<std::ptrdiff_t>(scored[j].second * d), d,
                      u.begin());
          value = std::max(value, ascend(f, u, options.max_iters));
        }
        // Axis seeds in the tail, both signs.
        for (std::size_t i = 0; i < d; ++i) {
          if (!in_tail[i]) continue;
          for (double sign : {1.0, -1.0}) {
            std::fill(u.begin(), u.end(), 0.0);
            u[i] = sign;
            value = std::max(value, f.value(u));
            value = std::max(value, ascend(f, u, options.max_iters));
          }
        }
        best[idx] = std::sqrt(value);
      },
      options.threads);

  const std::size_t arg = static_cast<std::size_t>(
      std::min_element(best.begin(), best.end()) - best.begin());
  result.width = best[arg];
  for (std::size_t i : unrank_subset(d, k, arg, binom)) result.best_subset.push_back(i + 1);
  return result;
}

double brute_force_width(const EllipseSpec& e, std::span<const double> theta_star,
                         double eps, std::size_t k, std::size_t n_dirs) {
  BruteForceOptions options;
  options.n_dirs = n_dirs;
  return brute_force_width_detail(e, theta_star, eps, k, options).width;
}

bool bernstein_linf_extremal_feasible(const EllipseSpec& e, std::size_t s,
                                      double theta_star_s, std::size_t m,
                                      double delta) {
  if (s == 0 || s > e.dim()) throw_validation("bernstein_linf_extremal_feasible: s outside [1, d]");
  if (m < 2 || m > e.dim()) {
    throw_validation("bernstein_linf_extremal_feasible: m = " + std::to_string(m) +
                     " must lie in [2, d]");
  }
  if (!(delta >= 0.0)) throw_validation("bernstein_linf_extremal_feasible: delta must be >= 0");
  const double mu_s = e.axis(s);
  const double w = std::sqrt(mu_s) - std::abs(theta_star_s);
  if (w < 0.0) {
    throw_validation("bernstein_linf_extremal_feasible: theta*_s lies outside the ellipse");
  }
  const double lhs = 1.0 - 2.0 * w / std::sqrt(mu_s) + w * w / mu_s + delta * delta / e.axis(m);
  return lhs <= 1.0;
}

void write_width_csv(std::ostream& out, double eps, std::span<const WidthBounds> rows,
                     std::span<const double> brute) {
  out << "k,eps,lower,upper,method";
  if (!brute.empty()) out << ",brute";
  out << '\n';
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& r = rows[j];
    out << r.k << ',' << fmt_double(eps) << ',' << fmt_double(r.lower) << ','
        << fmt_double(r.upper) << ',' << to_string(r.method);
    if (!brute.empty()) out << ',' << fmt_double(brute[j]);
    out << '\n';
  }
}

}  // namespace lmtest
