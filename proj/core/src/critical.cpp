#include "lmtest/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmtest/errors.hpp"

namespace lmtest {

using detail::fmt_double;
using detail::throw_numeric;
using detail::throw_validation;

std::string_view to_string(Side side) {
  switch (side) {
    case Side::Upper: return "upper";
    case Side::Lower: return "lower";
    case Side::Bernstein: return "bernstein";
  }
  return "unknown";
}

LowerBoundConstants::LowerBoundConstants()
    : LowerBoundConstants(std::sqrt(97.0) / 12.0, 0.25) {}

LowerBoundConstants::LowerBoundConstants(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0)) {
    throw_validation("LowerBoundConstants: a and b must lie in (0, 1)");
  }
  if (!(a > 3.0 * b)) {
    throw_validation("LowerBoundConstants: need a > 3b, got a = " + fmt_double(a) +
                     ", b = " + fmt_double(b));
  }
  c_ = b / (8.0 * std::sqrt(2.0)) - std::sqrt(a * a - 9.0 * b * b) / (12.0 * std::sqrt(2.0));
  if (!(c_ > 0.0)) {
    throw_validation("LowerBoundConstants: c = " + fmt_double(c_) + " must be positive");
  }
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_eps(double eps, const char* op) {
  if (!std::isfinite(eps) || !(eps > 0.0)) {
    throw_validation(std::string(op) + ": eps must be positive and finite, got " +
                     fmt_double(eps));
  }
}

void check_sigma(double sigma, const char* op) {
  if (!std::isfinite(sigma) || !(sigma > 0.0)) {
    throw_validation(std::string(op) + ": sigma must be positive, got " + fmt_double(sigma));
  }
}

// Smallest k in [lo, hi] with pred(k) true, for pred monotone false -> true;
// hi + 1 when none.
template <typename Pred>
std::size_t first_true(std::size_t lo, std::size_t hi, Pred pred) {
  std::size_t a = lo;
  std::size_t b = hi + 1;
  while (a < b) {
    const std::size_t mid = a + (b - a) / 2;
    if (pred(mid)) {
      b = mid;
    } else {
      a = mid + 1;
    }
  }
  return a;
}

// Shrinks [lo, hi] around the switch point of a predicate that is false at lo
// and true at hi.
template <typename Pred>
void bisect_switch(double& lo, double& hi, Pred pred) {
  for (int it = 0; it < 400; ++it) {
    if (hi - lo <= 1e-15 * hi) break;
    const double mid = hi > 4.0 * lo && lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? hi : lo) = mid;
  }
}

struct FixedPoint {
  double lo;
  double hi;
  double value;
};

// inf{x : x^2 >= coef * sqrt(m(x))} for m non-increasing in x.
template <typename M>
FixedPoint solve_inf_form(double coef, M m, double lo, double hi, const char* op) {
  auto holds = [&](double x) { return x * x >= coef * std::sqrt(static_cast<double>(m(x))); };
  if (holds(lo)) return {lo, lo, lo};
  if (!holds(hi)) {
    auto resid = [&](double x) {
      return x - coef * std::sqrt(static_cast<double>(m(x))) / x;
    };
    throw_numeric(std::string(op) + ": bracket failure on [" + fmt_double(lo) + ", " +
                  fmt_double(hi) + "], residuals " + fmt_double(resid(lo)) + " and " +
                  fmt_double(resid(hi)) +
                  " (the inequality is not met inside the bracket; d may be too small "
                  "for the noise level)");
  }
  bisect_switch(lo, hi, holds);
  return {lo, hi, hi};
}

// sup{x : x^2 <= coef * sqrt(m(x))} for m non-increasing in x.
template <typename M>
FixedPoint solve_sup_form(double coef, M m, double lo, double hi, const char* op) {
  auto holds = [&](double x) { return x * x <= coef * std::sqrt(static_cast<double>(m(x))); };
  if (holds(hi)) return {hi, hi, hi};
  if (!holds(lo)) {
    auto resid = [&](double x) {
      return x - coef * std::sqrt(static_cast<double>(m(x))) / x;
    };
    throw_numeric(std::string(op) + ": bracket failure on [" + fmt_double(lo) + ", " +
                  fmt_double(hi) + "], residuals " + fmt_double(resid(lo)) + " and " +
                  fmt_double(resid(hi)));
  }
  bisect_switch(lo, hi, [&](double x) { return !holds(x); });
  return {lo, hi, lo};
}

}  // namespace

std::size_t k_upper(const LocalizedEllipse& local, double eps) {
  check_eps(eps, "k_upper");
  const std::size_t d = local.dim();
  const double target = eps / std::sqrt(2.0);
  const auto& e = local.ellipse();
  if (local.shape() == LocalizedEllipse::Shape::Zero) {
    return std::min(d, first_true(1, d, [&](std::size_t k) {
      return e.axis(k + 1) <= 0.5 * eps * eps;
    }));
  }
  auto ok = [&](std::size_t k) { return local.width_upper(eps, k) <= target; };
  // The bound is monotone on each side of the support index of an axis-aligned
  // theta*; search the two pieces separately.
  if (local.shape() == LocalizedEllipse::Shape::Axis && local.axis_index() > 1) {
    const std::size_t s = local.axis_index();
    const std::size_t k1 = first_true(1, s - 1, ok);
    if (k1 <= s - 1) return k1;
    return std::min(d, first_true(s, d, ok));
  }
  return std::min(d, first_true(1, d, ok));
}

std::size_t k_upper(const EllipseSpec& e, std::span<const double> theta_star, double eps) {
  return k_upper(LocalizedEllipse(e, Vector(theta_star.begin(), theta_star.end())), eps);
}

std::size_t k_lower(const LocalizedEllipse& local, double eps,
                    const LowerBoundConstants& consts) {
  check_eps(eps, "k_lower");
  const std::size_t d = local.dim();
  const double radius = consts.a() * eps;
  const double target = 3.0 * consts.b() * eps;
  return std::min(d, first_true(1, d, [&](std::size_t k) {
    return local.width_lower(radius, k) <= target;
  }));
}

std::size_t k_lower(const EllipseSpec& e, std::span<const double> theta_star, double eps,
                    const LowerBoundConstants& consts) {
  return k_lower(LocalizedEllipse(e, Vector(theta_star.begin(), theta_star.end())), eps,
                 consts);
}

std::size_t k_bernstein(const LocalizedEllipse& local, double eps) {
  check_eps(eps, "k_bernstein");
  for (std::size_t k = local.dim(); k >= 1; --k) {
    const double h = local.cube_halfside(k);
    if (static_cast<double>(k) * h * h >= eps * eps) return k;
  }
  return 0;
}

CriticalSolution solve_eps_upper(const LocalizedEllipse& local, double sigma, double rho) {
  check_sigma(sigma, "solve_eps_upper");
  if (!(rho > 0.0 && rho <= 0.5)) throw_validation("solve_eps_upper: rho must lie in (0, 1/2]");
  const double coef = 8.0 / std::sqrt(rho) * sigma * sigma;
  auto k_of = [&](double x) { return k_upper(local, x); };
  const auto fp = solve_inf_form(coef, k_of, kBracketFloor, local.diameter_bound(),
                                 "solve_eps_upper");
  const std::size_t k = k_of(fp.value);
  return {fp.value, k, Side::Upper, fp.lo, fp.hi,
          fp.value - coef * std::sqrt(static_cast<double>(k)) / fp.value};
}

CriticalSolution solve_eps_upper(const TestProblem& problem) {
  const LocalizedEllipse local(problem.ellipse(),
                               Vector(problem.theta_star().begin(), problem.theta_star().end()));
  return solve_eps_upper(local, problem.sigma(), problem.rho());
}

CriticalSolution solve_eps_lower(const LocalizedEllipse& local, double sigma,
                                 const LowerBoundConstants& consts) {
  check_sigma(sigma, "solve_eps_lower");
  const double coef = 0.25 * sigma * sigma;
  auto k_of = [&](double x) { return k_lower(local, x, consts); };
  const auto fp = solve_sup_form(coef, k_of, kBracketFloor, local.diameter_bound(),
                                 "solve_eps_lower");
  const std::size_t k = k_of(fp.value);
  return {fp.value, k, Side::Lower, fp.lo, fp.hi,
          fp.value - coef * std::sqrt(static_cast<double>(k)) / fp.value};
}

CriticalSolution solve_eps_lower(const TestProblem& problem, const LowerBoundConstants& consts) {
  const LocalizedEllipse local(problem.ellipse(),
                               Vector(problem.theta_star().begin(), problem.theta_star().end()));
  return solve_eps_lower(local, problem.sigma(), consts);
}

CriticalSolution solve_eps_bernstein(const LocalizedEllipse& local, double sigma) {
  check_sigma(sigma, "solve_eps_bernstein");
  const double coef = 0.25 * sigma * sigma;
  const std::size_t d = local.dim();
  // g_k = k h_k^2 does not depend on eps; k_B(eps) = max{k : g_k >= eps^2}.
  Vector suffix_max(d + 2, 0.0);
  for (std::size_t k = d; k >= 1; --k) {
    const double h = local.cube_halfside(k);
    suffix_max[k] = std::max(suffix_max[k + 1], static_cast<double>(k) * h * h);
  }
  auto k_of = [&](double x) -> std::size_t {
    const double x2 = x * x;
    if (suffix_max[1] < x2) return 0;
    // Largest k with g_k >= x2: the last index where the suffix maximum still
    // reaches x2.
    std::size_t lo = 1;
    std::size_t hi = d;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo + 1) / 2;
      if (suffix_max[mid] >= x2) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    return lo;
  };
  const auto fp = solve_sup_form(coef, k_of, kBracketFloor, local.diameter_bound(),
                                 "solve_eps_bernstein");
  const std::size_t k = k_of(fp.value);
  return {fp.value, k, Side::Bernstein, fp.lo, fp.hi,
          fp.value - coef * std::sqrt(static_cast<double>(k)) / fp.value};
}

CriticalSolution solve_eps_bernstein(const TestProblem& problem) {
  const LocalizedEllipse local(problem.ellipse(),
                               Vector(problem.theta_star().begin(), problem.theta_star().end()));
  return solve_eps_bernstein(local, problem.sigma());
}

// ---------------------------------------------------------------------------

double phi_psi(const EllipseSpec& e, std::span<const double> theta_star, double r) {
  if (theta_star.size() != e.dim()) throw_validation("phi: dimension mismatch");
  const auto mu = e.mu();
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double q = r / (r + mu[i]) * theta_star[i];
    s += q * q;
  }
  return s;
}

namespace {

void check_a(double a, const char* op) {
  if (!(a > 0.0 && a < 1.0)) {
    throw_validation(std::string(op) + ": a must lie in (0, 1), got " + fmt_double(a));
  }
}

// (mu_i, theta*_i^2) over the support of theta*; psi ignores the rest.
struct PsiTerms {
  Vector mu;
  Vector t2;
  double norm2 = 0.0;

  PsiTerms(const EllipseSpec& e, std::span<const double> theta_star) {
    const auto m = e.mu();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (theta_star[i] == 0.0) continue;
      mu.push_back(m[i]);
      t2.push_back(theta_star[i] * theta_star[i]);
    }
    norm2 = l2_norm(theta_star);
  }

  double psi(double r) const {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double q = r / (r + mu[i]);
      s += q * q * t2[i];
    }
    return s;
  }
};

double phi_unchecked(const PsiTerms& p, double delta, double a) {
  if (p.norm2 == 0.0 || delta >= p.norm2 / a) return 1.0;
  const double target = a * a * delta * delta;
  if (target <= 0.0) return 0.0;
  if (p.psi(1.0) < target) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (p.psi(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

double phi(const EllipseSpec& e, std::span<const double> theta_star, double delta, double a) {
  check_a(a, "phi");
  if (!(delta > 0.0)) throw_validation("phi: delta must be positive, got " + fmt_double(delta));
  if (theta_star.size() != e.dim()) throw_validation("phi: dimension mismatch");
  return phi_unchecked(PsiTerms(e, theta_star), delta, a);
}

double phi_inverse(const EllipseSpec& e, std::span<const double> theta_star, double x,
                   double a) {
  check_a(a, "phi_inverse");
  if (std::isnan(x) || x < 0.0) {
    throw_validation("phi_inverse: x must be >= 0, got " + fmt_double(x));
  }
  if (theta_star.size() != e.dim()) throw_validation("phi_inverse: dimension mismatch");
  if (x >= 1.0) return kInf;
  const PsiTerms p(e, theta_star);
  if (p.norm2 == 0.0) return 0.0;
  double lo = 0.0;
  double hi = p.norm2 / a;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi_unchecked(p, mid, a) <= x ? lo : hi) = mid;
  }
  return lo;
}

double theorem2_radius(const TestProblem& problem, const LowerBoundConstants& consts) {
  const double eps_l = solve_eps_lower(problem, consts).eps;
  const double n = ellipse_norm(problem.ellipse(), problem.theta_star());
  double phi_term = kInf;
  if (n > 0.0) {
    const double x = (1.0 / n - 1.0) * (1.0 / n - 1.0);
    phi_term = phi_inverse(problem.ellipse(), problem.theta_star(), x, consts.a());
  }
  return consts.c() * std::min(eps_l, phi_term);
}

// ---------------------------------------------------------------------------

namespace {

// Largest k in [1, d] with pred(k), for pred monotone true -> false; 0 when none.
template <typename Pred>
std::size_t last_true(std::size_t d, Pred pred) {
  const std::size_t first_false = first_true(1, d, [&](std::size_t k) { return !pred(k); });
  return first_false - 1;
}

}  // namespace

MPair m_zero(const EllipseSpec& e, double delta) {
  const double bound = std::min(std::sqrt(2.0 * e.axis(1)),
                                4.0 / 3.0 * std::sqrt(e.dim() >= 2 ? e.axis(2) : 0.0));
  if (!(delta > 0.0 && delta < bound)) {
    throw_validation("m_zero: delta = " + fmt_double(delta) + " outside (0, " +
                     fmt_double(bound) + ")");
  }
  const std::size_t d = e.dim();
  const double d2 = delta * delta;
  return {last_true(d, [&](std::size_t k) { return e.axis(k) >= 0.5 * d2; }),
          last_true(d, [&](std::size_t k) { return e.axis(k + 1) >= 9.0 * d2 / 16.0; })};
}

MPair m_extremal(const EllipseSpec& e, double delta, std::size_t s) {
  if (s == 0 || s > e.dim()) throw_validation("m_extremal: s outside [1, d]");
  const double mu_s = e.axis(s);
  const double bound = e.axis(1) / std::sqrt(mu_s);
  if (!(delta > 0.0 && delta < bound)) {
    throw_validation("m_extremal: delta = " + fmt_double(delta) + " outside (0, " +
                     fmt_double(bound) + ")");
  }
  const std::size_t d = e.dim();
  const double rhs = delta * delta * mu_s;
  return {last_true(d, [&](std::size_t k) { return e.axis(k) * e.axis(k) >= rhs / 64.0; }),
          last_true(d, [&](std::size_t k) { return e.axis(k) * e.axis(k) >= rhs; })};
}

TStar t_star(const EllipseSpec& e, std::size_t s, double sigma, double rho) {
  check_sigma(sigma, "t_star");
  if (!(rho > 0.0 && rho <= 0.5)) throw_validation("t_star: rho must lie in (0, 1/2]");
  if (s == 0 || s > e.dim()) throw_validation("t_star: s outside [1, d]");
  const double mu_s = e.axis(s);
  const double sqrt_mu_s = std::sqrt(mu_s);
  const double dom_hi = e.axis(1) / sqrt_mu_s * (1.0 - 1e-12);
  const double s2 = sigma * sigma;
  const double coef_u = 8.0 / std::sqrt(rho) * s2;
  const double coef_l = 0.25 * s2;

  TStar out;
  auto mu_of = [&](double x) { return m_extremal(e, x, s).m_u; };
  auto ml_of = [&](double x) { return m_extremal(e, x, s).m_l; };
  FixedPoint fu{};
  try {
    fu = solve_inf_form(coef_u, mu_of, kBracketFloor, dom_hi, "t_star");
  } catch (const NumericError&) {
    throw_numeric("t_star: precondition t*_u <= sqrt(mu_s) violated: no fixed point below " +
                  fmt_double(dom_hi) + ", sqrt(mu_s) = " + fmt_double(sqrt_mu_s));
  }
  out.t_u = fu.value;
  if (out.t_u > sqrt_mu_s) {
    throw_numeric("t_star: precondition t*_u <= sqrt(mu_s) violated: t*_u = " +
                  fmt_double(out.t_u) + ", sqrt(mu_s) = " + fmt_double(sqrt_mu_s));
  }
  const auto fl = solve_sup_form(coef_l, ml_of, kBracketFloor, dom_hi, "t_star");
  out.t_l = fl.value;
  out.m_u = mu_of(out.t_u);
  out.m_l = ml_of(out.t_l);

  if (e.family() == Family::Poly) {
    const double alpha = e.params().alpha;
    const double c1 = e.params().c1;
    const double sd = static_cast<double>(s);
    const double dd = static_cast<double>(e.dim());
    const double scale_u = std::pow(64.0 * c1 * std::pow(sd, 2.0 * alpha), 1.0 / (4.0 * alpha));
    const double scale_l = std::pow(c1 * std::pow(sd, 2.0 * alpha), 1.0 / (4.0 * alpha));
    const double expo = 4.0 * alpha / (8.0 * alpha + 1.0);
    out.t_u_closed = std::pow(std::pow(8.0, (4.0 * alpha + 1.0) / (4.0 * alpha)) *
                                  std::pow(c1, 1.0 / (8.0 * alpha)) / std::sqrt(rho) *
                                  std::pow(sd, 0.25) * s2,
                              expo);
    out.t_l_closed = std::pow(0.25 * std::pow(c1, 1.0 / (8.0 * alpha)) * std::pow(sd, 0.25) * s2,
                              expo);
    auto relaxed = [&](double scale) {
      return [=](double x) { return std::min(dd, scale * std::pow(x, -0.5 / alpha)); };
    };
    auto solve_relaxed = [&](double coef, double scale) {
      const auto m = relaxed(scale);
      double lo = kBracketFloor;
      double hi = dom_hi;
      auto holds = [&](double x) { return x * x >= coef * std::sqrt(m(x)); };
      if (holds(lo) || !holds(hi)) return std::optional<double>{};
      bisect_switch(lo, hi, holds);
      return std::optional<double>{hi};
    };
    out.t_u_relaxed = solve_relaxed(coef_u, scale_u);
    out.t_l_relaxed = solve_relaxed(coef_l, scale_l);
    auto agrees = [&](const std::optional<double>& relaxed_value, double closed, double scale) {
      if (!relaxed_value) return true;
      // The closed form ignores the truncation at d; skip the check when it binds.
      if (scale * std::pow(*relaxed_value, -0.5 / alpha) >= dd) return true;
      return std::abs(*relaxed_value - closed) <= 1e-6 * closed;
    };
    if (!agrees(out.t_u_relaxed, *out.t_u_closed, scale_u) ||
        !agrees(out.t_l_relaxed, *out.t_l_closed, scale_l)) {
      throw_numeric("t_star: closed-form and bisection fixed points disagree beyond 1e-6");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(RateFamily family) {
  switch (family) {
    case RateFamily::PolyZero: return "poly-zero";
    case RateFamily::ExpZero: return "exp-zero";
    case RateFamily::PolyExtremal: return "poly-extremal";
  }
  return "unknown";
}

RateFamily parse_rate_family(std::string_view name) {
  if (name == "poly-zero") return RateFamily::PolyZero;
  if (name == "exp-zero") return RateFamily::ExpZero;
  if (name == "poly-extremal") return RateFamily::PolyExtremal;
  throw_validation("closed_form_rates: unknown family '" + std::string(name) +
                   "' (expected poly-zero, exp-zero or poly-extremal)");
}

RatePrediction closed_form_rates(const RateQuery& q) {
  check_sigma(q.sigma, "closed_form_rates");
  const double s2 = q.sigma * q.sigma;
  RatePrediction out;
  switch (q.family) {
    case RateFamily::PolyZero: {
      if (!(q.alpha > 0.5)) throw_validation("closed_form_rates: alpha must exceed 1/2");
      out.exponent = 4.0 * q.alpha / (4.0 * q.alpha + 1.0);
      out.eps_sq = std::pow(s2, out.exponent);
      out.k_scale = std::pow(s2, -2.0 / (4.0 * q.alpha + 1.0));
      return out;
    }
    case RateFamily::ExpZero: {
      if (!(q.gamma > 0.0)) throw_validation("closed_form_rates: gamma must be positive");
      if (!(s2 < 1.0)) throw_validation("closed_form_rates: exp-zero needs sigma < 1");
      const double lg = std::log(1.0 / s2);
      out.exponent = 1.0;
      out.eps_sq = s2 * std::pow(lg, 1.0 / (2.0 * q.gamma));
      out.k_scale = std::pow(lg, 1.0 / q.gamma);
      return out;
    }
    case RateFamily::PolyExtremal: {
      if (!(q.alpha > 0.5)) throw_validation("closed_form_rates: alpha must exceed 1/2");
      if (q.s && q.beta) throw_validation("closed_form_rates: give either s or beta, not both");
      const double a = q.alpha;
      double s = 1.0;
      out.exponent = 8.0 * a / (1.0 + 8.0 * a);
      if (q.beta) {
        s = std::pow(s2, -*q.beta);
        out.exponent = 2.0 * a * (4.0 - *q.beta) / (1.0 + 8.0 * a);
      } else if (q.s) {
        s = *q.s;
      }
      if (!(s >= 1.0)) throw_validation("closed_form_rates: s must be >= 1");
      out.eps_sq = std::pow(s2 * std::pow(s, 0.25), 8.0 * a / (1.0 + 8.0 * a));
      out.k_scale = std::pow(std::pow(s, 2.0 * a) / s2, 2.0 / (8.0 * a + 1.0));
      return out;
    }
  }
  throw_validation("closed_form_rates: unknown family");
}

}  // namespace lmtest
