#include <gtest/gtest.h>

#include <cmath>

#include "lmtest/critical.hpp"
#include "lmtest/errors.hpp"
#include "lmtest/widths.hpp"

using namespace lmtest;

namespace {

EllipseSpec circle(std::size_t d) { return EllipseSpec(Vector(d, double(d))); }

std::size_t scan_k_upper(const LocalizedEllipse& loc, double eps) {
  for (std::size_t k = 1; k <= loc.dim(); ++k) {
    if (loc.width_upper(eps, k) <= eps / std::sqrt(2.0)) return k;
  }
  return loc.dim();
}

std::size_t scan_k_lower(const LocalizedEllipse& loc, double eps, const LowerBoundConstants& c) {
  for (std::size_t k = 1; k <= loc.dim(); ++k) {
    if (loc.width_lower(c.a() * eps, k) <= 3.0 * c.b() * eps) return k;
  }
  return loc.dim();
}

}  // namespace

TEST(Constants, DefaultsAndInvariant) {
  const LowerBoundConstants c;
  EXPECT_NEAR(c.c(), 1.0 / (288.0 * std::sqrt(2.0)), 1e-17);
  EXPECT_DOUBLE_EQ(c.b(), 0.25);
  EXPECT_GT(c.a(), 3.0 * c.b());
  EXPECT_THROW(LowerBoundConstants(0.5, 0.25), ValidationError);
  EXPECT_THROW(LowerBoundConstants(0.99, 0.25), ValidationError);  // c <= 0
}

TEST(KUpper, CircleAndPolyExamples) {
  const auto c = circle(100);
  const Vector z(100, 0.0);
  EXPECT_EQ(k_upper(c, z, 0.5), 100u);
  EXPECT_EQ(k_upper(c, z, 9.9), 100u);

  const auto p = generate_poly(1000, 1.0);
  const Vector pz(1000, 0.0);
  EXPECT_EQ(k_upper(p, pz, 0.2), 7u);
  EXPECT_EQ(k_upper(p, pz, 5.0), 1u);
}

TEST(KUpper, MatchesLinearScan) {
  const auto e = generate_poly(200, 1.0);
  Vector axis(200, 0.0);
  axis[0] = 0.95;
  Vector general(200, 0.0);
  general[0] = 0.3;
  general[3] = 0.05;
  general[10] = 0.01;
  for (const Vector& t : {Vector(200, 0.0), axis, general}) {
    const LocalizedEllipse loc(e, t);
    for (int i = 0; i < 60; ++i) {
      const double eps = 1e-3 * std::pow(10.0, i / 20.0);
      EXPECT_EQ(k_upper(loc, eps), scan_k_upper(loc, eps)) << "eps=" << eps;
    }
  }
}

TEST(KLower, MatchesLinearScanAndExample) {
  const LowerBoundConstants c;
  const auto e = generate_poly(500, 1.0);
  const LocalizedEllipse zero(e, Vector(500, 0.0));
  // 3b eps = 0.15 and a eps > 0.15: smallest k with 1/(k+1) <= 0.15
  EXPECT_EQ(k_lower(zero, 0.2, c), 6u);
  Vector t(500, 0.0);
  t[1] = 0.2;
  t[4] = 0.05;
  const LocalizedEllipse loc(e, t);
  for (int i = 0; i < 60; ++i) {
    const double eps = 1e-3 * std::pow(10.0, i / 20.0);
    EXPECT_EQ(k_lower(zero, eps, c), scan_k_lower(zero, eps, c));
    EXPECT_EQ(k_lower(loc, eps, c), scan_k_lower(loc, eps, c));
  }
}

TEST(KBernstein, CircleAndPolyScan) {
  const auto c = circle(64);
  const LocalizedEllipse loc(c, Vector(64, 0.0));
  EXPECT_EQ(k_bernstein(loc, 1.0), 64u);
  EXPECT_EQ(k_bernstein(loc, 7.9), 64u);

  const auto e = generate_poly(300, 1.0);
  const LocalizedEllipse z(e, Vector(300, 0.0));
  for (double eps : {0.01, 0.05, 0.2, 0.7}) {
    // k h_k^2 is the harmonic mean of mu_1..mu_k
    std::size_t expect = 0;
    double inv = 0.0;
    for (std::size_t k = 1; k <= 300; ++k) {
      inv += 1.0 / e.axis(k);
      if (double(k) / inv >= eps * eps * (1.0 - 1e-12)) expect = k;
    }
    EXPECT_EQ(k_bernstein(z, eps), expect) << "eps=" << eps;
  }
}

TEST(SolveUpper, CircleClosedForm) {
  for (double sigma : {0.1, 0.01}) {
    const TestProblem p(circle(100), Vector(100, 0.0), sigma, 0.25);
    const auto s = solve_eps_upper(p);
    const double expect = 16.0 * sigma * sigma * 10.0;
    EXPECT_NEAR(s.eps * s.eps, expect, 1e-9 * expect);
    EXPECT_EQ(s.k, 100u);
    EXPECT_EQ(s.side, Side::Upper);
  }
}

TEST(SolveLower, CircleClosedFormAndRhoIndependence) {
  const double sigma = 0.1;
  const TestProblem p(circle(100), Vector(100, 0.0), sigma, 0.25);
  const TestProblem q(circle(100), Vector(100, 0.0), sigma, 0.1);
  const auto l = solve_eps_lower(p);
  EXPECT_NEAR(l.eps * l.eps, sigma * sigma * 10.0 / 4.0, 1e-9 * 0.025);
  EXPECT_EQ(solve_eps_lower(q).eps, l.eps);
  const auto b = solve_eps_bernstein(p);
  EXPECT_NEAR(b.eps * b.eps, sigma * sigma * 10.0 / 4.0, 1e-9 * 0.025);
}

TEST(SolveUpper, FixedPointAgainstEpsGrid) {
  const auto e = generate_poly(10000, 1.0);
  const double sigma = 1e-2;
  const double rho = 0.25;
  const TestProblem p(e, Vector(10000, 0.0), sigma, rho);
  const auto s = solve_eps_upper(p);
  const LocalizedEllipse loc(e, Vector(10000, 0.0));
  const double coef = 8.0 / std::sqrt(rho) * sigma * sigma;
  auto holds = [&](double eps) { return eps * eps >= coef * std::sqrt(double(k_upper(loc, eps))); };
  // smallest eps on a fine log grid that satisfies the defining inequality
  double first = 0.0;
  const std::size_t n = 1000000;
  const double lo = 1e-3, hi = 1.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double eps = lo * std::pow(hi / lo, double(i) / double(n));
    if (holds(eps)) {
      first = eps;
      break;
    }
  }
  ASSERT_GT(first, 0.0);
  EXPECT_TRUE(holds(s.eps));
  EXPECT_LE(s.eps, first);
  EXPECT_GE(s.eps, first * (1.0 - 1e-5));

  const auto rate = closed_form_rates({RateFamily::PolyZero, 1.0, 1.0, sigma, rho, {}, {}});
  const double ratio = s.eps * s.eps / rate.eps_sq;
  EXPECT_GT(ratio, 0.1);
  EXPECT_LT(ratio, 50.0);
}

TEST(SolveLower, SupFormHolds) {
  const auto e = generate_exp(400, 1.0);
  Vector t(400, 0.0);
  t[0] = 0.5;
  const LocalizedEllipse loc(e, t);
  const LowerBoundConstants c;
  for (double sigma : {1e-3, 1e-2, 5e-2}) {
    const auto l = solve_eps_lower(loc, sigma, c);
    const double coef = 0.25 * sigma * sigma;
    EXPECT_LE(l.eps * l.eps, coef * std::sqrt(double(k_lower(loc, l.eps, c))) * (1 + 1e-12));
    const double up = l.eps * (1.0 + 1e-6);
    EXPECT_GT(up * up, coef * std::sqrt(double(k_lower(loc, up, c))));
    EXPECT_LE(l.eps, solve_eps_upper(loc, sigma, 0.25).eps);
  }
}

TEST(SolveUpper, BracketFailureNamesResiduals) {
  // sigma so large that no eps in the bracket satisfies the inequality
  const TestProblem p(EllipseSpec(Vector{1e-6}), Vector{0.0}, 100.0, 0.25);
  try {
    solve_eps_upper(p);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos) << e.what();
  }
}

TEST(Phi, OneDimensionalClosedForm) {
  const EllipseSpec e(Vector{1.0});
  const Vector t{0.8};
  EXPECT_DOUBLE_EQ(phi(e, t, 0.8, 0.5), 1.0);
  for (double delta : {0.05, 0.2, 0.5, 0.7}) {
    const double a = 0.5;
    const double r = a * delta / (0.8 - a * delta);
    EXPECT_NEAR(phi(e, t, delta, a), std::min(1.0, r), 1e-12);
  }
  EXPECT_DOUBLE_EQ(phi(e, Vector{0.0}, 0.3, 0.5), 1.0);
}

TEST(PhiInverse, OneDimensionalClosedForm) {
  const EllipseSpec e(Vector{2.0});
  const Vector t{1.2};
  const double a = 0.5;
  for (double x : {0.01, 0.1, 0.5, 0.9}) {
    const double expect = t[0] * x / (a * (x + 2.0));
    EXPECT_NEAR(phi_inverse(e, t, x, a), expect, 1e-9 * expect);
    EXPECT_LE(phi(e, t, phi_inverse(e, t, x, a), a), x + 1e-9);
  }
  EXPECT_TRUE(std::isinf(phi_inverse(e, t, 1.0, a)));
  EXPECT_EQ(phi_inverse(e, Vector{0.0}, 0.5, a), 0.0);
  EXPECT_THROW(phi_inverse(e, t, -0.1, a), ValidationError);
}

TEST(PhiInverse, GeneralizedInverseOnPoly) {
  const auto e = generate_poly(50, 1.0);
  Vector t(50, 0.0);
  t[0] = 0.6;
  t[2] = 0.1;
  t[7] = 0.02;
  const double a = LowerBoundConstants().a();
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double delta = 1e-4 * std::pow(1e4, i / 100.0);
    const double v = phi(e, t, delta, a);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
    if (v < 1.0) {
      EXPECT_GE(phi_inverse(e, t, v, a), delta * (1.0 - 1e-9));
    }
  }
  for (double x : {1e-4, 1e-2, 0.3, 0.99}) {
    const double d = phi_inverse(e, t, x, a);
    EXPECT_LE(phi(e, t, d, a), x + 1e-9);
  }
}

TEST(IndistinguishableRadius, InteriorThetaUsesLowerRadius) {
  const auto e = generate_poly(300, 1.0);
  Vector t(300, 0.0);
  t[0] = 0.4;
  const TestProblem p(e, t, 0.01, 0.25);
  const LowerBoundConstants c;
  EXPECT_NEAR(theorem2_radius(p), c.c() * solve_eps_lower(p).eps, 1e-18);

  Vector b(300, 0.0);
  b[0] = 0.9;
  const TestProblem q(e, b, 0.01, 0.25);
  const double x = std::pow(1.0 / 0.9 - 1.0, 2.0);
  const double expect =
      c.c() * std::min(solve_eps_lower(q).eps, phi_inverse(e, b, x, c.a()));
  EXPECT_NEAR(theorem2_radius(q), expect, 1e-15);
}

TEST(MZero, Examples) {
  const auto e = generate_poly(100, 1.0);
  const auto m = m_zero(e, 0.2);
  EXPECT_EQ(m.m_u, 7u);
  EXPECT_EQ(m.m_l, 5u);
  EXPECT_THROW(m_zero(e, 1.0), ValidationError);
  EXPECT_THROW(m_zero(e, 0.0), ValidationError);
  EXPECT_EQ(m_zero(circle(10), 1.0).m_u, 10u);
}

TEST(MExtremal, ExamplesAndOrdering) {
  const auto e = generate_poly(100, 1.0);
  const auto m = m_extremal(e, 0.1, 1);
  EXPECT_EQ(m.m_u, 8u);
  EXPECT_EQ(m.m_l, 3u);
  for (double delta : {0.01, 0.05, 0.3, 0.9}) {
    for (std::size_t s : {1u, 2u, 3u}) {
      if (delta >= e.axis(1) / std::sqrt(e.axis(s))) continue;
      const auto q = m_extremal(e, delta, s);
      EXPECT_GE(q.m_u, q.m_l);
    }
  }
  EXPECT_THROW(m_extremal(e, 1.0, 1), ValidationError);
}

TEST(TStar, PolyClosedForms) {
  const auto e = generate_poly(100000, 1.0);
  const auto t = t_star(e, 1, 1e-2, 0.25);
  ASSERT_TRUE(t.t_u_closed && t.t_l_closed && t.t_u_relaxed && t.t_l_relaxed);
  EXPECT_NEAR(*t.t_l_closed, std::pow(0.25e-4, 4.0 / 9.0), 1e-15);
  EXPECT_NEAR(*t.t_u_closed, std::pow(std::pow(8.0, 1.25) * 2.0 * 1e-4, 4.0 / 9.0), 1e-14);
  EXPECT_NEAR(*t.t_l_closed, 9.0082e-3, 1e-7);
  EXPECT_NEAR(*t.t_u_closed, 7.2066e-2, 1e-6);
  EXPECT_NEAR(*t.t_u_relaxed, *t.t_u_closed, 1e-6 * *t.t_u_closed);
  EXPECT_NEAR(*t.t_l_relaxed, *t.t_l_closed, 1e-6 * *t.t_l_closed);
  EXPECT_LE(t.t_l, t.t_u);
  // the integer fixed point sits within one step of m of the relaxed one
  EXPECT_NEAR(t.t_u / *t.t_u_closed, 1.0, 0.05);
}

TEST(TStar, PreconditionViolation) {
  const auto e = generate_poly(1000, 1.0);
  try {
    t_star(e, 200, 0.05, 0.25);
    FAIL() << "expected NumericError";
  } catch (const NumericError& err) {
    EXPECT_NE(std::string(err.what()).find("sqrt(mu_s)"), std::string::npos) << err.what();
  }
}

TEST(Rates, Exponents) {
  EXPECT_DOUBLE_EQ(closed_form_rates({RateFamily::PolyZero, 1.0, 1.0, 0.1, 0.25, {}, {}}).exponent,
                   0.8);
  EXPECT_NEAR(
      closed_form_rates({RateFamily::PolyExtremal, 1.0, 1.0, 0.1, 0.25, 1.0, {}}).exponent,
      8.0 / 9.0, 1e-15);
  EXPECT_NEAR(
      closed_form_rates({RateFamily::PolyExtremal, 1.0, 1.0, 0.1, 0.25, {}, 0.2}).exponent,
      2.0 * 3.8 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(closed_form_rates({RateFamily::ExpZero, 1.0, 1.0, 0.1, 0.25, {}, {}}).exponent,
                   1.0);
  EXPECT_THROW(parse_rate_family("poly-banana"), ValidationError);
  EXPECT_EQ(parse_rate_family("poly-extremal"), RateFamily::PolyExtremal);
}
