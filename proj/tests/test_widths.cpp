#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lmtest/errors.hpp"
#include "lmtest/rng.hpp"
#include "lmtest/widths.hpp"

using namespace lmtest;

namespace {

// max theta_{m+1}^2 over the slice through axis s and axis m+1, by a dense
// scan of the new theta_s value.
double tail_grid(const EllipseSpec& e, double t, std::size_t s, double eps, std::size_t m) {
  const double mu_s = e.axis(s), mu_t = e.axis(m + 1);
  const std::size_t n = 2000000;
  double best = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = t - eps + 2.0 * eps * double(i) / double(n);
    const double ball = eps * eps - (x - t) * (x - t);
    const double ell = mu_t * (1.0 - x * x / mu_s);
    best = std::max(best, std::min(ball, ell));
  }
  return std::sqrt(best);
}

Vector random_theta(const EllipseSpec& e, std::uint64_t seed, double enorm) {
  StreamCursor c(Substream(seed, 0, StreamPurpose::Instances));
  Vector t(e.dim());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = c.gaussian() * std::sqrt(e.axis(i + 1));
  const double n = ellipse_norm(e, t);
  for (double& v : t) v *= enorm / n;
  return t;
}

}  // namespace

TEST(CenteredWidth, ExactFormula) {
  const auto e = generate_poly(8, 1.0);
  for (std::size_t k = 0; k <= 8; ++k) {
    for (double eps : {0.05, 0.2, 1.5}) {
      const auto w = width_exact_centered(e, eps, k);
      const double expect = std::min(eps, std::sqrt(e.axis(k + 1)));
      EXPECT_DOUBLE_EQ(w.lower, expect);
      EXPECT_DOUBLE_EQ(w.upper, expect);
      EXPECT_DOUBLE_EQ(width_upper_zero(e, eps, k), expect);
    }
  }
  EXPECT_DOUBLE_EQ(width_exact_centered(e, 0.3, 8).upper, 0.0);
  EXPECT_DOUBLE_EQ(bernstein_l2_centered(e, 2), 1.0 / 3.0);
}

TEST(ExtremalWidth, MatchesGridOracle) {
  const auto e = generate_poly(40, 1.0);
  struct Case {
    double t;
    std::size_t s, m;
    double eps;
  };
  for (const Case c : {Case{0.9, 1, 3, 0.3}, Case{0.95, 1, 5, 0.1}, Case{0.5, 1, 2, 0.05},
                       Case{0.2, 2, 4, 0.25}, Case{0.99, 1, 10, 0.02}, Case{0.999, 1, 1, 0.5}}) {
    const double oracle = tail_grid(e, c.t, c.s, c.eps, c.m);
    const auto w = extremal_tail_width(e, c.t, c.s, c.eps, c.m);
    EXPECT_NEAR(w.value, oracle, 2e-6 * c.eps) << "t=" << c.t << " m=" << c.m << " eps=" << c.eps;
  }
}

TEST(ExtremalWidth, BranchSelection) {
  const auto e = generate_poly(10, 1.0);
  // tiny eps: the ellipse constraint is slack
  EXPECT_EQ(extremal_tail_width(e, 0.5, 1, 1e-3, 2).branch, ExtremalBranch::BallOnly);
  EXPECT_DOUBLE_EQ(extremal_tail_width(e, 0.5, 1, 1e-3, 2).value, 1e-3);
  // huge eps at theta* = 0 on the axis: the tail reaches sqrt(mu_{m+1})
  const auto big = extremal_tail_width(e, 0.0, 1, 5.0, 2);
  EXPECT_EQ(big.branch, ExtremalBranch::EllipseOnly);
  EXPECT_NEAR(big.value, std::sqrt(e.axis(3)), 1e-15);
  EXPECT_EQ(extremal_tail_width(e, 0.9, 1, 0.2, 10).branch, ExtremalBranch::FullProjection);
  EXPECT_DOUBLE_EQ(extremal_tail_width(e, 0.9, 1, 0.2, 10).value, 0.0);
}

TEST(ExtremalWidth, ClosedFormContract) {
  const auto e = generate_poly(10, 1.0);
  const auto w = width_upper_extremal(e, 0.9, 1, 0.3, 3);
  EXPECT_EQ(w.branch, ExtremalBranch::TwoConstraint);
  EXPECT_NEAR(w.value, tail_grid(e, 0.9, 1, 0.3, 3), 1e-6);
  EXPECT_THROW(width_upper_extremal(e, 0.9, 2, 0.3, 1), ValidationError);
  EXPECT_EQ(width_upper_extremal(e, 0.9, 1, 0.3, 10).branch, ExtremalBranch::FullProjection);
}

TEST(DualBound, ReducesToCenteredFormula) {
  const auto e = generate_exp(7, 1.0);
  const Vector zero(7, 0.0);
  for (std::size_t k = 0; k < 7; ++k) {
    for (double eps : {0.01, 0.2, 0.8}) {
      const double expect = std::min(eps, std::sqrt(e.axis(k + 1)));
      EXPECT_NEAR(coordinate_tail_dual_bound(e, zero, eps, k), expect, 1e-7 * expect);
    }
  }
}

TEST(DualBound, BetweenAxisExactAndClosedForm) {
  const auto e = generate_poly(12, 1.0);
  Vector t(12, 0.0);
  t[0] = 0.9;
  for (std::size_t m = 1; m < 12; ++m) {
    for (double eps : {0.02, 0.1, 0.4}) {
      const double exact = extremal_tail_width(e, 0.9, 1, eps, m).value;
      const double dual = coordinate_tail_dual_bound(e, t, eps, m);
      EXPECT_GE(dual, exact * (1.0 - 1e-7));
      EXPECT_LE(dual, exact * (1.0 + 1e-4) + 1e-12) << "m=" << m << " eps=" << eps;
    }
  }
}

TEST(LocalizedEllipse, ShapesAndCaches) {
  const auto e = generate_poly(6, 1.0);
  EXPECT_EQ(LocalizedEllipse(e, Vector(6, 0.0)).shape(), LocalizedEllipse::Shape::Zero);
  Vector a(6, 0.0);
  a[2] = 0.1;
  const LocalizedEllipse la(e, a);
  EXPECT_EQ(la.shape(), LocalizedEllipse::Shape::Axis);
  EXPECT_EQ(la.axis_index(), 3u);
  EXPECT_NEAR(la.enorm(), 0.3, 1e-15);
  a[0] = 0.2;
  EXPECT_EQ(LocalizedEllipse(e, a).shape(), LocalizedEllipse::Shape::General);
  Vector out(6, 0.0);
  out[0] = 1.1;
  EXPECT_THROW(LocalizedEllipse(e, out), ValidationError);
}

TEST(LocalizedEllipse, UpperMonotoneAndAboveLower) {
  const auto e = generate_poly(30, 1.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LocalizedEllipse loc(e, random_theta(e, seed, 0.6));
    for (double eps : {0.01, 0.1, 0.5}) {
      double prev = loc.width_upper(eps, 0);
      for (std::size_t k = 1; k <= 30; ++k) {
        const double u = loc.width_upper(eps, k);
        EXPECT_LE(u, prev + 1e-15);
        EXPECT_LE(loc.width_lower(eps, k), u + 1e-15);
        prev = u;
      }
      EXPECT_DOUBLE_EQ(loc.width_upper(eps, 30), 0.0);
    }
  }
}

TEST(LocalizedEllipse, InscribedBallAndCubeFit) {
  const auto e = generate_poly(9, 1.0);
  const LocalizedEllipse zero(e, Vector(9, 0.0));
  for (std::size_t k = 0; k < 9; ++k) EXPECT_NEAR(zero.ball_radius(k), std::sqrt(e.axis(k + 1)), 1e-15);

  const Vector t = random_theta(e, 3, 0.7);
  const LocalizedEllipse loc(e, t);
  for (std::size_t k = 1; k <= 9; ++k) {
    const double h = loc.cube_halfside(k);
    const auto coords = loc.cube_coords(k);
    ASSERT_EQ(coords.size(), k);
    // worst corner: each sign agrees with theta*
    auto corner = [&](double hh) {
      Vector v = t;
      for (std::size_t j : coords) v[j - 1] += (t[j - 1] >= 0.0 ? hh : -hh);
      return ellipse_norm_sq(e, v);
    };
    EXPECT_NEAR(corner(h), 1.0, 1e-9);
    EXPECT_GT(corner(h * 1.001), 1.0);

    const double r = loc.ball_radius(k - 1);
    Vector v = t;
    // the ball of radius r in the span of the first k cube coordinates fits:
    // check along each coordinate direction, both signs
    for (std::size_t j : coords) {
      for (double sgn : {-1.0, 1.0}) {
        v = t;
        v[j - 1] += sgn * r;
        EXPECT_LE(ellipse_norm_sq(e, v), 1.0 + 1e-9);
      }
    }
  }
}

TEST(GenericBounds, SandwichBruteForce) {
  const auto e = generate_poly(5, 1.0);
  const Vector t = random_theta(e, 17, 0.5);
  BruteForceOptions opt;
  opt.n_dirs = 3000;
  for (std::size_t k = 0; k <= 5; ++k) {
    for (double eps : {0.05, 0.3}) {
      const auto b = width_generic_bounds(e, t, eps, k);
      const double w = brute_force_width_detail(e, t, eps, k, opt).width;
      EXPECT_LE(b.lower, w + 1e-3 * eps) << "k=" << k;
      EXPECT_GE(b.upper, w - 1e-3 * eps) << "k=" << k;
    }
  }
}

TEST(BruteForce, CenteredMatchesExact) {
  const auto e = generate_exp(5, 0.7);
  const Vector zero(5, 0.0);
  for (std::size_t k = 0; k <= 5; ++k) {
    for (double eps : {0.1, 0.6}) {
      const double expect = std::min(eps, std::sqrt(e.axis(k + 1)));
      const double w = brute_force_width(e, zero, eps, k, 2000);
      EXPECT_NEAR(w, expect, 1e-3 * std::max(expect, 1e-12)) << "k=" << k;
    }
  }
}

TEST(BruteForce, DeterministicAndGuarded) {
  const auto e = generate_poly(6, 1.0);
  const Vector t = random_theta(e, 5, 0.4);
  BruteForceOptions opt;
  opt.n_dirs = 500;
  const auto a = brute_force_width_detail(e, t, 0.2, 2, opt);
  opt.threads = 1;
  const auto b = brute_force_width_detail(e, t, 0.2, 2, opt);
  EXPECT_EQ(a.width, b.width);
  EXPECT_EQ(a.best_subset, b.best_subset);
  EXPECT_EQ(a.subsets, 15u);
  opt.max_subsets = 10;
  EXPECT_THROW(brute_force_width_detail(e, t, 0.2, 2, opt), ValidationError);
}

TEST(BernsteinLinf, CubeCheckAgreesWithMembership) {
  const auto e = generate_poly(20, 1.0);
  const std::size_t s = 1;
  for (double t : {0.8, 0.95}) {
    for (std::size_t m = 2; m <= 12; m += 2) {
      for (double delta : {0.01, 0.05, 0.2}) {
        const bool ok = bernstein_linf_extremal_feasible(e, s, t, m, delta);
        if (!ok) continue;
        // every corner with the largest magnitude fits
        Vector v(20, 0.0);
        v[s - 1] = t;
        const double h = delta / std::sqrt(double(m - 1));
        for (std::size_t i = 1; i < m; ++i) v[i] = h;
        EXPECT_LE(ellipse_norm_sq(e, v), 1.0 + 1e-12);
      }
    }
  }
  EXPECT_THROW(bernstein_linf_extremal_feasible(e, s, 0.9, 1, 0.1), ValidationError);
}

TEST(WidthCsv, ColumnsAndPrecision) {
  const auto e = generate_poly(2, 1.0);
  std::vector<WidthBounds> rows{width_exact_centered(e, 0.1, 0), width_exact_centered(e, 0.1, 2)};
  std::ostringstream os;
  write_width_csv(os, 0.1, rows);
  EXPECT_EQ(os.str(),
            "k,eps,lower,upper,method\n"
            "0,0.10000000000000001,0.10000000000000001,0.10000000000000001,centered_exact\n"
            "2,0.10000000000000001,0,0,centered_exact\n");
}
