#include <gtest/gtest.h>

#include <cmath>

#include "lmtest/errors.hpp"
#include "lmtest/lpt.hpp"
#include "lmtest/widths.hpp"

using namespace lmtest;

TEST(Threshold, Formula) {
  EXPECT_DOUBLE_EQ(lpt_threshold(0.1, 0.25, 16), 0.01 * (16.0 + std::sqrt(256.0)));
  EXPECT_THROW(lpt_threshold(0.1, 0.25, 0), ValidationError);
  EXPECT_THROW(lpt_threshold(0.0, 0.25, 3), ValidationError);
  EXPECT_THROW(lpt_threshold(0.1, 0.75, 3), ValidationError);
}

TEST(MakeTest, ProjectsOntoLeadingCoordinates) {
  const Vector t{0.1, 0.2, 0.3, 0.4};
  const auto test = make_test(t, 0.5, 0.25, 2);
  EXPECT_EQ(test.coords, (std::vector<std::size_t>{1, 2}));
  EXPECT_DOUBLE_EQ(test.threshold, 0.25 * (2.0 + std::sqrt(32.0)));
  EXPECT_DOUBLE_EQ(test.beta(), std::sqrt(test.threshold));
  const Vector y{1.1, 0.2, 7.0, -3.0};
  EXPECT_DOUBLE_EQ(test_statistic(test, y), 1.0);
  EXPECT_EQ(decide(test, y), 0);
  const Vector far{3.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(decide(test, far), 1);
  EXPECT_THROW(make_test(t, 0.5, 0.25, 5), ValidationError);
  EXPECT_THROW(test_statistic(test, Vector{1.0}), ValidationError);
}

TEST(BuildTest, CircleUsesAllCoordinates) {
  const std::size_t d = 100;
  const TestProblem p(EllipseSpec(Vector(d, double(d))), Vector(d, 0.0), 0.1, 0.25);
  const auto built = build_test(p);
  EXPECT_EQ(built.test.k, d);
  EXPECT_NEAR(built.upper.eps * built.upper.eps, 1.6, 1.6e-9);
  EXPECT_DOUBLE_EQ(built.test.threshold, lpt_threshold(0.1, 0.25, d));
}

TEST(NoncentralityFloor, CenteredFormulaAndGuard) {
  const auto e = generate_poly(100, 1.0);
  const Vector z(100, 0.0);
  const double eps = 0.2;
  // k = 7 is the first k with mu_{k+1} <= eps^2 / 2
  EXPECT_NEAR(noncentrality_floor(e, z, eps, 7), eps * eps - 1.0 / 64.0, 1e-15);
  EXPECT_THROW(noncentrality_floor(e, z, eps, 6), NumericError);
}

TEST(AnalyticBound, HoldsAtUpperRadius) {
  const auto e = generate_poly(500, 1.0);
  const TestProblem p(e, Vector(500, 0.0), 0.02, 0.25);
  const auto built = build_test(p);
  const double floor = noncentrality_floor(e, p.theta_star(), built.upper.eps, built.test.k);
  EXPECT_GE(floor, built.upper.eps * built.upper.eps / 2.0);
  const auto b = analytic_error_bound(built.test, built.upper.eps, floor);
  EXPECT_TRUE(b.type1_ok);
  EXPECT_TRUE(b.type2_ok);
  EXPECT_DOUBLE_EQ(b.value, 0.25);

  const auto weak = analytic_error_bound(built.test, built.upper.eps, floor / 10.0);
  EXPECT_FALSE(weak.type2_ok);
  EXPECT_DOUBLE_EQ(weak.value, 1.0);
  EXPECT_NE(weak.diagnostic.find("type-II"), std::string::npos);
}
