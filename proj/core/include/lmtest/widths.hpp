#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "lmtest/ellipse.hpp"

namespace lmtest {

enum class WidthMethod { CenteredExact, ZeroCase, ExtremalAxis, GenericBound, BruteOracle };

std::string_view to_string(WidthMethod method);

/// Bounds on the Kolmogorov k-width of (E - theta*) intersected with B(eps).
struct WidthBounds {
  std::size_t k = 0;
  double lower = 0.0;
  double upper = 0.0;
  WidthMethod method = WidthMethod::GenericBound;
};

/// min{eps, sqrt(mu_{k+1})} with mu_{d+1} = 0. Upper bound on the k-width of
/// E_{theta*} cap B(eps) at theta* = 0 via projection onto the first k axes.
double width_upper_zero(const EllipseSpec& e, double eps, std::size_t k);

/// Exact k-width at theta* = 0: lower == upper == min{eps, sqrt(mu_{k+1})}.
WidthBounds width_exact_centered(const EllipseSpec& e, double eps, std::size_t k);

/// Radius sqrt(mu_{k+1}) of the (k+1)-dimensional Euclidean ball inscribed in
/// E at the origin; k in [0, d - 1].
double bernstein_l2_centered(const EllipseSpec& e, std::size_t k);

enum class ExtremalBranch {
  TwoConstraint,   // both the ball and the ellipse constraint are active
  ClampedZero,     // the closed form went (numerically) negative and was clamped
  BallOnly,        // the ellipse constraint is slack; the tail can take all of eps
  EllipseOnly,     // the ball is slack; the tail reaches sqrt(mu_{m+1})
  FullProjection,  // m >= d: nothing is left outside the projection
};

std::string_view to_string(ExtremalBranch branch);

struct ExtremalWidth {
  double value = 0.0;    // min{eps, sqrt(max(0, tail_sq))}
  double tail_sq = 0.0;  // theta_{m+1}^2 from the two-constraint solution
  ExtremalBranch branch = ExtremalBranch::TwoConstraint;
};

/// Upper bound on the m-width of E_{theta*} cap B(eps) for theta* supported on
/// axis s (1-based) with value theta_star_s, projecting onto the first m axes.
/// Solves the two active constraints
///   (theta_s - theta*_s)^2 + theta_{m+1}^2 = eps^2,
///   theta_s^2 / mu_s + theta_{m+1}^2 / mu_{m+1} = 1.
/// Throws NumericError when the discriminant is negative (the two-constraint
/// branch does not exist) and ValidationError when mu_{m+1} >= mu_s.
ExtremalWidth width_upper_extremal(const EllipseSpec& e, double theta_star_s,
                                   std::size_t s, double eps, std::size_t m);

/// Exact maximum of the tail norm for the same axis-supported problem, valid
/// for every eps: falls back to the ball-only branch where the ellipse
/// constraint is slack.
ExtremalWidth extremal_tail_width(const EllipseSpec& e, double theta_star_s,
                                  std::size_t s, double eps, std::size_t m);

/// Upper bound on max{ ||Delta_{k+1..d}|| : theta* + Delta in E, ||Delta|| <= eps }
/// from the Lagrangian dual of that two-constraint quadratic program. Any
/// multiplier pair gives a valid bound; the pair is optimised numerically.
double coordinate_tail_dual_bound(const EllipseSpec& e,
                                  std::span<const double> theta_star, double eps,
                                  std::size_t k);

/// Recentred ellipse E - theta* with cached geometry, so width bounds can be
/// evaluated repeatedly by the critical-radius solvers.
class LocalizedEllipse {
 public:
  enum class Shape { Zero, Axis, General };

  /// theta* must lie in E (membership tolerance kDefaultMembershipTol).
  LocalizedEllipse(EllipseSpec e, Vector theta_star);

  const EllipseSpec& ellipse() const noexcept { return e_; }
  std::span<const double> theta_star() const noexcept { return theta_; }
  std::size_t dim() const noexcept { return e_.dim(); }
  Shape shape() const noexcept { return shape_; }
  /// 1-based support index for Shape::Axis.
  std::size_t axis_index() const noexcept { return axis_; }
  double enorm() const noexcept { return enorm_; }
  double l2() const noexcept { return l2_; }
  /// sqrt(mu_1) + ||theta*||_2, which bounds max_{theta in E} ||theta - theta*||.
  double diameter_bound() const noexcept;

  /// Upper bound f_k^u(eps) on the k-width of E_{theta*} cap B(eps) through the
  /// projection onto the first k axes (k in [0, d]).
  double width_upper(double eps, std::size_t k) const;
  WidthMethod width_upper_method(std::size_t k) const;

  /// Lower bound on the l2-Bernstein k-width of E_{theta*} cap B(radius), hence
  /// on the Kolmogorov k-width: min{radius, ball_radius(k)}.
  double width_lower(double radius, std::size_t k) const;

  /// Radius of a (k+1)-dimensional Euclidean ball centred at theta* inside E,
  /// lying in a coordinate subspace; equals sqrt(mu_{k+1}) at theta* = 0.
  double ball_radius(std::size_t k) const;

  /// Half-side h_k of a k-dimensional coordinate cube theta* + [-h, h]^k in E,
  /// a lower bound on b_{k-1,inf}(E_{theta*}). Returns 0 for k = 0.
  double cube_halfside(std::size_t k) const;

  /// The (1-based) coordinates spanned by the cube of dimension k: axes where
  /// theta* vanishes first, in order of decreasing mu, then the rest.
  std::vector<std::size_t> cube_coords(std::size_t k) const;

 private:
  double tail_enorm(std::size_t k) const;

  EllipseSpec e_;
  Vector theta_;
  Shape shape_ = Shape::Zero;
  std::size_t axis_ = 0;
  double enorm_ = 0.0;
  double l2_ = 0.0;
  Vector tail_enorm_sq_;   // tail_enorm_sq_[k] = sum_{i > k} theta_i^2 / mu_i
  std::vector<std::size_t> order_;  // 0-based coordinates, zero-theta axes first
  Vector inv_mu_prefix_;   // prefix sums over order_ of 1 / mu
  Vector lin_prefix_;      // prefix sums over order_ of |theta_i| / mu_i
  Vector quad_prefix_;     // prefix sums over order_ of (theta_i / mu_i)^2
  Vector min_mu_prefix_;   // prefix minima over order_ of mu
};

WidthBounds width_generic_bounds(const EllipseSpec& e,
                                 std::span<const double> theta_star, double eps,
                                 std::size_t k);

struct BruteForceOptions {
  std::size_t n_dirs = 10000;
  std::size_t n_refine = 16;
  std::size_t max_iters = 400;
  std::uint64_t seed = 0x5eed;
  std::size_t max_subsets = 1000000;
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct BruteForceResult {
  double width = 0.0;
  std::vector<std::size_t> best_subset;  // 1-based projection coordinates
  std::size_t subsets = 0;
};

/// Testing oracle: min over all size-k coordinate subsets S of the estimated
/// max_{Delta in E_{theta*} cap B(eps)} ||Delta - Pi_S Delta||, where each
/// maximum is found by multistart projected ascent over boundary directions.
BruteForceResult brute_force_width_detail(const EllipseSpec& e,
                                          std::span<const double> theta_star,
                                          double eps, std::size_t k,
                                          const BruteForceOptions& options = {});

double brute_force_width(const EllipseSpec& e, std::span<const double> theta_star,
                         double eps, std::size_t k, std::size_t n_dirs = 10000);

/// Whether the cube {theta_s = theta*_s, theta_i in [-delta/sqrt(|M|), delta/sqrt(|M|)]
/// for i in M = {1..m} \ {s}, zero elsewhere} fits in E according to the bound
///   1 - 2w/sqrt(mu_s) + w^2/mu_s + delta^2/mu_m <= 1,  w = sqrt(mu_s) - theta*_s.
/// A true result certifies m * b_{m-1,inf}(E_{theta*})^2 >= delta^2.
bool bernstein_linf_extremal_feasible(const EllipseSpec& e, std::size_t s,
                                      double theta_star_s, std::size_t m,
                                      double delta);

/// CSV with columns k,eps,lower,upper,method (plus brute when present).
void write_width_csv(std::ostream& out, double eps, std::span<const WidthBounds> rows,
                     std::span<const double> brute = {});

}  // namespace lmtest
