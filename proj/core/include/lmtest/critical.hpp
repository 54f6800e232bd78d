#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lmtest/ellipse.hpp"
#include "lmtest/widths.hpp"

namespace lmtest {

enum class Side { Upper, Lower, Bernstein };

std::string_view to_string(Side side);

/// A solved critical radius with its critical dimension.
struct CriticalSolution {
  double eps = 0.0;
  std::size_t k = 0;
  Side side = Side::Upper;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  /// eps - RHS(eps) for the defining fixed-point inequality.
  double residual = 0.0;
};

/// Constants of the lower bound; requires a > 3b and
/// c = b / (8 sqrt 2) - sqrt(a^2 - 9 b^2) / (12 sqrt 2) > 0.
class LowerBoundConstants {
 public:
  /// a = sqrt(97) / 12, b = 1/4, c = 1 / (288 sqrt 2).
  LowerBoundConstants();
  LowerBoundConstants(double a, double b);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }

 private:
  double a_;
  double b_;
  double c_;
};

inline constexpr double kBracketFloor = 1e-12;
inline constexpr double kSolverRelTol = 1e-9;

/// Smallest k in [1, d] with f_k^u(eps) <= eps / sqrt(2).
std::size_t k_upper(const LocalizedEllipse& local, double eps);
std::size_t k_upper(const EllipseSpec& e, std::span<const double> theta_star, double eps);

/// Smallest k in [1, d] with f_k^l(a eps) <= 3 b eps, where f^l is the
/// Bernstein-ball lower bound on the k-width.
std::size_t k_lower(const LocalizedEllipse& local, double eps,
                    const LowerBoundConstants& consts = {});
std::size_t k_lower(const EllipseSpec& e, std::span<const double> theta_star, double eps,
                    const LowerBoundConstants& consts = {});

/// Largest k in [1, d] with k h_k^2 >= eps^2, h_k the inscribed-cube half-side
/// (a lower bound on b_{k-1,inf}); 0 when no k qualifies.
std::size_t k_bernstein(const LocalizedEllipse& local, double eps);

/// inf{eps : eps >= (8 / sqrt(rho)) sigma^2 sqrt(k_u(eps)) / eps}.
CriticalSolution solve_eps_upper(const LocalizedEllipse& local, double sigma, double rho);
CriticalSolution solve_eps_upper(const TestProblem& problem);

/// sup{eps : eps <= (1/4) sigma^2 sqrt(k_l(eps)) / eps}.
CriticalSolution solve_eps_lower(const LocalizedEllipse& local, double sigma,
                                 const LowerBoundConstants& consts = {});
CriticalSolution solve_eps_lower(const TestProblem& problem,
                                 const LowerBoundConstants& consts = {});

/// sup{eps : eps <= (1/4) sigma^2 sqrt(k_B(eps)) / eps}.
CriticalSolution solve_eps_bernstein(const LocalizedEllipse& local, double sigma);
CriticalSolution solve_eps_bernstein(const TestProblem& problem);

/// psi(r) = sum_i r^2 / (r + mu_i)^2 theta*_i^2.
double phi_psi(const EllipseSpec& e, std::span<const double> theta_star, double r);

/// Phi(delta) = 1 if delta >= ||theta*|| / a, else min{1, min{r >= 0 : a^2 delta^2 <= psi(r)}}.
double phi(const EllipseSpec& e, std::span<const double> theta_star, double delta, double a);

/// Largest delta with Phi(delta) <= x; +infinity for x >= 1.
double phi_inverse(const EllipseSpec& e, std::span<const double> theta_star, double x,
                   double a);

/// c * min{eps_l, Phi^{-1}((1 / ||theta*||_E - 1)^2)}.
double theorem2_radius(const TestProblem& problem, const LowerBoundConstants& consts = {});

struct MPair {
  std::size_t m_u = 0;
  std::size_t m_l = 0;
};

/// m_u = max{k : mu_k >= delta^2 / 2}, m_l = max{k : mu_{k+1} >= 9 delta^2 / 16},
/// for delta in (0, min{sqrt(2 mu_1), (4/3) sqrt(mu_2)}).
MPair m_zero(const EllipseSpec& e, double delta);

/// m_u = max{k : mu_k^2 >= delta^2 mu_s / 64}, m_l = max{k : mu_k^2 >= delta^2 mu_s},
/// for delta in (0, mu_1 / sqrt(mu_s)).
MPair m_extremal(const EllipseSpec& e, double delta, std::size_t s);

struct TStar {
  double t_u = 0.0;
  double t_l = 0.0;
  std::size_t m_u = 0;  // m_u(t_u; s)
  std::size_t m_l = 0;  // m_l(t_l; s)
  /// Polynomial families only: closed forms and the fixed points of the
  /// continuous relaxation m(delta) = (64 c1 s^{2 alpha})^{1/(4 alpha)} delta^{-1/(2 alpha)}
  /// (resp. without the 64) that they solve exactly.
  std::optional<double> t_u_closed;
  std::optional<double> t_l_closed;
  std::optional<double> t_u_relaxed;
  std::optional<double> t_l_relaxed;
};

/// Fixed points t*_u, t*_l over m_extremal. Throws NumericError when
/// t*_u > sqrt(mu_s), and when a polynomial family's closed forms disagree with
/// the relaxed fixed points by more than 1e-6 relative.
TStar t_star(const EllipseSpec& e, std::size_t s, double sigma, double rho);

enum class RateFamily { PolyZero, ExpZero, PolyExtremal };

std::string_view to_string(RateFamily family);
RateFamily parse_rate_family(std::string_view name);

struct RateQuery {
  RateFamily family = RateFamily::PolyZero;
  double alpha = 1.0;
  double gamma = 1.0;
  double sigma = 0.0;
  double rho = 0.25;
  /// PolyExtremal: either s directly, or s = (sigma^2)^(-beta).
  std::optional<double> s;
  std::optional<double> beta;
};

struct RatePrediction {
  double eps_sq = 0.0;    // predicted squared radius, constants taken as 1
  double exponent = 0.0;  // exponent of sigma^2
  double k_scale = 0.0;   // predicted scale of the critical dimension
};

RatePrediction closed_form_rates(const RateQuery& query);

}  // namespace lmtest
