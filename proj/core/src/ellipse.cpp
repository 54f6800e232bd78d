#include "lmtest/ellipse.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "lmtest/errors.hpp"

namespace lmtest {

using detail::fmt_double;
using detail::throw_validation;

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Explicit: return "explicit";
    case Family::Poly: return "poly";
    case Family::Exp: return "exp";
    case Family::Kernel: return "kernel";
  }
  return "unknown";
}

EllipseSpec::EllipseSpec(Vector mu, Family family, FamilyParams params)
    : mu_(std::move(mu)), family_(family), params_(params) {
  if (mu_.empty()) throw_validation("ellipse: mu must be non-empty");
  for (std::size_t i = 0; i < mu_.size(); ++i) {
    if (!std::isfinite(mu_[i]) || !(mu_[i] > 0.0)) {
      throw_validation("ellipse: mu must be positive and finite; violated at index " +
                       std::to_string(i) + " (mu = " + fmt_double(mu_[i]) + ")");
    }
    if (i > 0 && mu_[i] > mu_[i - 1]) {
      throw_validation("ellipse: mu must be non-increasing; violated at index " +
                       std::to_string(i) + " (" + fmt_double(mu_[i]) + " > " +
                       fmt_double(mu_[i - 1]) + ")");
    }
  }
}

double EllipseSpec::axis(std::size_t j) const {
  if (j == 0 || j > mu_.size() + 1) {
    throw_validation("ellipse: axis index " + std::to_string(j) +
                     " outside [1, d + 1]");
  }
  return j == mu_.size() + 1 ? 0.0 : mu_[j - 1];
}

EllipseSpec make_ellipse(Vector mu) { return EllipseSpec(std::move(mu)); }

EllipseSpec generate_poly(std::size_t d, double alpha, double c1) {
  if (d == 0) throw_validation("generate_poly: d must be >= 1");
  if (!(alpha > 0.5)) {
    throw_validation("generate_poly: alpha must exceed 1/2, got " + fmt_double(alpha));
  }
  if (!(c1 > 0.0)) throw_validation("generate_poly: c1 must be positive");
  Vector mu(d);
  for (std::size_t j = 1; j <= d; ++j) {
    mu[j - 1] = c1 * std::pow(static_cast<double>(j), -2.0 * alpha);
  }
  return EllipseSpec(std::move(mu), Family::Poly, {.alpha = alpha, .c1 = c1});
}

EllipseSpec generate_exp(std::size_t d, double gamma, double c1, double c2) {
  if (d == 0) throw_validation("generate_exp: d must be >= 1");
  if (!(gamma > 0.0)) throw_validation("generate_exp: gamma must be positive");
  if (!(c1 > 0.0)) throw_validation("generate_exp: c1 must be positive");
  if (!(c2 > 0.0)) throw_validation("generate_exp: c2 must be positive");
  Vector mu(d);
  for (std::size_t j = 1; j <= d; ++j) {
    mu[j - 1] = c1 * std::exp(-c2 * std::pow(static_cast<double>(j), gamma));
  }
  // Deep tails underflow to zero; the ellipse needs strictly positive axes.
  if (!(mu.back() > 0.0)) {
    throw_validation("generate_exp: mu_d underflows to zero; reduce d");
  }
  return EllipseSpec(std::move(mu), Family::Exp,
                     {.gamma = gamma, .c1 = c1, .c2 = c2});
}

namespace {
void check_dim(const EllipseSpec& e, std::span<const double> theta,
               const char* op) {
  if (theta.size() != e.dim()) {
    throw_validation(std::string(op) + ": dimension mismatch (theta has " +
                     std::to_string(theta.size()) + " entries, ellipse has d = " +
                     std::to_string(e.dim()) + ")");
  }
}
}  // namespace

double ellipse_norm_sq(const EllipseSpec& e, std::span<const double> theta) {
  check_dim(e, theta, "ellipse_norm");
  const auto mu = e.mu();
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) s += theta[i] * theta[i] / mu[i];
  return s;
}

double ellipse_norm(const EllipseSpec& e, std::span<const double> theta) {
  return std::sqrt(ellipse_norm_sq(e, theta));
}

bool contains(const EllipseSpec& e, std::span<const double> theta, double tol) {
  return ellipse_norm_sq(e, theta) <= 1.0 + tol;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

TestProblem::TestProblem(EllipseSpec ellipse, Vector theta_star, double sigma,
                         double rho)
    : ellipse_(std::move(ellipse)),
      theta_star_(std::move(theta_star)),
      sigma_(sigma),
      rho_(rho) {
  check_dim(ellipse_, theta_star_, "TestProblem");
  for (double v : theta_star_) {
    if (!std::isfinite(v)) throw_validation("TestProblem: theta* must be finite");
  }
  if (!contains(ellipse_, theta_star_)) {
    throw_validation("TestProblem: theta* lies outside the ellipse (||theta*||_E^2 = " +
                     fmt_double(ellipse_norm_sq(ellipse_, theta_star_)) + ")");
  }
  if (!std::isfinite(sigma_) || !(sigma_ > 0.0)) {
    throw_validation("TestProblem: sigma must be positive, got " + fmt_double(sigma_));
  }
  if (!(rho_ > 0.0 && rho_ <= 0.5)) {
    throw_validation("TestProblem: rho must lie in (0, 1/2], got " + fmt_double(rho_));
  }
}

KernelEllipse kernel_to_ellipse(const SquareMatrix& gram, double sigma,
                                double symmetry_tol) {
  const std::size_t n = gram.n;
  if (n == 0 || gram.data.size() != n * n) {
    throw_validation("kernel_to_ellipse: gram must be a non-empty square matrix");
  }
  if (!(sigma > 0.0)) throw_validation("kernel_to_ellipse: sigma must be positive");

  double scale = 1.0;
  for (double v : gram.data) {
    if (!std::isfinite(v)) throw_validation("kernel_to_ellipse: non-finite entry");
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(gram(i, j) - gram(j, i)) > symmetry_tol * scale) {
        throw_validation("kernel_to_ellipse: gram is not symmetric at (" +
                         std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }

  Eigen::MatrixXd k(n, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          0.5 * (gram(i, j) + gram(j, i)) * inv_n;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    detail::throw_numeric("kernel_to_ellipse: eigensolver did not converge");
  }
  Vector eig(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(eig.begin(), eig.end(), std::greater<>());

  const double top = eig.front();
  if (!(top > 0.0)) {
    throw_validation("kernel_to_ellipse: all eigenvalues are below the floor");
  }
  const double floor = kEigenvalueFloor * top;
  const auto kept = static_cast<std::size_t>(
      std::find_if(eig.begin(), eig.end(), [floor](double v) { return v < floor; }) -
      eig.begin());
  KernelEllipse out{
      .ellipse = EllipseSpec(Vector(eig.begin(), eig.begin() + static_cast<long>(kept)),
                             Family::Kernel),
      .effective_sigma = sigma / std::sqrt(static_cast<double>(n)),
      .clamped = n - kept,
  };
  return out;
}

SquareMatrix gram_matrix(BuiltinKernel kernel, std::span<const double> points,
                         double bandwidth) {
  if (points.empty()) throw_validation("gram_matrix: no design points");
  if (kernel == BuiltinKernel::Gaussian && !(bandwidth > 0.0)) {
    throw_validation("gram_matrix: bandwidth must be positive");
  }
  SquareMatrix g(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      const double x = points[i];
      const double y = points[j];
      g(i, j) = kernel == BuiltinKernel::FirstOrderSobolev
                    ? 1.0 + std::min(x, y)
                    : std::exp(-(x - y) * (x - y) / (2.0 * bandwidth));
    }
  }
  return g;
}

}  // namespace lmtest
