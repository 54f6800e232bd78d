#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace lmtest {

using Vector = std::vector<double>;

/// How the axis parameters of an ellipse were produced.
enum class Family { Explicit, Poly, Exp, Kernel };

std::string_view to_string(Family family);

/// Generating parameters; only the fields relevant to the family are set.
struct FamilyParams {
  double alpha = 0.0;
  double gamma = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// The axis-aligned ellipse {theta : sum_i theta_i^2 / mu_i <= 1}.
///
/// The sequence mu is positive and non-increasing. Coordinate indices in the
/// public API of this library are 1-based (they name axes, matching the
/// usual mu_1 >= mu_2 >= ... convention); storage is 0-based.
class EllipseSpec {
 public:
  /// Validates mu; throws ValidationError naming the first offending index.
  explicit EllipseSpec(Vector mu, Family family = Family::Explicit,
                       FamilyParams params = {});

  std::size_t dim() const noexcept { return mu_.size(); }
  std::span<const double> mu() const noexcept { return mu_; }

  /// mu_j for 1 <= j <= d, and 0 for j = d + 1 (so widths at k = d vanish).
  double axis(std::size_t j) const;

  Family family() const noexcept { return family_; }
  const FamilyParams& params() const noexcept { return params_; }

 private:
  Vector mu_;
  Family family_;
  FamilyParams params_;
};

EllipseSpec make_ellipse(Vector mu);

/// mu_j = c1 * j^(-2 alpha), j = 1..d. Requires alpha > 1/2.
EllipseSpec generate_poly(std::size_t d, double alpha, double c1 = 1.0);

/// mu_j = c1 * exp(-c2 * j^gamma), j = 1..d.
EllipseSpec generate_exp(std::size_t d, double gamma, double c1 = 1.0,
                         double c2 = 1.0);

double ellipse_norm_sq(const EllipseSpec& e, std::span<const double> theta);
double ellipse_norm(const EllipseSpec& e, std::span<const double> theta);

inline constexpr double kDefaultMembershipTol = 1e-9;

/// True iff ||theta||_E^2 <= 1 + tol.
bool contains(const EllipseSpec& e, std::span<const double> theta,
              double tol = kDefaultMembershipTol);

double l2_norm(std::span<const double> v);
bool is_zero(std::span<const double> v);

/// Dense square matrix, row-major.
struct SquareMatrix {
  std::size_t n = 0;
  Vector data;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size) : n(size), data(size * size, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * n + j];
  }
};

struct KernelEllipse {
  EllipseSpec ellipse;
  double effective_sigma = 0.0;
  /// Eigenvalues of gram / n that fell below the floor and were dropped.
  std::size_t clamped = 0;
};

inline constexpr double kEigenvalueFloor = 1e-12;

/// Converts a kernel Gram matrix K(x_i, x_j) on n design points to an
/// ellipse: mu = eigenvalues of gram / n in non-increasing order, noise level
/// sigma / sqrt(n). Eigenvalues below kEigenvalueFloor * (largest) are dropped.
KernelEllipse kernel_to_ellipse(const SquareMatrix& gram, double sigma,
                                double symmetry_tol = 1e-9);

/// An ellipse with the null vector theta*, noise level sigma and target
/// uniform error rho. Validated on construction.
class TestProblem {
 public:
  TestProblem(EllipseSpec ellipse, Vector theta_star, double sigma, double rho);

  const EllipseSpec& ellipse() const noexcept { return ellipse_; }
  std::span<const double> theta_star() const noexcept { return theta_star_; }
  double sigma() const noexcept { return sigma_; }
  double rho() const noexcept { return rho_; }

 private:
  EllipseSpec ellipse_;
  Vector theta_star_;
  double sigma_;
  double rho_;
};

enum class BuiltinKernel {
  FirstOrderSobolev,  // 1 + min(x, x')
  Gaussian,           // exp(-(x - x')^2 / (2 t))
};

SquareMatrix gram_matrix(BuiltinKernel kernel, std::span<const double> points,
                         double bandwidth = 1.0);

}  // namespace lmtest
