#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lmtest/ellipse.hpp"

namespace lmtest {

/// How the null vector is given in a config file.
struct ThetaStarSpec {
  enum class Kind { Zero, Axis, Explicit, BoundaryOffset };
  Kind kind = Kind::Zero;
  std::size_t s = 0;   // Axis, BoundaryOffset (1-based)
  double value = 0.0;  // Axis
  double w = 0.0;      // BoundaryOffset: theta_s = sqrt(mu_s) - w
  Vector values;       // Explicit
};

/// theta* for the ellipse; checks the index range and membership.
Vector resolve_theta_star(const ThetaStarSpec& spec, const EllipseSpec& e);

/// A problem description loaded from a YAML config file:
///
///   family: poly            # poly | exp | explicit | kernel
///   d: 1000
///   alpha: 1.0              # poly; exp uses gamma; both take c1 (and exp c2)
///   mu: [4, 1, 0.25]        # explicit
///   gram: gram.csv          # kernel: n x n CSV, relative to the config file
///   kernel: sobolev1        # kernel alternative: sobolev1 | gaussian
///   points: [0.25, 0.5]     #   with bandwidth for gaussian
///   theta_star: {kind: axis, s: 1, value: 0.5}
///   sigma: 0.05
///   sigma_grid: [1e-3, 2e-3, ...]
///   rho: 0.25
///
/// Optional run keys: seed, trials, eps, s (for t* computations), k_lo, k_hi,
/// brute, n_dirs.
struct ProblemConfig {
  EllipseSpec ellipse{Vector{1.0}};
  ThetaStarSpec theta;
  /// Noise multiplier from kernel ingestion (1 / sqrt(n)); 1 otherwise.
  double sigma_scale = 1.0;
  std::size_t clamped = 0;
  std::optional<double> sigma;
  std::vector<double> sigma_grid;
  double rho = 0.25;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> eps;
  std::optional<std::size_t> s;
  std::optional<std::size_t> k_lo;
  std::optional<std::size_t> k_hi;
  bool brute = false;
  std::size_t n_dirs = 10000;
};

/// Throws ValidationError naming the offending key.
ProblemConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ProblemConfig load_config(const std::filesystem::path& path);

/// n rows of n comma-separated numbers, no header.
SquareMatrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace lmtest
