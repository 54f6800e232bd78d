#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "lmtest/config.hpp"

namespace lmtest::cli {

enum class Format { Csv, Json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct RunConfig {
  std::string command;
  std::filesystem::path config_path;
  ProblemConfig problem;
  std::optional<std::filesystem::path> out;
  Format format = Format::Json;
  std::uint64_t seed = 1;
  std::size_t trials = 20000;
  std::optional<double> eps;
  std::optional<double> sweep_lo;
  std::optional<double> sweep_hi;
  std::optional<std::size_t> sweep_points;
  bool certificate = false;
  bool brute = false;
  std::size_t n_dirs = 10000;
  std::optional<std::size_t> k_lo;
  std::optional<std::size_t> k_hi;
  std::size_t threads = 0;
};

// Each command writes its result to cfg.out (or `out` when unset) and returns
// an exit code. Library exceptions propagate; run() maps them to exit codes.
int cmd_solve(const RunConfig& cfg, std::ostream& out);
int cmd_mc(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_widths(const RunConfig& cfg, std::ostream& out);

/// Parses argv, loads the config and dispatches. 0 ok, 2 config/validation
/// failure, 3 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lmtest::cli
