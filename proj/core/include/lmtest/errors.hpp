#pragma once

#include <stdexcept>
#include <string>

namespace lmtest {

/// Bad input: malformed ellipse parameters, dimension mismatches, values
/// outside an operation's stated domain.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a result (bracket failure,
/// infeasible branch, t*_u > sqrt(mu_s) at the solved
/// point, certificate membership failure).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a routine is asked for a case it has no provider for.
class NotImplementedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {
[[noreturn]] void throw_validation(const std::string& what);
[[noreturn]] void throw_numeric(const std::string& what);
std::string fmt_double(double v);
}  // namespace detail

}  // namespace lmtest
