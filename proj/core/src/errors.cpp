#include "lmtest/errors.hpp"

#include <cstdio>

namespace lmtest::detail {

void throw_validation(const std::string& what) { throw ValidationError(what); }

void throw_numeric(const std::string& what) { throw NumericError(what); }

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace lmtest::detail
