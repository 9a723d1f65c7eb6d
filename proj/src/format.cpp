#include "pmsm/format.hpp"

#include <cstdio>

namespace pmsm {

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace pmsm
