#pragma once

#include <string>

namespace pmsm {

/// %.17g: round-trips every finite double.
std::string format_double(double v);

}  // namespace pmsm
