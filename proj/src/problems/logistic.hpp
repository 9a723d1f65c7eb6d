#pragma once

#include <cmath>

namespace pmsm::detail {

/// u = 1 / (1 + e^xi) and w = u (1 - u), evaluated without overflow.
struct Logistic {
  double u;
  double w;
};

inline Logistic logistic(double xi) {
  if (xi > 0) {
    const double e = std::exp(-xi);
    return {e / (1.0 + e), e / ((1.0 + e) * (1.0 + e))};
  }
  const double e = std::exp(xi);
  return {1.0 / (1.0 + e), e / ((1.0 + e) * (1.0 + e))};
}

}  // namespace pmsm::detail
