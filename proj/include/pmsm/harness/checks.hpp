#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pmsm {

struct GradientCheckReport {
  int jet_cases = 0;
  int param_cases = 0;
  /// Parameters compared by finite differences over all param cases.
  int param_entries = 0;
  double max_grad_err = 0.0;
  double max_lap_err = 0.0;
  double max_param_err = 0.0;
  double jet_tolerance = 1e-5;
  double param_tolerance = 1e-4;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

/// Input jets of random networks (d in {1, 2, 3, 6}) against fourth-order
/// central differences of an independent scalar forward pass, and parameter
/// gradients of the solution, velocity and Neumann losses against central
/// differences of the loss values. Errors are |got - want| / max(|want|, 1e-3).
GradientCheckReport check_gradients(std::uint64_t seed, int jet_cases = 1000, int param_cases = 200);

/// Deterministic text summary (no timings).
void write_report(std::ostream& out, const GradientCheckReport& r);

struct HmcDiagReport {
  double gaussian_mean = 0.0;
  double gaussian_var = 0.0;
  bool gaussian_ok = false;
  double front_fraction = 0.0;
  double front_oracle = 0.0;
  bool front_ok = false;
  double chi2 = 0.0;
  int chi2_dof = 0;
  double chi2_p = 0.0;
  bool chi2_ok = false;

  bool passed() const { return gaussian_ok && front_ok && chi2_ok; }
};

/// Sampler checks: N(0, 0.25) moments from 10^4 draws (|mean| < 0.02,
/// variance within 10%); burgers2d seed mass in |x + y| <= 0.05 within 0.05
/// of a quadrature oracle from 2000 draws; 10^5-draw histogram of a truncated
/// 1D target against quadrature bin masses with chi-square p > 0.01.
HmcDiagReport hmc_diagnostics(std::uint64_t seed);

void write_report(std::ostream& out, const HmcDiagReport& r);

}  // namespace pmsm
