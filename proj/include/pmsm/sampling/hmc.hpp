#pragma once

#include <cstdint>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "pmsm/problems/problem.hpp"
#include "pmsm/sampling/point_set.hpp"

namespace pmsm {

struct HmcConfig {
  int n_chains = 16;
  /// Burn-in transitions per chain; the step size adapts only here.
  int burn_in = 500;
  /// Maximum leapfrog steps; each proposal draws its count uniformly from
  /// [1, leapfrog_steps] when random_path_length is set. Fixed-length paths
  /// can be unable to reach states whose orbits leave a bounded support.
  int leapfrog_steps = 10;
  bool random_path_length = true;
  /// Initial step size (the fixed step size when burn_in is 0).
  double step_size = 1e-2;
  double target_accept = 0.75;
  /// Density floor in log(m(x) + epsilon_floor).
  double epsilon_floor = 1e-4;
  /// Keep every thin-th post-burn-in state.
  int thin = 1;
  /// Uniform candidates used to place the chain starts by importance resampling.
  int init_candidates = 16384;
  /// Post-burn-in acceptance below this fails with DiagnosticsError.
  double min_accept = 0.05;
  int threads = 1;
  std::uint64_t seed = 0;
};

void validate(const HmcConfig& cfg);

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// Unnormalized log density; returns kLogZero outside the support. When the
/// value is finite and `grad` is non-null, `grad` receives its gradient.
using LogDensity = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct HmcDiagnostics {
  double accept_rate = 0.0;  // post burn-in, all chains
  double mean_abs_delta_h = 0.0;  // post burn-in trajectories that stayed in the support
  std::int64_t proposals = 0;
  std::int64_t left_support = 0;
  Eigen::VectorXd step_sizes;  // per chain, after adaptation
};

struct HmcResult {
  Eigen::MatrixXd samples;  // d x n, shuffled
  HmcDiagnostics diagnostics;
};

/// Result of one leapfrog trajectory.
struct LeapfrogState {
  Eigen::VectorXd x;
  Eigen::VectorXd p;
  double log_density = kLogZero;
  Eigen::VectorXd grad;
};

/// Integrates H = -log pi(x) + |p|^2 / 2 for `steps` leapfrog steps from a
/// state whose log density and gradient are filled in. Stops early with
/// log_density = kLogZero if the trajectory leaves the support.
LeapfrogState leapfrog(const LogDensity& log_density, LeapfrogState state, double step_size, int steps);

/// n draws by multi-chain HMC with Metropolis-Hastings correction. Chains
/// start from uniform candidates in `support` resampled in proportion to the
/// target, adapt the step size by dual averaging during burn-in, and run on
/// independent seeded streams; the output does not depend on cfg.threads.
/// Throws DiagnosticsError if the post-burn-in acceptance is below
/// cfg.min_accept.
HmcResult hmc_sample(const LogDensity& log_density, const Box& support, const HmcConfig& cfg, Eigen::Index n);

/// log(m(x) + eps) for the problem's seed monitor, with gradient; kLogZero
/// outside the domain.
double log_density_ic(const PdeProblem& problem, const Eigen::VectorXd& x, double eps,
                      Eigen::VectorXd* grad = nullptr);

/// n seeds from the initial-condition density, placed at t0, as an adaptive set.
PointSet hmc_sample(const PdeProblem& problem, const HmcConfig& cfg, Eigen::Index n,
                    HmcDiagnostics* diagnostics = nullptr);

/// Initial-condition collocation points C0 and adaptive seeds Z0.
struct SeedSets {
  PointSet initial;   // C0: uniform share first, then HMC draws
  PointSet adaptive;  // Z0
  HmcDiagnostics diagnostics;
};

/// Draws (n_initial - n_uniform) + n_adaptive HMC samples; the first part
/// joins round(uniform_fraction * n_initial) uniform points to form C0 and the
/// remaining n_adaptive become Z0.
SeedSets initial_seed_sets(const PdeProblem& problem, const HmcConfig& cfg, Eigen::Index n_initial,
                           Eigen::Index n_adaptive, double uniform_fraction = 0.1);

}  // namespace pmsm
