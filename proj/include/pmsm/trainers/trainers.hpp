#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pmsm/autodiff/dense_net.hpp"
#include "pmsm/problems/problem.hpp"
#include "pmsm/sampling/hmc.hpp"
#include "pmsm/trainers/pinn_loss.hpp"
#include "pmsm/trainers/schedule.hpp"
#include "pmsm/transport/trajectory.hpp"

namespace pmsm {

/// One training stage: round 0 is the initial stage (PMSM) or pretraining
/// (PINN, MSM); MSM iterations and extension rounds count from 1.
struct RoundRecord {
  int round = 0;
  double t_new = 0.0;
  Eigen::Index train_slices = 0;
  Eigen::Index train_interior_points = 0;
  double solution_loss = 0.0;
  double velocity_loss = 0.0;
  bool velocity_rollback = false;
  bool window_reset = false;
  /// Time at which the initial-condition term is imposed this round.
  double ic_anchor = 0.0;
};

struct LossSample {
  std::int64_t step = 0;
  double loss = 0.0;
};

struct RunMetrics {
  std::int64_t solution_steps = 0;
  std::int64_t velocity_steps = 0;
  /// Largest interior training set used before the final refinement.
  Eigen::Index peak_train_points = 0;
  std::vector<RoundRecord> rounds;
  std::vector<LossSample> loss_history;
  double final_loss = 0.0;
  int velocity_rollbacks = 0;
  int degenerate_pairs = 0;
  HmcDiagnostics hmc;
  double wall_s = 0.0;
};

struct RunHooks {
  /// After each round with the current solution net and trajectory.
  std::function<void(int round, const DenseNet& solution, const Trajectory& traj)> on_round;
  /// Right after a window reset clones the reference model.
  std::function<void(const ReferenceModel& reference, const DenseNet& solution)> on_reset;
};

struct TrainResult {
  Method method = Method::pmsm;
  DenseNet solution;
  std::optional<VelocityField> velocity;
  Trajectory trajectory;
  std::vector<double> times;
  RunMetrics metrics;
};

/// Fixed uniform interior points (N + N_u per slice) on every slice and all
/// epochs in one stage. The initial set is the same C0 the adaptive methods use.
TrainResult train_pinn_baseline(const PdeProblem& problem, const TrainSchedule& schedule, const HmcConfig& hmc,
                                std::uint64_t seed, const RunHooks& hooks = {});

/// Pretrain on uniform points, then per iteration: train the potential on all
/// slice pairs, redraw Z0, evolve it across every slice, retrain the solution;
/// then the final refinement.
TrainResult run_msm(const PdeProblem& problem, const TrainSchedule& schedule, const HmcConfig& hmc,
                    std::uint64_t seed, const RunHooks& hooks = {});

/// Initial stage on nt_init slices, one extension round per new slice
/// (predict, train solution, train potential, final evolve), final refinement.
TrainResult run_pmsm(const PdeProblem& problem, const TrainSchedule& schedule, const HmcConfig& hmc,
                     std::uint64_t seed, const RunHooks& hooks = {});

/// run_pmsm restricted to the most recent `window` slices during extension,
/// with the initial condition anchored to a frozen reference at the window start.
TrainResult run_wr_pmsm(const PdeProblem& problem, const TrainSchedule& schedule, const HmcConfig& hmc,
                        std::uint64_t seed, int window, const RunHooks& hooks = {});

/// Dispatches on `method`; wr_pmsm uses schedule.window.
TrainResult run_method(Method method, const PdeProblem& problem, const TrainSchedule& schedule,
                       const HmcConfig& hmc, std::uint64_t seed, const RunHooks& hooks = {});

}  // namespace pmsm
