#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pmsm/problems/problem.hpp"

namespace pmsm {

enum class Method { pinn, msm, pmsm, wr_pmsm };

/// t0 + k dt, snapped to `horizon` when it overshoots by rounding only.
double slice_time(double t0, double dt, Eigen::Index k, double horizon);

std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

/// Slice times t0 + k dt. `global` holds every predicted slice; the training
/// slices are the suffix starting at train_first. With window > 0 at most
/// `window` slices are kept for training.
class TimeGrids {
 public:
  TimeGrids() = default;
  TimeGrids(double t0, double dt, int nt_init, int window,
            double horizon = std::numeric_limits<double>::infinity());

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  int window() const { return window_; }
  int nt_init() const { return nt_init_; }

  const std::vector<double>& global() const { return global_; }
  Eigen::Index num_global() const { return static_cast<Eigen::Index>(global_.size()); }
  Eigen::Index train_first() const { return train_first_; }
  Eigen::Index num_train() const { return num_global() - train_first_; }
  std::vector<double> train() const;
  double train_start() const { return global_[static_cast<std::size_t>(train_first_)]; }

  /// Appends the next slice and drops the earliest training slice when the
  /// window overflows. Returns true when the training start moved.
  bool append();

 private:
  double t0_ = 0.0;
  double dt_ = 0.05;
  int nt_init_ = 1;
  int window_ = 0;
  double horizon_ = std::numeric_limits<double>::infinity();
  std::vector<double> global_;
  Eigen::Index train_first_ = 0;
};

struct TrainSchedule {
  double dt = 0.05;
  int nt_init = 2;
  int epochs_pretrain = 7500;
  int epochs_per_round = 1500;  // K_u
  int epochs_velocity = 500;    // K_w
  int epochs_final = 15000;
  /// Points per slice: adaptive N, uniform N_u, boundary N_b; initial N_0.
  Eigen::Index n_adaptive = 500;
  Eigen::Index n_uniform = 1000;
  Eigen::Index n_initial = 500;
  Eigen::Index n_boundary = 400;
  double lambda_0 = 1.0;
  double lambda_b = 1.0;
  double lambda_n = 1.0;
  double learning_rate = 1e-3;
  double velocity_learning_rate = 1e-3;
  /// MSM outer iterations; solution epochs are split so totals match PMSM.
  int msm_iterations = 5;
  /// Active window for WR-PMSM (0 = unwindowed).
  int window = 0;
  /// 0 = full batch; otherwise each epoch is one step on a random minibatch
  /// of this many interior points (initial and boundary sets scaled alike).
  Eigen::Index minibatch = 0;
  /// false keeps the potential at zero (no velocity training).
  bool train_velocity = true;
  /// Record the solution loss every this many epochs (0 = off).
  int log_every = 100;
  int threads = 1;
};

void validate(const TrainSchedule& s);

/// (T - nt_init dt - t0) / dt + 1; ConfigError unless it is a non-negative
/// integer up to 1e-9.
int extension_rounds(double t0, double horizon, double dt, int nt_init);
int extension_rounds(const PdeProblem& problem, const TrainSchedule& s);

/// Schedules used for the four benchmarks at full budget.
TrainSchedule published_schedule(ProblemId id);

/// Solution-network epochs split over MSM iterations: totals k_ext K_u,
/// remainder spread over the first iterations.
std::vector<int> msm_iteration_epochs(const TrainSchedule& s, int k_ext);

/// Gradient steps the solution network takes under `method`.
std::int64_t planned_solution_steps(Method method, const TrainSchedule& s, int k_ext);

/// Interior collocation points per slice under `method`.
Eigen::Index interior_points_per_slice(Method method, const TrainSchedule& s);

struct MethodBudget {
  Method method = Method::pmsm;
  TrainSchedule schedule;
  std::int64_t solution_steps = 0;
  Eigen::Index interior_per_slice = 0;
};

/// Per-method schedules with equal solution steps and equal interior points
/// per slice. The PINN baseline trains all epochs in one stage on N + N_u
/// fixed points per slice. ConfigError when the totals cannot be equalized.
std::vector<MethodBudget> match_budgets(const TrainSchedule& s, int k_ext, int window);

}  // namespace pmsm
