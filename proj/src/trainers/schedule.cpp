#include "pmsm/trainers/schedule.hpp"

#include <cmath>
#include <string>

#include "pmsm/error.hpp"

namespace pmsm {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::pinn: return "pinn";
    case Method::msm: return "msm";
    case Method::pmsm: return "pmsm";
    case Method::wr_pmsm: return "wr_pmsm";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::pinn, Method::msm, Method::pmsm, Method::wr_pmsm}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "' (expected pinn, msm, pmsm or wr_pmsm)");
}

double slice_time(double t0, double dt, Eigen::Index k, double horizon) {
  const double t = t0 + static_cast<double>(k) * dt;
  return t > horizon && t - horizon <= 1e-9 * dt ? horizon : t;
}

TimeGrids::TimeGrids(double t0, double dt, int nt_init, int window, double horizon)
    : t0_(t0), dt_(dt), nt_init_(nt_init), window_(window), horizon_(horizon) {
  if (!(dt > 0)) throw ConfigError("time grid: dt must be positive");
  if (nt_init < 1) throw ConfigError("time grid: at least one initial slice is required");
  if (window < 0 || (window > 0 && window < nt_init)) {
    throw ConfigError("time grid: window must be 0 or at least the initial slice count");
  }
  for (int k = 0; k < nt_init; ++k) global_.push_back(slice_time(t0, dt, k, horizon));
}

std::vector<double> TimeGrids::train() const {
  return {global_.begin() + train_first_, global_.end()};
}

bool TimeGrids::append() {
  global_.push_back(slice_time(t0_, dt_, num_global(), horizon_));
  if (window_ > 0 && num_train() > window_) {
    ++train_first_;
    return true;
  }
  return false;
}

void validate(const TrainSchedule& s) {
  if (!(s.dt > 0)) throw ConfigError("schedule: dt must be positive");
  if (s.nt_init < 1) throw ConfigError("schedule: nt_init must be at least 1");
  if (s.epochs_pretrain < 0 || s.epochs_per_round < 0 || s.epochs_velocity < 0 || s.epochs_final < 0) {
    throw ConfigError("schedule: epoch counts must be non-negative");
  }
  if (s.n_adaptive < 0 || s.n_uniform < 0 || s.n_initial < 0 || s.n_boundary < 0) {
    throw ConfigError("schedule: point counts must be non-negative");
  }
  if (s.n_adaptive + s.n_uniform < 1) throw ConfigError("schedule: no interior points per slice");
  if (s.lambda_0 < 0 || s.lambda_b < 0 || s.lambda_n < 0) throw ConfigError("schedule: loss weights must be >= 0");
  if (!(s.learning_rate > 0) || !(s.velocity_learning_rate > 0)) {
    throw ConfigError("schedule: learning rates must be positive");
  }
  if (s.msm_iterations < 1) throw ConfigError("schedule: msm_iterations must be at least 1");
  if (s.window < 0) throw ConfigError("schedule: window must be >= 0");
  if (s.minibatch < 0) throw ConfigError("schedule: minibatch must be >= 0");
  if (s.threads < 1) throw ConfigError("schedule: threads must be at least 1");
}

int extension_rounds(double t0, double horizon, double dt, int nt_init) {
  const double k = (horizon - nt_init * dt - t0) / dt + 1.0;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 || r < 0) {
    throw ConfigError("schedule: (T - nt_init dt - t0) / dt + 1 = " + std::to_string(k) +
                      " is not a non-negative integer");
  }
  return static_cast<int>(r);
}

int extension_rounds(const PdeProblem& problem, const TrainSchedule& s) {
  return extension_rounds(problem.t0(), problem.horizon(), s.dt, s.nt_init);
}

TrainSchedule published_schedule(ProblemId id) {
  TrainSchedule s;
  switch (id) {
    case ProblemId::burgers2d:
    case ProblemId::burgers6d:
      break;
    case ProblemId::parabolic2d:
      s.n_uniform = 500;
      break;
    case ProblemId::fokker_planck3d:
      s.nt_init = 6;
      s.epochs_pretrain = 30000;
      s.epochs_per_round = 6000;
      s.epochs_final = 60000;
      s.n_adaptive = 1000;
      s.n_uniform = 2500;
      s.n_initial = 1000;
      break;
  }
  return s;
}

std::vector<int> msm_iteration_epochs(const TrainSchedule& s, int k_ext) {
  const std::int64_t total = static_cast<std::int64_t>(k_ext) * s.epochs_per_round;
  if (total == 0) return {};
  if (total < s.msm_iterations) {
    throw ConfigError("schedule: " + std::to_string(total) + " extension epochs cannot be split over " +
                      std::to_string(s.msm_iterations) + " MSM iterations");
  }
  std::vector<int> out(static_cast<std::size_t>(s.msm_iterations),
                       static_cast<int>(total / s.msm_iterations));
  for (std::int64_t i = 0; i < total % s.msm_iterations; ++i) ++out[static_cast<std::size_t>(i)];
  return out;
}

std::int64_t planned_solution_steps(Method method, const TrainSchedule& s, int k_ext) {
  std::int64_t middle = 0;
  if (method == Method::msm) {
    for (int e : msm_iteration_epochs(s, k_ext)) middle += e;
  } else {
    middle = static_cast<std::int64_t>(k_ext) * s.epochs_per_round;
  }
  return s.epochs_pretrain + middle + s.epochs_final;
}

Eigen::Index interior_points_per_slice(Method, const TrainSchedule& s) { return s.n_adaptive + s.n_uniform; }

std::vector<MethodBudget> match_budgets(const TrainSchedule& s, int k_ext, int window) {
  validate(s);
  if (k_ext < 0) throw ConfigError("match_budgets: negative extension rounds");
  if (window > 0 && window < s.nt_init) throw ConfigError("match_budgets: window smaller than the initial block");
  std::vector<MethodBudget> out;
  for (Method m : {Method::pinn, Method::msm, Method::pmsm, Method::wr_pmsm}) {
    MethodBudget b;
    b.method = m;
    b.schedule = s;
    b.schedule.window = m == Method::wr_pmsm ? window : 0;
    if (m == Method::pinn) {
      b.schedule.n_uniform = s.n_adaptive + s.n_uniform;
      b.schedule.n_adaptive = 0;
    }
    b.solution_steps = planned_solution_steps(m, b.schedule, k_ext);
    b.interior_per_slice = interior_points_per_slice(m, b.schedule);
    out.push_back(b);
  }
  for (const auto& b : out) {
    if (b.solution_steps != out.front().solution_steps || b.interior_per_slice != out.front().interior_per_slice) {
      throw ConfigError("match_budgets: budgets could not be equalized");
    }
  }
  return out;
}

}  // namespace pmsm
