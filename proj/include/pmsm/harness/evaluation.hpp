#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pmsm/autodiff/dense_net.hpp"
#include "pmsm/harness/config.hpp"
#include "pmsm/problems/problem.hpp"
#include "pmsm/sampling/point_set.hpp"
#include "pmsm/transport/trajectory.hpp"

namespace pmsm {

/// Evaluation points, slice-major: points_per_slice columns for each time.
struct EvalGrid {
  PointSet points;
  std::vector<double> times;
  Eigen::Index points_per_slice = 0;
};

/// t0, t0 + interval, ... with T always the last entry.
std::vector<double> plot_times(double t0, double horizon, double interval);

/// Tensor grid with both endpoints per axis for d <= 3, seeded uniform points
/// (same set on every slice) for d > 3. ConfigError above spec.max_points.
EvalGrid eval_grid(const PdeProblem& problem, const EvalGridSpec& spec, std::uint64_t seed = 0);

struct ErrorReport {
  double rel_l2 = 0.0;
  double l_inf = 0.0;
  /// Set when the exact solution has zero norm; rel_l2 is then the absolute L2 norm.
  bool absolute = false;
  std::vector<double> times;
  std::vector<double> slice_rel_l2;
  std::vector<double> slice_l_inf;
  std::vector<std::uint8_t> slice_absolute;
  Eigen::Index points = 0;
  double wall_s = 0.0;
};

/// Predicted values at (d+1) x P points.
using ValueFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd& points)>;

ErrorReport compute_errors(const ValueFn& predict, const PdeProblem& problem, const EvalGrid& grid);
ErrorReport compute_errors(const DenseNet& net, const PdeProblem& problem, const EvalGrid& grid);

/// Per slice, the fraction of trajectory points with |front functional| <= band.
std::vector<double> front_concentration(const Trajectory& traj, const PdeProblem& problem, double band);

/// 10 times the diffusion coefficient: alpha, or sigma^2 / 2 for Fokker-Planck.
double default_front_band(const PdeProblem& problem);

}  // namespace pmsm
