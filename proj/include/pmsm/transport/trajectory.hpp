#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pmsm/problems/problem.hpp"
#include "pmsm/sampling/point_set.hpp"
#include "pmsm/transport/velocity.hpp"

namespace pmsm {

enum class Provenance { temporary, final };

std::string_view to_string(Provenance p);

/// Adaptive sample paths: slice i holds the N spatial points at times[i].
class Trajectory {
 public:
  Trajectory() = default;
  /// Slice 0 (final) from d x N seeds at time t0.
  Trajectory(Eigen::MatrixXd seeds, double t0);

  Eigen::Index num_slices() const { return static_cast<Eigen::Index>(slices_.size()); }
  Eigen::Index num_points() const { return slices_.empty() ? 0 : slices_.front().cols(); }
  int spatial_dim() const { return slices_.empty() ? 0 : static_cast<int>(slices_.front().rows()); }

  const Eigen::MatrixXd& slice(Eigen::Index i) const { return slices_.at(static_cast<std::size_t>(i)); }
  double time(Eigen::Index i) const { return times_.at(static_cast<std::size_t>(i)); }
  Provenance provenance(Eigen::Index i) const { return provenance_.at(static_cast<std::size_t>(i)); }

  void append(Eigen::MatrixXd points, double t, Provenance p);
  /// Replaces slice i in place (time unchanged).
  void replace(Eigen::Index i, Eigen::MatrixXd points, Provenance p);
  /// Drops every slice from index n on.
  void truncate(Eigen::Index n);

  /// Slices [first, first + count) as space-time points, slice-major.
  PointSet space_time_points(Eigen::Index first, Eigen::Index count) const;

 private:
  std::vector<Eigen::MatrixXd> slices_;
  std::vector<double> times_;
  std::vector<Provenance> provenance_;
};

/// Velocity at d x P spatial points and a common time, returned as d x P.
using VelocityFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& x, double t)>;

VelocityFn velocity_fn(const VelocityField& field);

/// One explicit Euler step x + dt V(x, t) followed by a componentwise clamp to
/// the domain. Throws NumericError with the point index on a non-finite velocity.
Eigen::MatrixXd evolve_points(const VelocityField& field, const Eigen::Ref<const Eigen::MatrixXd>& x, double t,
                              double dt, const Box& domain);
Eigen::MatrixXd evolve_points(const VelocityFn& velocity, const Eigen::Ref<const Eigen::MatrixXd>& x, double t,
                              double dt, const Box& domain);

/// Points for the slice after `from_slice`, at time(from_slice) + dt.
Eigen::MatrixXd evolve_slice(const Trajectory& traj, const VelocityField& field, Eigen::Index from_slice, double dt,
                             const Box& domain);

/// Header `t,x1,...,xd,kind,provenance`.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// none: samples move freely; wrap: the first coordinate is periodic on the box.
enum class BoundaryMode { none, wrap };

struct PushforwardReport {
  int bins = 0;
  /// max over bins of |count - n p| / sqrt(n p (1 - p))
  double max_sigma = 0.0;
  double max_abs_prob_diff = 0.0;
};

/// Transports n uniform samples of `box` through `steps` Euler steps of a
/// velocity that is affine in x at each time, and compares the histogram of
/// the first coordinate with the analytically pushed-forward density. The
/// composed map must not mix the first coordinate with the others.
PushforwardReport density_pushforward_check(const VelocityField& field, const Box& box, double t0, double dt,
                                            int n, int steps, int bins, BoundaryMode mode, std::uint64_t seed);
PushforwardReport density_pushforward_check(const VelocityFn& velocity, const Box& box, double t0, double dt, int n,
                                            int steps, int bins, BoundaryMode mode, std::uint64_t seed);

}  // namespace pmsm
