#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pmsm/problems/problem.hpp"
#include "pmsm/random.hpp"

namespace pmsm {

enum class PointKind { interior, initial, boundary, adaptive };

std::string_view to_string(PointKind kind);

/// Space-time points stored column-wise as (x_1, ..., x_d, t).
struct PointSet {
  Eigen::MatrixXd points;  // (d+1) x n
  PointKind kind = PointKind::interior;
  /// Face index per point for boundary sets (see Box), empty otherwise.
  std::vector<int> faces;

  Eigen::Index size() const { return points.cols(); }
  int spatial_dim() const { return static_cast<int>(points.rows()) - 1; }
  bool empty() const { return points.cols() == 0; }
};

/// Columns [first, first + count) as a new set of the same kind.
PointSet slice_columns(const PointSet& set, Eigen::Index first, Eigen::Index count);
/// Concatenates sets of equal dimension; the kind of the first set is kept.
PointSet concat(std::span<const PointSet> sets);

/// n uniform spatial draws in the domain, repeated at every time in `times`
/// (slice-major order: all points of times[0], then times[1], ...).
PointSet uniform_interior(const PdeProblem& problem, Eigen::Index n_per_slice, std::span<const double> times,
                          Rng& rng);

/// n boundary points: a face is picked with probability proportional to its
/// measure, then a uniform point on it. The same spatial points repeat at
/// every time in `times`.
PointSet uniform_boundary(const PdeProblem& problem, Eigen::Index n_per_slice, std::span<const double> times,
                          Rng& rng);

/// n uniform spatial draws at t = t0.
PointSet uniform_initial(const PdeProblem& problem, Eigen::Index n, Rng& rng);

/// Every point inside the closed space-time domain, initial points at t0 and
/// boundary points on their tagged face.
bool valid_point_set(const PdeProblem& problem, const PointSet& set);

/// Delimited text with header `t,x1,...,xd,kind`, one point per row.
void write_point_csv(std::ostream& out, std::span<const PointSet> sets);

}  // namespace pmsm
