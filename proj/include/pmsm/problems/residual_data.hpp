#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pmsm/autodiff/dense_net.hpp"
#include "pmsm/problems/problem.hpp"

namespace pmsm {

inline constexpr double kResidualFdStep = 1e-4;

/// Residual r and its spatial gradient and time derivative at one point, on a
/// frozen solution network.
struct ResidualData {
  double r = 0.0;
  Eigen::VectorXd grad_r;  // length d
  double dr_dt = 0.0;
  bool one_sided = false;
};

/// The same quantities for P points, column-aligned with the input points.
struct ResidualDataBatch {
  Eigen::VectorXd r;       // P
  Eigen::MatrixXd grad_r;  // d x P
  Eigen::VectorXd dr_dt;   // P
  /// 1 where any coordinate used a one-sided stencil.
  std::vector<std::uint8_t> one_sided;

  Eigen::Index size() const { return r.size(); }
  ResidualData at(Eigen::Index i) const;
};

/// Batched residual evaluation over (d+1) x P space-time points.
using ResidualField = std::function<Eigen::VectorXd(const Eigen::MatrixXd& points)>;

/// Differentiates `field` by second-order central differences with step `h`
/// in every coordinate of `space_time` (spatial axes then t). Where a stencil
/// would leave the box, the second-order one-sided formula pointing inward is
/// used and the point is flagged.
ResidualDataBatch residual_data(const ResidualField& field, const Box& space_time,
                                const Eigen::Ref<const Eigen::MatrixXd>& points, double h = kResidualFdStep);

/// Residual field of `problem` on the network `net`.
ResidualField residual_field(const PdeProblem& problem, const DenseNet& net);

/// domain x [t0, T]
Box space_time_box(const PdeProblem& problem);

ResidualDataBatch residual_data(const PdeProblem& problem, const DenseNet& net,
                                const Eigen::Ref<const Eigen::MatrixXd>& points, double h = kResidualFdStep);
ResidualData residual_data_at(const PdeProblem& problem, const DenseNet& net, Point point,
                              double h = kResidualFdStep);

}  // namespace pmsm
