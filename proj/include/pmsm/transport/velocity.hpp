#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pmsm/autodiff/dense_net.hpp"
#include "pmsm/autodiff/jet.hpp"
#include "pmsm/problems/residual_data.hpp"
#include "pmsm/sampling/point_set.hpp"

namespace pmsm {

/// Velocity V = grad_x psi of a scalar potential network psi(x, t). V is
/// curl-free by construction; div V is the spatial Laplacian of psi.
class VelocityField {
 public:
  explicit VelocityField(DenseNet potential);
  /// Glorot-initialized potential of shape potential_net_shape(d).
  static VelocityField glorot(int spatial_dim, std::uint64_t seed);

  const DenseNet& potential() const { return potential_; }
  DenseNet& potential() { return potential_; }
  int spatial_dim() const { return potential_.spatial_dim(); }

 private:
  DenseNet potential_;
};

struct Velocity {
  Eigen::VectorXd v;
  double div = 0.0;
};

struct VelocityBatch {
  Eigen::MatrixXd v;    // d x P
  Eigen::VectorXd div;  // P, empty unless requested
};

Velocity velocity_at(const VelocityField& field, Point point);
VelocityBatch velocity_batch(const VelocityField& field, const Eigen::Ref<const Eigen::MatrixXd>& points,
                             bool with_divergence = true);

/// Weighted least squares in the potential's jets:
///   loss = sum_i w_i (a_i + b_i . grad_x psi(p_i) + c_i lap_x psi(p_i))^2
/// Both velocity losses reduce to this form with frozen coefficients.
struct VelocityLossTerms {
  Eigen::MatrixXd points;  // (d+1) x P
  Eigen::VectorXd a;       // P
  Eigen::MatrixXd b;       // d x P
  Eigen::VectorXd c;       // P
  Eigen::VectorXd weight;  // P
  /// MSM only: one flag per slice pair whose normalization was dropped.
  std::vector<std::uint8_t> degenerate_pairs;

  Eigen::Index size() const { return a.size(); }
};

/// Mean over the batch of (2 dr/dt + 2 grad r . grad psi + r lap psi)^2.
VelocityLossTerms pmsm_velocity_terms(const Eigen::Ref<const Eigen::MatrixXd>& points, const ResidualDataBatch& rd);

/// One slice pair: residual data at t_i on `points`, and residual values at
/// t_{i+1} on the same spatial points.
struct SlicePair {
  Eigen::MatrixXd points;  // (d+1) x n at t_i
  ResidualDataBatch current;
  Eigen::VectorXd r_next;  // n
  double dt = 0.0;
};

inline constexpr double kDegenerateResidualFloor = 1e-12;

/// Sum over pairs of the per-pair mean of
///   (2 dr/dt + 2 grad r . grad psi + r lap psi - r G / I)^2,
/// with I = volume * mean(r_i^2) and G = volume * (mean(r_{i+1}^2) - mean(r_i^2)) / dt.
/// Pairs with I below kDegenerateResidualFloor drop the G term and are flagged.
VelocityLossTerms msm_velocity_terms(std::span<const SlicePair> pairs, double volume);

double velocity_loss(const VelocityField& field, const VelocityLossTerms& terms);
LossGrad velocity_loss_and_grad(const VelocityField& field, const VelocityLossTerms& terms,
                                const GradOptions& opts = {});

double pmsm_velocity_loss(const VelocityField& field, const Eigen::Ref<const Eigen::MatrixXd>& points,
                          const ResidualDataBatch& rd);
double msm_velocity_loss(const VelocityField& field, std::span<const SlicePair> pairs, double volume);

/// Mean of (V . n)^2 over boundary points, n the outward normal of each
/// point's tagged face (or the first face it lies on when untagged). Throws
/// DomainError for points on no face.
double neumann_penalty(const VelocityField& field, const PointSet& boundary, const Box& domain);
LossGrad neumann_penalty_and_grad(const VelocityField& field, const PointSet& boundary, const Box& domain,
                                  const GradOptions& opts = {});

}  // namespace pmsm
