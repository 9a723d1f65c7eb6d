#pragma once

#include <functional>

#include <Eigen/Dense>

#include "pmsm/autodiff/dense_net.hpp"
#include "pmsm/autodiff/jet.hpp"
#include "pmsm/problems/problem.hpp"

namespace pmsm {

/// Training points of the solution loss with their supervision targets.
struct CollocationSets {
  Eigen::MatrixXd interior;  // (d+1) x P
  Eigen::MatrixXd initial;   // (d+1) x P0, all at the anchor time
  Eigen::VectorXd initial_target;
  Eigen::MatrixXd boundary;  // (d+1) x Pb
  Eigen::VectorXd boundary_target;
};

struct LossWeights {
  double lambda_0 = 1.0;
  double lambda_b = 1.0;
};

struct PinnLossParts {
  double interior = 0.0;
  double initial = 0.0;
  double boundary = 0.0;
  double total = 0.0;
  /// Set when the corresponding set is empty and its term was taken as 0.
  bool missing_initial = false;
  bool missing_boundary = false;
};

/// Jets of some scalar field at (d+1) x P points.
using JetEvaluator = std::function<JetBatch(const Eigen::MatrixXd& points, JetOrder order)>;

/// mean r^2 over the interior + lambda_0 mean (u - u0)^2 over the initial set
/// + lambda_b mean (u - g)^2 over the boundary set.
PinnLossParts pinn_loss(const JetEvaluator& field, const CollocationSets& sets, const PdeProblem& problem,
                        const LossWeights& weights);
PinnLossParts pinn_loss(const DenseNet& net, const CollocationSets& sets, const PdeProblem& problem,
                        const LossWeights& weights);

/// The same loss with its exact parameter gradient.
LossGrad pinn_loss_and_grad(const DenseNet& net, const CollocationSets& sets, const PdeProblem& problem,
                            const LossWeights& weights, const GradOptions& opts = {});

/// Analytic u0 at the spatial part of each column (time row ignored).
Eigen::VectorXd initial_targets(const PdeProblem& problem, const Eigen::Ref<const Eigen::MatrixXd>& points);
/// Dirichlet data at each space-time column.
Eigen::VectorXd boundary_targets(const PdeProblem& problem, const Eigen::Ref<const Eigen::MatrixXd>& points);

/// A frozen copy of the solution network anchored at t_start.
class ReferenceModel {
 public:
  ReferenceModel(DenseNet net, double t_start) : net_(std::move(net)), t_start_(t_start) {}

  const DenseNet& net() const { return net_; }
  double t_start() const { return t_start_; }
  /// u_hat(x, t_start) for d x n spatial points.
  Eigen::VectorXd values(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

 private:
  DenseNet net_;
  double t_start_;
};

}  // namespace pmsm
