#include "pmsm/trainers/pinn_loss.hpp"

#include "pmsm/error.hpp"

namespace pmsm {

namespace {

void check_sets(const CollocationSets& s, int n_in) {
  if (s.interior.cols() == 0) throw ConfigError("pinn loss: empty interior set");
  if (s.interior.rows() != n_in || (s.initial.cols() > 0 && s.initial.rows() != n_in) ||
      (s.boundary.cols() > 0 && s.boundary.rows() != n_in)) {
    throw ConfigError("pinn loss: collocation points do not match the problem dimension");
  }
  if (s.initial_target.size() != s.initial.cols() || s.boundary_target.size() != s.boundary.cols()) {
    throw ConfigError("pinn loss: targets do not match their point sets");
  }
}

double mean_sq_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace

PinnLossParts pinn_loss(const JetEvaluator& field, const CollocationSets& sets, const PdeProblem& problem,
                        const LossWeights& weights) {
  check_sets(sets, problem.dim() + 1);
  PinnLossParts p;
  const JetBatch jb = field(sets.interior, JetOrder::laplacian);
  p.interior = residual_batch(problem, jb, sets.interior).squaredNorm() / static_cast<double>(sets.interior.cols());
  if (sets.initial.cols() > 0) {
    p.initial = mean_sq_diff(field(sets.initial, JetOrder::value).values, sets.initial_target);
  } else {
    p.missing_initial = true;
  }
  if (sets.boundary.cols() > 0) {
    p.boundary = mean_sq_diff(field(sets.boundary, JetOrder::value).values, sets.boundary_target);
  } else {
    p.missing_boundary = true;
  }
  p.total = p.interior + weights.lambda_0 * p.initial + weights.lambda_b * p.boundary;
  return p;
}

PinnLossParts pinn_loss(const DenseNet& net, const CollocationSets& sets, const PdeProblem& problem,
                        const LossWeights& weights) {
  return pinn_loss([&net](const Eigen::MatrixXd& pts, JetOrder order) { return forward_batch(net, pts, order); },
                   sets, problem, weights);
}

LossGrad pinn_loss_and_grad(const DenseNet& net, const CollocationSets& sets, const PdeProblem& problem,
                            const LossWeights& weights, const GradOptions& opts) {
  check_sets(sets, problem.dim() + 1);
  const double wi = 1.0 / static_cast<double>(sets.interior.cols());
  auto interior = [&](const JetBatch& jb, Eigen::Index offset, JetBatch& adj) {
    JetBatch partials;
    const auto pts = sets.interior.middleCols(offset, jb.size());
    const Eigen::VectorXd r = residual_batch(problem, jb, pts, &partials);
    for (Eigen::Index i = 0; i < jb.size(); ++i) {
      const double g = 2.0 * wi * r[i];
      adj.values[i] = g * partials.values[i];
      adj.grads.col(i) = g * partials.grads.col(i);
      adj.laps[i] = g * partials.laps[i];
    }
    return wi * r.squaredNorm();
  };
  GradOptions o = opts;
  o.order = JetOrder::laplacian;
  LossGrad out = loss_and_param_grad(net, sets.interior, interior, o);

  auto add_data_term = [&](const Eigen::MatrixXd& pts, const Eigen::VectorXd& target, double lambda) {
    if (pts.cols() == 0 || lambda == 0.0) return;
    const double w = lambda / static_cast<double>(pts.cols());
    auto term = [&](const JetBatch& jb, Eigen::Index offset, JetBatch& adj) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < jb.size(); ++i) {
        const double e = jb.values[i] - target[offset + i];
        s += w * e * e;
        adj.values[i] = 2.0 * w * e;
      }
      return s;
    };
    GradOptions ov = opts;
    ov.order = JetOrder::value;
    const LossGrad lg = loss_and_param_grad(net, pts, term, ov);
    out.loss += lg.loss;
    out.grad += lg.grad;
  };
  add_data_term(sets.initial, sets.initial_target, weights.lambda_0);
  add_data_term(sets.boundary, sets.boundary_target, weights.lambda_b);
  return out;
}

Eigen::VectorXd initial_targets(const PdeProblem& problem, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  const int d = problem.dim();
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) out[i] = problem.initial(points.col(i).head(d));
  return out;
}

Eigen::VectorXd boundary_targets(const PdeProblem& problem, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) out[i] = problem.boundary(points.col(i));
  return out;
}

Eigen::VectorXd ReferenceModel::values(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.rows() != net_.spatial_dim()) throw ConfigError("reference model: points have the wrong dimension");
  Eigen::MatrixXd st(x.rows() + 1, x.cols());
  st.topRows(x.rows()) = x;
  st.bottomRows(1).setConstant(t_start_);
  return forward_batch(net_, st, JetOrder::value).values;
}

}  // namespace pmsm
