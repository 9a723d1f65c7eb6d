#include "pmsm/transport/velocity.hpp"

#include <cmath>

#include "pmsm/error.hpp"

namespace pmsm {

VelocityField::VelocityField(DenseNet potential) : potential_(std::move(potential)) {
  if (potential_.layer_sizes().back() != 1) throw ConfigError("velocity potential must have one output");
}

VelocityField VelocityField::glorot(int spatial_dim, std::uint64_t seed) {
  return VelocityField(make_glorot_net(potential_net_shape(spatial_dim), seed));
}

Velocity velocity_at(const VelocityField& field, Point point) {
  const Jet j = forward_extended(field.potential(), point);
  return {j.grad.head(field.spatial_dim()), j.lap_x};
}

VelocityBatch velocity_batch(const VelocityField& field, const Eigen::Ref<const Eigen::MatrixXd>& points,
                             bool with_divergence) {
  const JetBatch jb =
      forward_batch(field.potential(), points, with_divergence ? JetOrder::laplacian : JetOrder::gradient);
  VelocityBatch out;
  out.v = jb.grads.topRows(field.spatial_dim());
  if (with_divergence) out.div = jb.laps;
  return out;
}

VelocityLossTerms pmsm_velocity_terms(const Eigen::Ref<const Eigen::MatrixXd>& points, const ResidualDataBatch& rd) {
  const Eigen::Index n = points.cols();
  if (n == 0) throw ConfigError("pmsm velocity loss: empty batch");
  if (rd.size() != n || rd.grad_r.rows() != points.rows() - 1) {
    throw ConfigError("pmsm velocity loss: residual data does not match the points");
  }
  VelocityLossTerms t;
  t.points = points;
  t.a = 2.0 * rd.dr_dt;
  t.b = 2.0 * rd.grad_r;
  t.c = rd.r;
  t.weight = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return t;
}

VelocityLossTerms msm_velocity_terms(std::span<const SlicePair> pairs, double volume) {
  if (pairs.empty()) throw ConfigError("msm velocity loss: no slice pairs");
  if (!(volume > 0)) throw ConfigError("msm velocity loss: domain volume must be positive");
  Eigen::Index total = 0;
  const Eigen::Index rows = pairs.front().points.rows();
  for (const auto& p : pairs) {
    const Eigen::Index n = p.points.cols();
    if (n == 0) throw ConfigError("msm velocity loss: empty slice");
    if (p.points.rows() != rows || p.current.size() != n || p.r_next.size() != n) {
      throw ConfigError("msm velocity loss: slice pair shapes disagree");
    }
    if (!(p.dt > 0)) throw ConfigError("msm velocity loss: slice spacing must be positive");
    total += n;
  }
  VelocityLossTerms t;
  t.points.resize(rows, total);
  t.a.resize(total);
  t.b.resize(rows - 1, total);
  t.c.resize(total);
  t.weight.resize(total);
  Eigen::Index at = 0;
  for (const auto& p : pairs) {
    const Eigen::Index n = p.points.cols();
    const double integral = volume * p.current.r.squaredNorm() / static_cast<double>(n);
    const double integral_next = volume * p.r_next.squaredNorm() / static_cast<double>(n);
    const bool degenerate = integral < kDegenerateResidualFloor;
    const double ratio = degenerate ? 0.0 : ((integral_next - integral) / p.dt) / integral;
    t.degenerate_pairs.push_back(degenerate ? 1 : 0);
    t.points.middleCols(at, n) = p.points;
    t.a.segment(at, n) = 2.0 * p.current.dr_dt - ratio * p.current.r;
    t.b.middleCols(at, n) = 2.0 * p.current.grad_r;
    t.c.segment(at, n) = p.current.r;
    t.weight.segment(at, n).setConstant(1.0 / static_cast<double>(n));
    at += n;
  }
  return t;
}

namespace {

void check_terms(const VelocityField& field, const VelocityLossTerms& t) {
  const Eigen::Index n = t.size();
  if (n == 0) throw ConfigError("velocity loss: empty batch");
  if (t.points.rows() != field.spatial_dim() + 1 || t.points.cols() != n || t.b.rows() != field.spatial_dim() ||
      t.b.cols() != n || t.c.size() != n || t.weight.size() != n) {
    throw ConfigError("velocity loss: terms do not match the potential network");
  }
}

}  // namespace

double velocity_loss(const VelocityField& field, const VelocityLossTerms& t) {
  check_terms(field, t);
  const JetBatch jb = forward_batch(field.potential(), t.points, JetOrder::laplacian);
  const int d = field.spatial_dim();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double e = t.a[i] + t.b.col(i).dot(jb.grads.col(i).head(d)) + t.c[i] * jb.laps[i];
    loss += t.weight[i] * e * e;
  }
  return loss;
}

LossGrad velocity_loss_and_grad(const VelocityField& field, const VelocityLossTerms& t, const GradOptions& opts) {
  check_terms(field, t);
  const int d = field.spatial_dim();
  auto loss = [&t, d](const JetBatch& jb, Eigen::Index offset, JetBatch& adj) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < jb.size(); ++i) {
      const Eigen::Index g = offset + i;
      const double e = t.a[g] + t.b.col(g).dot(jb.grads.col(i).head(d)) + t.c[g] * jb.laps[i];
      const double w = t.weight[g];
      s += w * e * e;
      adj.grads.col(i).head(d) = 2.0 * w * e * t.b.col(g);
      adj.laps[i] = 2.0 * w * e * t.c[g];
    }
    return s;
  };
  GradOptions o = opts;
  o.order = JetOrder::laplacian;
  return loss_and_param_grad(field.potential(), t.points, loss, o);
}

double pmsm_velocity_loss(const VelocityField& field, const Eigen::Ref<const Eigen::MatrixXd>& points,
                          const ResidualDataBatch& rd) {
  return velocity_loss(field, pmsm_velocity_terms(points, rd));
}

double msm_velocity_loss(const VelocityField& field, std::span<const SlicePair> pairs, double volume) {
  return velocity_loss(field, msm_velocity_terms(pairs, volume));
}

namespace {

Eigen::MatrixXd boundary_normals(const PointSet& boundary, const Box& domain) {
  const int d = domain.dim();
  if (boundary.spatial_dim() != d) throw ConfigError("neumann penalty: boundary points have the wrong dimension");
  const bool tagged = boundary.faces.size() == static_cast<std::size_t>(boundary.size());
  Eigen::MatrixXd normals(d, boundary.size());
  for (Eigen::Index i = 0; i < boundary.size(); ++i) {
    const auto x = boundary.points.col(i).head(d);
    int face = tagged ? boundary.faces[static_cast<std::size_t>(i)] : domain.face_of(x);
    if (face < 0 || !domain.on_face(x, face)) {
      throw DomainError("neumann penalty: boundary point " + std::to_string(i) + " lies on no face of the domain");
    }
    normals.col(i) = domain.outward_normal(face);
  }
  return normals;
}

}  // namespace

double neumann_penalty(const VelocityField& field, const PointSet& boundary, const Box& domain) {
  if (boundary.empty()) throw ConfigError("neumann penalty: empty boundary batch");
  const Eigen::MatrixXd normals = boundary_normals(boundary, domain);
  const VelocityBatch vb = velocity_batch(field, boundary.points, false);
  return (vb.v.cwiseProduct(normals)).colwise().sum().squaredNorm() / static_cast<double>(boundary.size());
}

LossGrad neumann_penalty_and_grad(const VelocityField& field, const PointSet& boundary, const Box& domain,
                                  const GradOptions& opts) {
  if (boundary.empty()) throw ConfigError("neumann penalty: empty boundary batch");
  const Eigen::MatrixXd normals = boundary_normals(boundary, domain);
  const int d = domain.dim();
  const double w = 1.0 / static_cast<double>(boundary.size());
  auto loss = [&normals, d, w](const JetBatch& jb, Eigen::Index offset, JetBatch& adj) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < jb.size(); ++i) {
      const auto n = normals.col(offset + i);
      const double vn = jb.grads.col(i).head(d).dot(n);
      s += w * vn * vn;
      adj.grads.col(i).head(d) = 2.0 * w * vn * n;
    }
    return s;
  };
  GradOptions o = opts;
  o.order = JetOrder::gradient;
  return loss_and_param_grad(field.potential(), boundary.points, loss, o);
}

}  // namespace pmsm
