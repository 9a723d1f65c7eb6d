#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "pmsm/autodiff/dense_net.hpp"

namespace pmsm {

/// Value, full input gradient and spatial Laplacian of a scalar network at one
/// space-time point. `grad` has one entry per input (spatial coordinates then
/// t); `lap_x` sums second derivatives over the spatial inputs only.
struct Jet {
  double value = 0.0;
  Eigen::VectorXd grad;
  double lap_x = 0.0;
};

/// How much of the jet to propagate. Lower orders skip the Jacobian carriers.
enum class JetOrder { value = 0, gradient = 1, laplacian = 2 };

/// Jets for a batch of P points, stored column-wise.
struct JetBatch {
  Eigen::VectorXd values;  // P
  Eigen::MatrixXd grads;   // (d+1) x P, empty for JetOrder::value
  Eigen::VectorXd laps;    // P, empty unless JetOrder::laplacian

  Eigen::Index size() const { return values.size(); }
  Jet at(Eigen::Index i) const;
  void resize(Eigen::Index points, int input_dim, JetOrder order);
  void set_zero();
};

Jet forward_extended(const DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& point);

/// `points` is (d+1) x P.
JetBatch forward_batch(const DenseNet& net, const Eigen::Ref<const Eigen::MatrixXd>& points,
                       JetOrder order = JetOrder::laplacian);

/// A loss that decomposes over points. Called once per chunk with the jets of
/// points [offset, offset + jets.size()); must return the chunk's contribution
/// to the total loss and fill `adjoint` with d(contribution)/d(jet entries).
/// `adjoint` arrives zeroed and shaped like `jets`.
using PointwiseJetLoss =
    std::function<double(const JetBatch& jets, Eigen::Index offset, JetBatch& adjoint)>;

struct GradOptions {
  JetOrder order = JetOrder::laplacian;
  /// Points per chunk; bounds the working set of the Jacobian carriers.
  Eigen::Index chunk = 256;
  /// Worker threads. Chunk gradients are always reduced in chunk order, so
  /// results are bit-identical for any thread count.
  int threads = 1;
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;  // aligned with DenseNet::params()
};

/// Loss and its exact parameter gradient, by reverse accumulation through the
/// jet propagation (including the per-layer Jacobian and Laplacian carriers).
/// Throws NumericError with the global point index on a non-finite jet,
/// contribution or adjoint.
LossGrad loss_and_param_grad(const DenseNet& net, const Eigen::Ref<const Eigen::MatrixXd>& points,
                             const PointwiseJetLoss& loss, const GradOptions& opts = {});

}  // namespace pmsm
