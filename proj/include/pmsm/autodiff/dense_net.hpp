#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pmsm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { tanh };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Fully connected feedforward network with tanh hidden layers and an
/// identity output layer.
///
/// Inputs are space-time coordinates ordered (x_1, ..., x_d, t), so the last
/// input is always time. All parameters live in a single flat vector with the
/// following fixed ordering, layer by layer from the input side:
///
///   W^(l) in row-major order (entry [i][j] couples input j to output i),
///   then b^(l).
///
/// This ordering is shared by the optimizer, gradients and checkpoints.
class DenseNet {
 public:
  DenseNet() = default;
  /// Zero-initialized network with the given layer widths.
  explicit DenseNet(std::vector<int> layer_sizes, Activation activation = Activation::tanh);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Activation activation() const { return activation_; }
  int num_layers() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  int input_dim() const { return layer_sizes_.front(); }
  int spatial_dim() const { return input_dim() - 1; }
  Eigen::Index num_params() const { return params_.size(); }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }
  void set_params(const Eigen::VectorXd& p);

  Eigen::Map<const RowMatrix> weight(int layer) const;
  Eigen::Map<RowMatrix> weight(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);

  Eigen::Index weight_offset(int layer) const { return offsets_[layer]; }
  Eigen::Index bias_offset(int layer) const {
    return offsets_[layer] + Eigen::Index(layer_sizes_[layer]) * layer_sizes_[layer + 1];
  }

  bool all_finite() const { return params_.allFinite(); }

 private:
  std::vector<int> layer_sizes_;
  Activation activation_ = Activation::tanh;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

/// Glorot-uniform weights, zero biases, drawn from a seeded stream.
DenseNet make_glorot_net(std::vector<int> layer_sizes, std::uint64_t seed);

/// [d+1, 64, 64, 64, 1]
std::vector<int> solution_net_shape(int spatial_dim);
/// [d+1, 256, 1]
std::vector<int> potential_net_shape(int spatial_dim);

}  // namespace pmsm
