#include "pmsm/autodiff/dense_net.hpp"

#include <cmath>
#include <string>

#include "pmsm/error.hpp"
#include "pmsm/random.hpp"

namespace pmsm {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

DenseNet::DenseNet(std::vector<int> layer_sizes, Activation activation)
    : layer_sizes_(std::move(layer_sizes)), activation_(activation) {
  if (layer_sizes_.size() < 2) throw ConfigError("a network needs at least two layer sizes");
  for (int s : layer_sizes_) {
    if (s <= 0) throw ConfigError("layer sizes must be positive");
  }
  Eigen::Index offset = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(offset);
    offset += Eigen::Index(layer_sizes_[l]) * layer_sizes_[l + 1] + layer_sizes_[l + 1];
  }
  params_ = Eigen::VectorXd::Zero(offset);
}

void DenseNet::set_params(const Eigen::VectorXd& p) {
  if (p.size() != params_.size()) {
    throw ConfigError("parameter vector has length " + std::to_string(p.size()) + ", expected " +
                      std::to_string(params_.size()));
  }
  params_ = p;
}

Eigen::Map<const RowMatrix> DenseNet::weight(int layer) const {
  return {params_.data() + weight_offset(layer), layer_sizes_[layer + 1], layer_sizes_[layer]};
}

Eigen::Map<RowMatrix> DenseNet::weight(int layer) {
  return {params_.data() + weight_offset(layer), layer_sizes_[layer + 1], layer_sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> DenseNet::bias(int layer) const {
  return {params_.data() + bias_offset(layer), layer_sizes_[layer + 1]};
}

Eigen::Map<Eigen::VectorXd> DenseNet::bias(int layer) {
  return {params_.data() + bias_offset(layer), layer_sizes_[layer + 1]};
}

DenseNet make_glorot_net(std::vector<int> layer_sizes, std::uint64_t seed) {
  DenseNet net(std::move(layer_sizes));
  Rng rng(seed);
  for (int l = 0; l < net.num_layers(); ++l) {
    const int fan_in = net.layer_sizes()[l];
    const int fan_out = net.layer_sizes()[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = net.weight(l);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    }
  }
  return net;
}

std::vector<int> solution_net_shape(int spatial_dim) { return {spatial_dim + 1, 64, 64, 64, 1}; }

std::vector<int> potential_net_shape(int spatial_dim) { return {spatial_dim + 1, 256, 1}; }

}  // namespace pmsm
