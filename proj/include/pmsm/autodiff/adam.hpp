#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace pmsm {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for bias-corrected Adam.
struct AdamState {
  AdamConfig config;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(Eigen::Index num_params, AdamConfig cfg = {})
      : config(cfg), m(Eigen::VectorXd::Zero(num_params)), v(Eigen::VectorXd::Zero(num_params)) {}
};

/// One in-place Adam update of `params`. Throws ConfigError on length mismatch.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);

}  // namespace pmsm
