#include "pmsm/autodiff/adam.hpp"

#include <cmath>
#include <string>

#include "pmsm/error.hpp"

namespace pmsm {

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
  if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ConfigError("adam: parameter, gradient and moment lengths differ (" + std::to_string(params.size()) +
                      ", " + std::to_string(grad.size()) + ", " + std::to_string(state.m.size()) + ")");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grad;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  params.array() -= c.learning_rate * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + c.epsilon);
}

}  // namespace pmsm
