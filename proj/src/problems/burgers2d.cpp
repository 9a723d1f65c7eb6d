#include "logistic.hpp"
#include "pmsm/problems/benchmarks.hpp"

namespace pmsm {

Burgers2d::Burgers2d(double alpha, double horizon)
    : PdeProblem(Box::cube(2, -1.0, 1.0), 0.0, horizon, ProblemParams{.alpha = alpha},
                 SeedDensity::grad_energy_u0, true) {}

double Burgers2d::residual_terms(double u, std::span<const double> grad, double lap, std::span<const double>,
                                 JetPartials* partials) const {
  const double alpha = params().alpha;
  const double ux = grad[0] + grad[1];
  if (partials) {
    partials->value = ux;
    partials->grad.resize(3);
    partials->grad << u, u, 1.0;
    partials->lap = -alpha;
  }
  return grad[2] - alpha * lap + u * ux;
}

double Burgers2d::exact(Point p) const {
  return detail::logistic((p[0] + p[1] - p[2]) / (2.0 * params().alpha)).u;
}

Jet Burgers2d::exact_jet(Point p) const {
  const double k = 1.0 / (2.0 * params().alpha);
  const auto [u, w] = detail::logistic((p[0] + p[1] - p[2]) * k);
  Jet j;
  j.value = u;
  j.grad.resize(3);
  j.grad << -k * w, -k * w, k * w;
  j.lap_x = 2.0 * k * k * w * (1.0 - 2.0 * u);
  return j;
}

Monitor Burgers2d::seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double k = 1.0 / (2.0 * params().alpha);
  const auto [u, w] = detail::logistic((x[0] + x[1] - t0()) * k);
  Monitor m;
  m.value = 2.0 * k * k * w * w;
  m.grad = Eigen::Vector2d::Constant(-4.0 * k * k * k * w * w * (1.0 - 2.0 * u));
  return m;
}

double Burgers2d::front_functional(Point p) const { return p[0] + p[1] - p[2]; }

}  // namespace pmsm
