#include "logistic.hpp"
#include "pmsm/problems/benchmarks.hpp"

namespace pmsm {

namespace {
constexpr int kDim = 6;
}

Burgers6d::Burgers6d(double alpha, double horizon)
    : PdeProblem(Box::cube(kDim, -3.0, 3.0), 0.0, horizon, ProblemParams{.alpha = alpha},
                 SeedDensity::grad_energy_u0, true) {}

double Burgers6d::residual_terms(double u, std::span<const double> grad, double lap, std::span<const double> point,
                                 JetPartials* partials) const {
  const double alpha = params().alpha;
  const double gp = g_rate(point[kDim]);
  double sum_ux = 0.0;
  for (int i = 0; i < kDim; ++i) sum_ux += grad[i];
  if (partials) {
    partials->value = gp * sum_ux;
    partials->grad.resize(kDim + 1);
    partials->grad.head(kDim).setConstant(gp * u);
    partials->grad[kDim] = 1.0;
    partials->lap = -gp * alpha;
  }
  return grad[kDim] - gp * (alpha * lap - u * sum_ux);
}

double Burgers6d::exact(Point p) const { return detail::logistic(front_functional(p) / (2.0 * params().alpha)).u; }

Jet Burgers6d::exact_jet(Point p) const {
  const double k = 1.0 / (2.0 * params().alpha);
  const auto [u, w] = detail::logistic(front_functional(p) * k);
  Jet j;
  j.value = u;
  j.grad.resize(kDim + 1);
  j.grad.head(kDim).setConstant(-k * w);
  j.grad[kDim] = 3.0 * g_rate(p[kDim]) * k * w;
  j.lap_x = kDim * k * k * w * (1.0 - 2.0 * u);
  return j;
}

Monitor Burgers6d::seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double k = 1.0 / (2.0 * params().alpha);
  const auto [u, w] = detail::logistic((x.sum() - 3.0 * g(t0())) * k);
  Monitor m;
  m.value = kDim * k * k * w * w;
  m.grad = Eigen::VectorXd::Constant(kDim, -2.0 * kDim * k * k * k * w * w * (1.0 - 2.0 * u));
  return m;
}

double Burgers6d::front_functional(Point p) const { return p.head(kDim).sum() - 3.0 * g(p[kDim]); }

}  // namespace pmsm
