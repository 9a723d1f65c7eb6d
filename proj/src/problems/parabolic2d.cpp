#include <cmath>

#include "pmsm/problems/benchmarks.hpp"

namespace pmsm {

Parabolic2d::Parabolic2d(double alpha, double c0, double cinf, double beta, double horizon)
    : PdeProblem(Box::cube(2, -0.2, 2.5), 0.0, horizon,
                 ProblemParams{.alpha = alpha, .c0 = c0, .cinf = cinf, .beta = beta}, SeedDensity::abs_u0, false) {}

double Parabolic2d::amplitude(double t) const {
  const auto& p = params();
  return p.cinf - (p.cinf - p.c0) * std::exp(-p.beta * t);
}

double Parabolic2d::amplitude_rate(double t) const {
  const auto& p = params();
  return p.beta * (p.cinf - p.c0) * std::exp(-p.beta * t);
}

double Parabolic2d::residual_terms(double, std::span<const double> grad, double lap, std::span<const double> point,
                                   JetPartials* partials) const {
  if (partials) {
    partials->value = 0.0;
    partials->grad = Eigen::Vector3d(0.0, 0.0, 1.0);
    partials->lap = -1.0;
  }
  return grad[2] - lap - forcing(Eigen::Map<const Eigen::Vector3d>(point.data()));
}

double Parabolic2d::forcing(Point p) const {
  const Jet j = exact_jet(p);
  return j.grad[2] - j.lap_x;
}

double Parabolic2d::exact(Point p) const {
  const double t = p[2], dx = p[0] - t, dy = p[1] - t * t;
  return amplitude(t) * std::exp(-(dx * dx + dy * dy) / params().alpha);
}

Jet Parabolic2d::exact_jet(Point p) const {
  const double alpha = params().alpha;
  const double t = p[2], dx = p[0] - t, dy = p[1] - t * t;
  const double e = std::exp(-(dx * dx + dy * dy) / alpha);
  const double u = amplitude(t) * e;
  Jet j;
  j.value = u;
  j.grad.resize(3);
  j.grad[0] = -2.0 * dx / alpha * u;
  j.grad[1] = -2.0 * dy / alpha * u;
  j.grad[2] = amplitude_rate(t) * e + u * (2.0 * dx + 4.0 * t * dy) / alpha;
  j.lap_x = u * (4.0 * (dx * dx + dy * dy) / (alpha * alpha) - 4.0 / alpha);
  return j;
}

Monitor Parabolic2d::seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::Vector3d p(x[0], x[1], t0());
  const Jet j = exact_jet(p);
  Monitor m;
  m.value = std::abs(j.value);
  m.grad = (j.value >= 0 ? 1.0 : -1.0) * j.grad.head(2);
  return m;
}

double Parabolic2d::front_functional(Point p) const {
  const double t = p[2];
  return std::hypot(p[0] - t, p[1] - t * t);
}

}  // namespace pmsm
