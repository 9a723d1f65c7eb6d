#include <cmath>

#include "pmsm/error.hpp"
#include "pmsm/problems/benchmarks.hpp"

namespace pmsm {

namespace {

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

Eigen::Vector3d shell_offset(Point p) { return p.head<3>().array() - std::exp(-p[3]); }

}  // namespace

FokkerPlanck3d::FokkerPlanck3d(double sigma, double radius, double horizon, int qmc_points)
    : PdeProblem(Box::cube(3, 0.0, 2.1), 0.0, horizon, ProblemParams{.sigma = sigma, .radius = radius},
                 SeedDensity::abs_u0, false) {
  if (qmc_points < 1) throw ConfigError("fokker_planck3d: qmc_points must be positive");
  // Halton points in bases 2, 3, 5 (index 0 skipped), mapped onto the domain.
  const Box& box = domain();
  const Eigen::Vector3d centre = Eigen::Vector3d::Constant(std::exp(-t0()));
  double sum = 0.0;
  for (int i = 1; i <= qmc_points; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    Eigen::Vector3d x(radical_inverse(k, 2), radical_inverse(k, 3), radical_inverse(k, 5));
    x = box.lo.array() + x.array() * (box.hi - box.lo).array();
    sum += unnormalized(x - centre);
  }
  normalizer_ = box.volume() * sum / qmc_points;
  if (!(normalizer_ > 0.0)) throw NumericError("fokker_planck3d: normalizer underflowed to zero");
}

double FokkerPlanck3d::unnormalized(const Eigen::Vector3d& s) const {
  const double sigma = params().sigma, r = params().radius;
  const double q = s.squaredNorm() - r * r;
  return std::exp(-2.0 / (sigma * sigma) * q * q);
}

Eigen::Vector3d FokkerPlanck3d::drift(Point p) const {
  const Eigen::Vector3d s = shell_offset(p);
  const double q = s.squaredNorm() - params().radius * params().radius;
  return (-4.0 * q * s).array() - std::exp(-p[3]);
}

double FokkerPlanck3d::drift_divergence(Point p) const {
  const double r = params().radius;
  return -4.0 * (5.0 * shell_offset(p).squaredNorm() - 3.0 * r * r);
}

double FokkerPlanck3d::residual_terms(double u, std::span<const double> grad, double lap,
                                      std::span<const double> point, JetPartials* partials) const {
  const Eigen::Map<const Eigen::Vector4d> p(point.data());
  const Eigen::Vector3d f = drift(p);
  const double div_f = drift_divergence(p);
  const double diff = 0.5 * params().sigma * params().sigma;
  const Eigen::Map<const Eigen::Vector3d> ux(grad.data());
  if (partials) {
    partials->value = div_f;
    partials->grad.resize(4);
    partials->grad << f, 1.0;
    partials->lap = -diff;
  }
  return grad[3] + u * div_f + f.dot(ux) - diff * lap;
}

double FokkerPlanck3d::exact(Point p) const { return unnormalized(shell_offset(p)) / normalizer_; }

Jet FokkerPlanck3d::exact_jet(Point p) const {
  const double sigma = params().sigma, r = params().radius;
  const double a = -2.0 / (sigma * sigma);
  const Eigen::Vector3d s = shell_offset(p);
  const double s2 = s.squaredNorm(), q = s2 - r * r;
  const double u = std::exp(a * q * q) / normalizer_;
  Jet j;
  j.value = u;
  j.grad.resize(4);
  j.grad.head<3>() = 4.0 * a * q * u * s;
  j.grad[3] = 4.0 * a * q * u * std::exp(-p[3]) * s.sum();
  j.lap_x = 4.0 * a * u * (2.0 * s2 + 3.0 * q + 4.0 * a * q * q * s2);
  return j;
}

Monitor FokkerPlanck3d::seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::Vector4d p(x[0], x[1], x[2], t0());
  const Jet j = exact_jet(p);
  return {j.value, j.grad.head(3)};
}

double FokkerPlanck3d::front_functional(Point p) const {
  return std::abs(shell_offset(p).norm() - params().radius);
}

}  // namespace pmsm
