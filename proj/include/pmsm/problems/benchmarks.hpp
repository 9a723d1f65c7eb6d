#pragma once

#include "pmsm/problems/problem.hpp"

namespace pmsm {

/// u_t = alpha (u_xx + u_yy) - u (u_x + u_y) on [-1,1]^2, traveling front x + y = t.
class Burgers2d final : public PdeProblem {
 public:
  explicit Burgers2d(double alpha = 0.001, double horizon = 1.05);
  std::string_view name() const override { return "burgers2d"; }
  double residual_terms(double u, std::span<const double> grad, double lap, std::span<const double> point,
                        JetPartials* partials) const override;
  double exact(Point point) const override;
  Jet exact_jet(Point point) const override;
  Monitor seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  /// x + y - t
  double front_functional(Point point) const override;
};

/// u_t - u_xx - u_yy = f with a Gaussian peak moving along (t, t^2) whose
/// amplitude grows from C0 toward Cinf.
class Parabolic2d final : public PdeProblem {
 public:
  Parabolic2d(double alpha = 0.01, double c0 = 1.0, double cinf = 4.0, double beta = 2.0, double horizon = 1.55);
  std::string_view name() const override { return "parabolic2d"; }
  double residual_terms(double u, std::span<const double> grad, double lap, std::span<const double> point,
                        JetPartials* partials) const override;
  /// f = u*_t - lap u* from hand-derived derivatives of the exact solution.
  double forcing(Point point) const override;
  double exact(Point point) const override;
  Jet exact_jet(Point point) const override;
  Monitor seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  /// Distance from (x, y) to the peak center (t, t^2).
  double front_functional(Point point) const override;

  double amplitude(double t) const;
  double amplitude_rate(double t) const;
};

/// Fokker-Planck equation u_t = -div(f u) + (sigma^2/2) lap u whose density
/// concentrates on a sphere of radius r centered at exp(-t)(1,1,1).
class FokkerPlanck3d final : public PdeProblem {
 public:
  /// `qmc_points` controls the Halton estimate of the normalizer K.
  explicit FokkerPlanck3d(double sigma = 0.1, double radius = 1.0, double horizon = 1.15,
                          int qmc_points = 1 << 20);
  std::string_view name() const override { return "fokker_planck3d"; }
  double residual_terms(double u, std::span<const double> grad, double lap, std::span<const double> point,
                        JetPartials* partials) const override;
  double exact(Point point) const override;
  Jet exact_jet(Point point) const override;
  Monitor seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  /// | |x - exp(-t) 1| - r |
  double front_functional(Point point) const override;

  double normalizer() const { return normalizer_; }
  /// Drift f(x, t) and its divergence.
  Eigen::Vector3d drift(Point point) const;
  double drift_divergence(Point point) const;

 private:
  double unnormalized(const Eigen::Vector3d& s) const;
  double normalizer_ = 1.0;
};

/// u_t = g'(t) (alpha lap u - u sum_i u_{x_i}) in six dimensions with
/// g(t) = t / (1 + t); the front is sum_i x_i = 3 g(t).
class Burgers6d final : public PdeProblem {
 public:
  explicit Burgers6d(double alpha = 0.01, double horizon = 1.05);
  std::string_view name() const override { return "burgers6d"; }
  double residual_terms(double u, std::span<const double> grad, double lap, std::span<const double> point,
                        JetPartials* partials) const override;
  double exact(Point point) const override;
  Jet exact_jet(Point point) const override;
  Monitor seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  /// sum_i x_i - 3 g(t)
  double front_functional(Point point) const override;

  static double g(double t) { return t / (1.0 + t); }
  static double g_rate(double t) { return 1.0 / ((1.0 + t) * (1.0 + t)); }
};

}  // namespace pmsm
