#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fd_oracle.hpp"
#include "pmsm/error.hpp"
#include "pmsm/problems/benchmarks.hpp"
#include "pmsm/problems/problem.hpp"

namespace pmsm {
namespace {

using testing::rel_err;

Eigen::VectorXd random_space_time(const PdeProblem& p, std::mt19937_64& rng) {
  const int d = p.dim();
  Eigen::VectorXd x(d + 1);
  for (int k = 0; k < d; ++k) {
    x[k] = std::uniform_real_distribution<double>(p.domain().lo[k], p.domain().hi[k])(rng);
  }
  x[d] = std::uniform_real_distribution<double>(p.t0(), p.horizon())(rng);
  return x;
}

// Interior points biased toward the front, where derivatives are large.
Eigen::VectorXd near_front(const PdeProblem& p, std::mt19937_64& rng) {
  Eigen::VectorXd x = random_space_time(p, rng);
  std::normal_distribution<double> n(0.0, 0.05);
  const int d = p.dim();
  const double t = x[d];
  if (p.name() == "burgers2d") {
    x[1] = t - x[0] + n(rng) * 0.1;
  } else if (p.name() == "burgers6d") {
    x[5] = 3.0 * Burgers6d::g(t) - x.head(5).sum() + n(rng);
  } else if (p.name() == "parabolic2d") {
    x[0] = t + n(rng);
    x[1] = t * t + n(rng);
  } else {
    Eigen::Vector3d dir(n(rng), n(rng), n(rng));
    dir.normalize();
    x.head(3) = Eigen::Vector3d::Constant(std::exp(-t)) + (1.0 + 0.3 * n(rng)) * dir;
  }
  p.domain().clamp(x.head(d));
  return x;
}

class AllProblems : public ::testing::TestWithParam<ProblemId> {
 protected:
  void SetUp() override { problem = make_problem(GetParam()); }
  std::unique_ptr<PdeProblem> problem;
};

TEST_P(AllProblems, ExactJetMatchesFiniteDifferencesOfExact) {
  std::mt19937_64 rng(31);
  auto f = [&](const Eigen::VectorXd& x) { return problem->exact(x); };
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::VectorXd p = trial % 2 ? random_space_time(*problem, rng) : near_front(*problem, rng);
    // keep the stencil inside the time interval
    p[problem->dim()] = std::clamp(p[problem->dim()], 0.01, problem->horizon() - 0.01);
    const Jet j = problem->exact_jet(p);
    const double scale = 1.0 + j.grad.cwiseAbs().maxCoeff();
    EXPECT_LE(std::abs(j.value - problem->exact(p)), 1e-12 * std::abs(j.value));
    const Eigen::VectorXd g = testing::fd_gradient4(f, p, 1e-5);
    for (int k = 0; k <= problem->dim(); ++k) EXPECT_LT(std::abs(j.grad[k] - g[k]) / scale, 1e-7) << "k=" << k;
    const double lap = testing::fd_laplacian4(f, p, problem->dim(), 1e-4);
    EXPECT_LT(std::abs(j.lap_x - lap) / (1.0 + std::abs(j.lap_x) + scale), 1e-5);
  }
}

TEST_P(AllProblems, ExactSolutionHasNegligibleResidual) {
  std::mt19937_64 rng(1000);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd p = trial % 2 ? random_space_time(*problem, rng) : near_front(*problem, rng);
    worst = std::max(worst, std::abs(problem->residual(problem->exact_jet(p), p)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST_P(AllProblems, BoundaryEqualsExactOnFaces) {
  std::mt19937_64 rng(5);
  for (int face = 0; face < problem->domain().num_faces(); ++face) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd p = random_space_time(*problem, rng);
      p[face / 2] = face % 2 ? problem->domain().hi[face / 2] : problem->domain().lo[face / 2];
      EXPECT_EQ(problem->domain().face_of(p.head(problem->dim())), face);
      EXPECT_EQ(problem->boundary(p), problem->exact(p));
    }
  }
}

TEST_P(AllProblems, InitialIsExactAtT0) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd p = random_space_time(*problem, rng);
    p[problem->dim()] = problem->t0();
    EXPECT_EQ(problem->initial(p.head(problem->dim())), problem->exact(p));
  }
}

TEST_P(AllProblems, ResidualPartialsMatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  const int m = problem->dim() + 1;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd p = random_space_time(*problem, rng);
    Eigen::VectorXd z(m + 2);  // value, grad, lap
    for (auto& v : z) v = n(rng);
    auto r = [&](const Eigen::VectorXd& y) {
      return problem->residual_terms(y[0], {y.data() + 1, static_cast<std::size_t>(m)}, y[m + 1],
                                     {p.data(), static_cast<std::size_t>(m)}, nullptr);
    };
    JetPartials jp;
    problem->residual_terms(z[0], {z.data() + 1, static_cast<std::size_t>(m)}, z[m + 1],
                            {p.data(), static_cast<std::size_t>(m)}, &jp);
    const Eigen::VectorXd g = testing::fd_gradient(r, z, 1e-6);
    EXPECT_NEAR(jp.value, g[0], 1e-6);
    for (int k = 0; k < m; ++k) EXPECT_NEAR(jp.grad[k], g[1 + k], 1e-6);
    EXPECT_NEAR(jp.lap, g[m + 1], 1e-6);
  }
}

TEST_P(AllProblems, SeedMonitorGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  const int d = problem->dim();
  auto m = [&](const Eigen::VectorXd& x) { return problem->seed_monitor(x).value; };
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd p = near_front(*problem, rng);
    p[d] = problem->t0();
    const Eigen::VectorXd x = p.head(d);
    const Monitor mon = problem->seed_monitor(x);
    EXPECT_GE(mon.value, 0.0);
    const Eigen::VectorXd g = testing::fd_gradient4(m, x, 1e-6);
    const double scale = 1.0 + mon.grad.cwiseAbs().maxCoeff();
    for (int k = 0; k < d; ++k) EXPECT_LT(std::abs(mon.grad[k] - g[k]) / scale, 1e-6);
  }
}

TEST_P(AllProblems, PointsOutsideSpaceTimeAreDomainErrors) {
  Eigen::VectorXd p = problem->domain().lo;
  p = (p + problem->domain().hi) / 2;
  Eigen::VectorXd q(problem->dim() + 1);
  q << p, problem->horizon() + 0.01;
  EXPECT_THROW(problem->residual(problem->exact_jet(q), q), DomainError);
  q[problem->dim()] = problem->t0();
  q[0] = problem->domain().hi[0] + 1e-9;
  EXPECT_THROW(problem->residual(problem->exact_jet(q), q), DomainError);
  q[0] = problem->domain().hi[0];
  EXPECT_NO_THROW(problem->residual(problem->exact_jet(q), q));
}

INSTANTIATE_TEST_SUITE_P(Benchmarks, AllProblems,
                         ::testing::Values(ProblemId::burgers2d, ProblemId::parabolic2d,
                                           ProblemId::fokker_planck3d, ProblemId::burgers6d),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Burgers2d, DefaultParameters) {
  const Burgers2d p;
  EXPECT_EQ(p.dim(), 2);
  EXPECT_EQ(p.domain().lo, Eigen::Vector2d(-1, -1));
  EXPECT_EQ(p.domain().hi, Eigen::Vector2d(1, 1));
  EXPECT_EQ(p.horizon(), 1.05);
  EXPECT_EQ(p.params().alpha, 0.001);
  EXPECT_EQ(p.seed_density(), SeedDensity::grad_energy_u0);
  EXPECT_TRUE(p.needs_velocity_neumann());
}

TEST(Burgers2d, ExactSolutionResidualAtFiftyPoints) {
  const Burgers2d p;
  std::mt19937_64 rng(50);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = random_space_time(p, rng);
    EXPECT_LT(std::abs(p.residual(p.exact_jet(x), x)), 1e-8);
  }
}

TEST(Burgers2d, HalfOnTheFront) {
  const Burgers2d p;
  EXPECT_EQ(p.exact(Eigen::Vector3d(0.3, 0.2, 0.5)), 0.5);
  EXPECT_EQ(p.exact(Eigen::Vector3d(-0.25, 0.0, 0.0) + Eigen::Vector3d(0.25, 0.0, 0.0)), 0.5);
}

TEST(Burgers6d, HalfOnTheFrontAndLevelSetInvariance) {
  const Burgers6d p;
  EXPECT_EQ(p.dim(), 6);
  const double t = 0.7, g = Burgers6d::g(t);
  Eigen::VectorXd x(7);
  x << 3 * g, 0, 0, 0, 0, 0, t;
  EXPECT_NEAR(p.exact(x), 0.5, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (double level : {-0.05, 0.0, 0.02, 0.3}) {
    x << 3 * g + level, 0, 0, 0, 0, 0, t;
    const double ref = p.exact(x);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd y = x;
      for (int k = 1; k < 6; ++k) {
        const double shift = u(rng);
        y[k] += shift;
        y[0] -= shift;
      }
      EXPECT_NEAR(p.exact(y), ref, 1e-12);
    }
  }
}

TEST(Burgers6d, DecelerationLaw) {
  EXPECT_EQ(Burgers6d::g(0.0), 0.0);
  EXPECT_DOUBLE_EQ(Burgers6d::g(1.0), 0.5);
  EXPECT_DOUBLE_EQ(Burgers6d::g_rate(1.0), 0.25);
}

TEST(Parabolic2d, DefaultParameters) {
  const Parabolic2d p;
  EXPECT_EQ(p.domain().lo, Eigen::Vector2d(-0.2, -0.2));
  EXPECT_EQ(p.domain().hi, Eigen::Vector2d(2.5, 2.5));
  EXPECT_EQ(p.horizon(), 1.55);
  EXPECT_EQ(p.params().alpha, 0.01);
  EXPECT_EQ(p.params().cinf, 4.0);
  EXPECT_EQ(p.params().c0, 1.0);
  EXPECT_EQ(p.params().beta, 2.0);
  EXPECT_EQ(p.seed_density(), SeedDensity::abs_u0);
  EXPECT_FALSE(p.needs_velocity_neumann());
}

TEST(Parabolic2d, ZeroNetworkResidualIsMinusForcing) {
  const Parabolic2d p;
  std::mt19937_64 rng(2);
  Jet zero{0.0, Eigen::Vector3d::Zero(), 0.0};
  int nonzero = 0;
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd x = near_front(p, rng);
    const double f = p.forcing(x);
    EXPECT_EQ(p.residual(zero, x), -f);
    nonzero += std::abs(f) > 1e-3;
  }
  EXPECT_GT(nonzero, 10);
}

TEST(Parabolic2d, ForcingAtPeakCenter) {
  // At (t, t^2) the Gaussian factor is 1 and its gradient vanishes, so
  // u_t = A'(t) and lap u = -4 A(t) / alpha.
  const Parabolic2d p;
  for (double t : {0.0, 0.3, 0.9, 1.55}) {
    const double a = 4.0 - 3.0 * std::exp(-2.0 * t);
    const double a_rate = 6.0 * std::exp(-2.0 * t);
    const double want = a_rate + 4.0 * a / 0.01;
    EXPECT_LT(rel_err(p.forcing(Eigen::Vector3d(t, t * t, t)), want, 1.0), 1e-12);
  }
}

TEST(Parabolic2d, ForcingMatchesFiniteDifferencesOfExact) {
  const Parabolic2d p;
  std::mt19937_64 rng(100);
  auto u = [&](const Eigen::VectorXd& x) { return p.exact(x); };
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x = i % 2 ? random_space_time(p, rng) : near_front(p, rng);
    x[2] = std::clamp(x[2], 1e-3, 1.5);
    const double ut = testing::fd_gradient(u, x, 1e-6)[2];
    const double lap = testing::fd_laplacian4(u, x, 2, 1e-4);
    const double want = ut - lap;
    const double scale = std::max({std::abs(want), std::abs(ut), std::abs(lap), 1e-3});
    EXPECT_LT(std::abs(p.forcing(x) - want) / scale, 1e-6) << "i=" << i;
  }
}

TEST(Parabolic2d, AmplitudeRateDecays) {
  const Parabolic2d p;
  EXPECT_EQ(p.amplitude(0.0), 1.0);
  EXPECT_LT(p.amplitude_rate(50.0), 1e-40);
  EXPECT_NEAR(p.amplitude(50.0), 4.0, 1e-15);
}

TEST(FokkerPlanck3d, DefaultParameters) {
  const FokkerPlanck3d p;
  EXPECT_EQ(p.domain().lo, Eigen::Vector3d::Zero());
  EXPECT_EQ(p.domain().hi, Eigen::Vector3d::Constant(2.1));
  EXPECT_EQ(p.horizon(), 1.15);
  EXPECT_EQ(p.params().sigma, 0.1);
  EXPECT_EQ(p.params().radius, 1.0);
}

TEST(FokkerPlanck3d, ResidualOnShellAtStart) {
  const FokkerPlanck3d p;
  const Eigen::Vector4d x(1.0, 1.0, 2.0, 0.0);
  EXPECT_LT(std::abs(p.residual(p.exact_jet(x), x)), 1e-6);
}

TEST(FokkerPlanck3d, InitialMassIsOne) {
  // Tensor midpoint rule, independent of the Halton estimate used for K.
  const FokkerPlanck3d p;
  const int n = 300;
  const double h = 2.1 / n;
  double mass = 0.0;
  Eigen::VectorXd x(3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        x << (i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h;
        mass += p.initial(x);
      }
    }
  }
  mass *= h * h * h;
  EXPECT_NEAR(mass, 1.0, 0.01);
}

TEST(FokkerPlanck3d, DriftDivergenceMatchesFiniteDifferences) {
  const FokkerPlanck3d p;
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = random_space_time(p, rng);
    double div = 0.0;
    for (int k = 0; k < 3; ++k) {
      auto fk = [&](const Eigen::VectorXd& y) { return p.drift(y)[k]; };
      div += testing::fd_gradient4(fk, x, 1e-3)[k];
    }
    EXPECT_NEAR(p.drift_divergence(x), div, 1e-8);
  }
}

TEST(FokkerPlanck3d, FrontFunctionalVanishesOnShell) {
  const FokkerPlanck3d p;
  const double c = std::exp(-0.5);
  EXPECT_NEAR(p.front_functional(Eigen::Vector4d(c + 1.0, c, c, 0.5)), 0.0, 1e-15);
}

TEST(ProblemFactory, OverridesAreValidated) {
  auto p = make_problem("burgers2d", {{"alpha", 0.01}});
  EXPECT_EQ(p->params().alpha, 0.01);
  EXPECT_EQ(make_problem(ProblemId::parabolic2d, {{"T", 2.0}})->horizon(), 2.0);
  EXPECT_THROW(make_problem("burgers2d", {{"alpha", -1.0}}), ConfigError);
  EXPECT_THROW(make_problem("burgers2d", {{"sigma", 0.2}}), ConfigError);
  EXPECT_THROW(make_problem("burgers2d", {{"T", -1.0}}), ConfigError);
  EXPECT_THROW(make_problem("heat1d"), ConfigError);
}

TEST(ProblemFactory, IdsRoundTrip) {
  for (ProblemId id : {ProblemId::burgers2d, ProblemId::parabolic2d, ProblemId::fokker_planck3d,
                       ProblemId::burgers6d}) {
    EXPECT_EQ(problem_id_from_string(to_string(id)), id);
    EXPECT_EQ(make_problem(id)->name(), to_string(id));
  }
}

TEST(Box, FacesAndMeasures) {
  Box b{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 2, 3)};
  EXPECT_DOUBLE_EQ(b.volume(), 6.0);
  EXPECT_DOUBLE_EQ(b.face_measure(0), 6.0);
  EXPECT_DOUBLE_EQ(b.face_measure(3), 3.0);
  EXPECT_DOUBLE_EQ(b.face_measure(5), 2.0);
  EXPECT_EQ(b.face_of(Eigen::Vector3d(0.5, 2.0, 1.0)), 3);
  EXPECT_EQ(b.face_of(Eigen::Vector3d(0.5, 1.0, 1.0)), -1);
  EXPECT_EQ(b.outward_normal(3), Eigen::Vector3d(0, 1, 0));
  EXPECT_EQ(b.outward_normal(4), Eigen::Vector3d(0, 0, -1));
  Eigen::Vector3d y(-1, 5, 1);
  b.clamp(y);
  EXPECT_EQ(y, Eigen::Vector3d(0, 2, 1));
}

}  // namespace
}  // namespace pmsm
