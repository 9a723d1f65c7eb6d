#include "pmsm/problems/residual_data.hpp"

#include <gtest/gtest.h>

#include <random>

#include "pmsm/error.hpp"
#include "pmsm/problems/benchmarks.hpp"

namespace pmsm {
namespace {

TEST(ResidualData, AffineFieldIsDifferentiatedExactly) {
  const Box st{Eigen::Vector3d(-1, -1, 0), Eigen::Vector3d(1, 1, 1)};
  const Eigen::Vector3d a(0.7, -1.3, 2.1);
  auto field = [&](const Eigen::MatrixXd& pts) -> Eigen::VectorXd {
    return (a.transpose() * pts).transpose().array() + 0.25;
  };
  Eigen::MatrixXd pts(3, 4);
  pts << 0.1, -1.0, 1.0, 0.3,  //
      0.2, 0.5, 1.0, -0.99995,  //
      0.5, 0.0, 1.0, 0.7;
  const ResidualDataBatch rd = residual_data(field, st, pts);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    EXPECT_NEAR(rd.r[i], a.dot(pts.col(i)) + 0.25, 1e-15);
    EXPECT_NEAR(rd.grad_r(0, i), a[0], 1e-10);
    EXPECT_NEAR(rd.grad_r(1, i), a[1], 1e-10);
    EXPECT_NEAR(rd.dr_dt[i], a[2], 1e-10);
  }
  EXPECT_EQ(rd.one_sided, (std::vector<std::uint8_t>{0, 1, 1, 1}));
}

TEST(ResidualData, QuadraticFieldOneSidedIsSecondOrderExact) {
  // Three-point one-sided and central stencils are exact on quadratics.
  const Box st{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)};
  auto field = [](const Eigen::MatrixXd& pts) -> Eigen::VectorXd {
    return pts.row(0).array().square() + 3.0 * pts.row(1).array().square();
  };
  Eigen::MatrixXd pts(2, 3);
  pts << 0.0, 0.5, 1.0, 1.0, 0.25, 0.0;
  const ResidualDataBatch rd = residual_data(field, st, pts, 1e-3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(rd.grad_r(0, i), 2 * pts(0, i), 1e-9);
    EXPECT_NEAR(rd.dr_dt[i], 6 * pts(1, i), 1e-9);
  }
}

TEST(ResidualData, ExactClosureGivesVanishingData) {
  // A field built from the analytic exact jets stands in for a network that
  // reproduces the exact solution.
  for (ProblemId id : {ProblemId::burgers2d, ProblemId::parabolic2d, ProblemId::fokker_planck3d,
                       ProblemId::burgers6d}) {
    auto problem = make_problem(id);
    auto field = [&](const Eigen::MatrixXd& pts) {
      Eigen::VectorXd r(pts.cols());
      for (Eigen::Index i = 0; i < pts.cols(); ++i) r[i] = problem->residual(problem->exact_jet(pts.col(i)), pts.col(i));
      return r;
    };
    std::mt19937_64 rng(7);
    const Box st = space_time_box(*problem);
    Eigen::MatrixXd pts(st.dim(), 40);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      for (int k = 0; k < st.dim(); ++k) pts(k, i) = std::uniform_real_distribution<double>(st.lo[k], st.hi[k])(rng);
    }
    const ResidualDataBatch rd = residual_data(field, st, pts);
    EXPECT_LT(rd.r.cwiseAbs().maxCoeff(), 1e-6) << to_string(id);
    EXPECT_LT(rd.grad_r.cwiseAbs().maxCoeff(), 1e-4) << to_string(id);
    EXPECT_LT(rd.dr_dt.cwiseAbs().maxCoeff(), 1e-4) << to_string(id);
  }
}

TEST(ResidualData, SecondOrderConvergenceOnRandomNetworks) {
  const Burgers2d problem(0.05);
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(-0.8, 0.8), ut(0.2, 0.8);
  int checked = 0;
  for (int n = 0; n < 20; ++n) {
    const DenseNet net = make_glorot_net({3, 16, 16, 1}, rng());
    Eigen::MatrixXd pts(3, 1);
    pts << u(rng), u(rng), ut(rng);
    // Reference derivative by Richardson extrapolation of much smaller steps.
    const double h = kResidualFdStep;
    auto d_at = [&](double step) {
      const ResidualDataBatch rd = residual_data(problem, net, pts, step);
      Eigen::Vector3d d;
      d << rd.grad_r.col(0), rd.dr_dt[0];
      return d;
    };
    const Eigen::Vector3d fine = d_at(h / 4), finer = d_at(h / 8);
    const Eigen::Vector3d ref = (4 * finer - fine) / 3;
    const Eigen::Vector3d e1 = d_at(h) - ref, e2 = d_at(h / 2) - ref;
    if (e2.norm() < 2e-10) continue;  // too close to the rounding floor (~1e-11 at h/8)
    EXPECT_NEAR(e1.norm() / e2.norm(), 4.0, 1.0) << "net " << n;
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(ResidualData, NetworkVersionMatchesFieldVersion) {
  const Parabolic2d problem;
  const DenseNet net = make_glorot_net({3, 8, 1}, 3);
  Eigen::MatrixXd pts(3, 2);
  pts << 0.1, 2.5, 0.2, -0.2, 0.3, 1.55;
  const ResidualDataBatch a = residual_data(problem, net, pts);
  const ResidualDataBatch b = residual_data(residual_field(problem, net), space_time_box(problem), pts);
  EXPECT_TRUE((a.grad_r.array() == b.grad_r.array()).all());
  EXPECT_EQ(a.one_sided, (std::vector<std::uint8_t>{0, 1}));
  const ResidualData single = residual_data_at(problem, net, pts.col(1));
  EXPECT_EQ(single.dr_dt, a.dr_dt[1]);
  EXPECT_TRUE(single.one_sided);
  EXPECT_EQ(single.grad_r.size(), 2);
}

TEST(ResidualData, WrongNetworkShapeIsConfigError) {
  const Burgers2d problem;
  const DenseNet net = make_glorot_net({4, 8, 1}, 3);
  EXPECT_THROW(residual_data(problem, net, Eigen::MatrixXd::Zero(4, 1)), ConfigError);
}

}  // namespace
}  // namespace pmsm
