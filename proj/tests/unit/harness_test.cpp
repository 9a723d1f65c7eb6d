#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pmsm/error.hpp"
#include "pmsm/harness/checks.hpp"
#include "pmsm/harness/config.hpp"
#include "pmsm/harness/evaluation.hpp"
#include "pmsm/harness/run.hpp"
#include "toy_problem.hpp"

namespace pmsm {
namespace {

using nlohmann::json;

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pmsm_harness_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(Config, DefaultsFollowPublishedSchedule) {
  const RunConfig c = load_config(json{{"problem", "fokker_planck3d"}});
  EXPECT_EQ(c.problem, ProblemId::fokker_planck3d);
  EXPECT_EQ(c.schedule.nt_init, 6);
  EXPECT_EQ(c.schedule.epochs_final, 60000);
  EXPECT_EQ(c.method, Method::pmsm);
}

TEST(Config, DottedOverridesApplyInOrder) {
  const RunConfig c = load_config(json::object(), {"schedule.epochs_final=12", "problem.id=parabolic2d",
                                                   "problem.overrides.T=0.5", "method=wr_pmsm",
                                                   "schedule.window=4", "schedule.epochs_final=13", "seed=9"});
  EXPECT_EQ(c.problem, ProblemId::parabolic2d);
  EXPECT_EQ(c.schedule.epochs_final, 13);
  EXPECT_EQ(c.overrides.at("T"), 0.5);
  EXPECT_EQ(c.method, Method::wr_pmsm);
  EXPECT_EQ(c.schedule.window, 4);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, InvalidInputIsConfigError) {
  EXPECT_THROW(load_config(json{{"schedul", json::object()}}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"schedule.epochs_final=many"}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"schedule.dt=0.5.5"}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"schedule.n_uniform=1.5"}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"method=newton"}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"noequals"}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"schedule.dt=0.06"}), ConfigError);
  EXPECT_THROW(load_config(json::object(), {"method=wr_pmsm"}), ConfigError);
  EXPECT_THROW(load_config(std::filesystem::path("missing.file")), ConfigError);
}

TEST(Config, JsonRoundTripIsExact) {
  const RunConfig c = load_config(json::object(), {"problem.id=burgers6d", "hmc.burn_in=77", "band=0.125",
                                                   "eval.random_points=1000", "schedule.learning_rate=0.0003"});
  const json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_EQ(run_manifest(c)["config"], j);
  EXPECT_EQ(run_manifest(c)["seed"], c.seed);
}

TEST(EvalGrid, TensorGridCounts) {
  const auto p = make_problem(ProblemId::burgers2d, {{"T", 0.1}});
  EvalGridSpec spec;
  spec.per_axis = 4;
  const EvalGrid g = eval_grid(*p, spec);
  EXPECT_EQ(g.times, (std::vector<double>{0.0, 0.1}));
  EXPECT_EQ(g.points.size(), 32);
  EXPECT_EQ(g.points_per_slice, 16);
  EXPECT_EQ(g.points.points.topRows(2).rowwise().minCoeff(), Eigen::Vector2d(-1, -1));
  EXPECT_EQ(g.points.points.topRows(2).rowwise().maxCoeff(), Eigen::Vector2d(1, 1));
  EXPECT_EQ(eval_grid(*p, EvalGridSpec{}).points_per_slice, 64 * 64);
  EXPECT_EQ(eval_grid(*make_problem(ProblemId::fokker_planck3d, {{"T", 0.3}}), EvalGridSpec{}).points_per_slice,
            32 * 32 * 32);
}

TEST(EvalGrid, TimesEndAtHorizon) {
  EXPECT_EQ(plot_times(0.0, 0.25, 0.1), (std::vector<double>{0.0, 0.1, 0.2, 0.25}));
  const std::vector<double> t = plot_times(0.0, 1.0, 0.1);
  ASSERT_EQ(t.size(), 11u);
  EXPECT_EQ(t.back(), 1.0);
  EXPECT_EQ(plot_times(0.0, 0.0, 0.1), std::vector<double>{0.0});
}

TEST(EvalGrid, SixDimensionalGridIsSeeded) {
  const auto p = make_problem(ProblemId::burgers6d, {{"T", 0.1}});
  const EvalGrid a = eval_grid(*p, EvalGridSpec{}, 3);
  const EvalGrid b = eval_grid(*p, EvalGridSpec{}, 3);
  EXPECT_EQ(a.points_per_slice, 100000);
  EXPECT_EQ(a.points.size(), 200000);
  EXPECT_EQ(a.points.points, b.points.points);
  EXPECT_NE(eval_grid(*p, EvalGridSpec{}, 4).points.points, a.points.points);
}

TEST(EvalGrid, PointCapIsEnforced) {
  const auto p = make_problem(ProblemId::burgers2d);
  EvalGridSpec spec;
  spec.per_axis = 1000;
  EXPECT_THROW(eval_grid(*p, spec), ConfigError);
  spec = EvalGridSpec{};
  spec.max_points = 1000;
  EXPECT_THROW(eval_grid(*make_problem(ProblemId::burgers6d), spec), ConfigError);
}

ValueFn exact_plus(const PdeProblem& p, double shift) {
  return [&p, shift](const Eigen::MatrixXd& pts) {
    Eigen::VectorXd v(pts.cols());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) v[i] = p.exact(pts.col(i)) + shift;
    return v;
  };
}

TEST(ComputeErrors, ExactPredictionHasZeroError) {
  const auto p = make_problem(ProblemId::parabolic2d);
  EvalGridSpec spec;
  spec.per_axis = 20;
  const ErrorReport r = compute_errors(exact_plus(*p, 0.0), *p, eval_grid(*p, spec));
  EXPECT_EQ(r.rel_l2, 0.0);
  EXPECT_EQ(r.l_inf, 0.0);
  EXPECT_FALSE(r.absolute);
}

TEST(ComputeErrors, ConstantShiftClosedForm) {
  const auto p = make_problem(ProblemId::burgers2d);
  EvalGridSpec spec;
  spec.per_axis = 20;
  const EvalGrid g = eval_grid(*p, spec);
  double norm2 = 0.0;
  for (Eigen::Index i = 0; i < g.points.size(); ++i) norm2 += std::pow(p->exact(g.points.points.col(i)), 2);
  const ErrorReport r = compute_errors(exact_plus(*p, 0.01), *p, g);
  EXPECT_NEAR(r.l_inf, 0.01, 1e-15);
  EXPECT_NEAR(r.rel_l2, 0.01 * std::sqrt(static_cast<double>(g.points.size())) / std::sqrt(norm2), 1e-14);
  ASSERT_EQ(r.slice_l_inf.size(), g.times.size());
  EXPECT_EQ(*std::max_element(r.slice_l_inf.begin(), r.slice_l_inf.end()), r.l_inf);
  EXPECT_EQ(r.points, g.points.size());
}

TEST(ComputeErrors, ZeroPredictionHasUnitRelativeError) {
  const auto p = make_problem(ProblemId::fokker_planck3d, {{"T", 0.3}});
  EvalGridSpec spec;
  spec.per_axis = 8;
  const ErrorReport r = compute_errors(exact_plus(*p, 0.0), *p, eval_grid(*p, spec));
  EXPECT_EQ(r.rel_l2, 0.0);
  const ErrorReport z = compute_errors(DenseNet(solution_net_shape(3)), *p, eval_grid(*p, spec));
  EXPECT_EQ(z.rel_l2, 1.0);
  for (double e : z.slice_rel_l2) EXPECT_EQ(e, 1.0);
}

TEST(ComputeErrors, ZeroExactSolutionFallsBackToAbsolute) {
  const testing::Constant1d p(0.0, 0.2);
  EvalGridSpec spec;
  spec.per_axis = 10;
  const ErrorReport r = compute_errors(exact_plus(p, 0.5), p, eval_grid(p, spec));
  EXPECT_TRUE(r.absolute);
  EXPECT_NEAR(r.rel_l2, 0.5 * std::sqrt(static_cast<double>(r.points)), 1e-12);
  EXPECT_TRUE(std::all_of(r.slice_absolute.begin(), r.slice_absolute.end(), [](auto f) { return f != 0; }));
}

TEST(FrontConcentration, PlantedPointsAreAllInside) {
  const auto p = make_problem(ProblemId::burgers2d);
  Eigen::MatrixXd x(2, 50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    x(0, i) = -0.8 + 0.02 * i;
    x(1, i) = -x(0, i);
  }
  Trajectory traj(x, 0.0);
  Eigen::MatrixXd shifted = x;
  shifted.row(0).array() += 0.3;
  traj.append(shifted, 0.3, Provenance::final);
  EXPECT_EQ(front_concentration(traj, *p, 1e-12), (std::vector<double>{1.0, 1.0}));
  EXPECT_THROW(front_concentration(traj, *p, -1.0), ConfigError);
}

TEST(FrontConcentration, DefaultBandIsTenDiffusionCoefficients) {
  EXPECT_DOUBLE_EQ(default_front_band(*make_problem(ProblemId::burgers2d)), 0.01);
  EXPECT_DOUBLE_EQ(default_front_band(*make_problem(ProblemId::burgers6d)), 0.1);
  EXPECT_DOUBLE_EQ(default_front_band(*make_problem(ProblemId::parabolic2d)), 0.1);
  EXPECT_DOUBLE_EQ(default_front_band(*make_problem(ProblemId::fokker_planck3d)), 0.05);
  EXPECT_DOUBLE_EQ(default_front_band(*make_problem(ProblemId::burgers2d, {{"alpha", 0.004}})), 0.04);
}

TEST(FrontConcentration, UniformPointsMatchBandArea) {
  const auto p = make_problem(ProblemId::burgers2d);
  const double band = 0.05, t = 0.4;
  // Midpoint quadrature of the strip |x + y - t| <= band inside [-1, 1]^2.
  const int m = 2000;
  double area = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double x = -1 + 2 * (i + 0.5) / m, y = -1 + 2 * (j + 0.5) / m;
      area += std::abs(x + y - t) <= band;
    }
  }
  const double want = area / (static_cast<double>(m) * m);
  Rng rng(17);
  const Eigen::Index n = 40000;
  const Eigen::MatrixXd x = uniform_initial(*p, n, rng).points.topRows(2);
  const Trajectory traj(x, t);
  const double got = front_concentration(traj, *p, band)[0];
  EXPECT_NEAR(got, want, 4 * std::sqrt(want * (1 - want) / n));
  EXPECT_EQ(front_concentration(traj, *p, 0.0)[0], 0.0);
}

ComparisonRow sample_row(int k) {
  return ComparisonRow{"burgers2d", "pmsm", 1.0 / (3 + k), std::exp(-k - 0.1), 52500 + k, 1500, 31500 + 7 * k,
                       std::sqrt(2.0 + k)};
}

TEST(ErrorsCsv, RoundTripIsByteIdentical) {
  const std::vector<ComparisonRow> rows{sample_row(0), sample_row(1), sample_row(2)};
  std::ostringstream first;
  write_errors_csv(first, rows);
  EXPECT_EQ(first.str().substr(0, first.str().find('\n')), kErrorsCsvHeader);
  std::istringstream in(first.str());
  const auto parsed = read_errors_csv(in);
  EXPECT_EQ(parsed, rows);
  std::ostringstream second;
  write_errors_csv(second, parsed);
  EXPECT_EQ(first.str(), second.str());
  std::istringstream bad("problem,method\n");
  EXPECT_THROW(read_errors_csv(bad), ConfigError);
}

RunConfig toy_config(const std::string& out) {
  return load_config(json::object(), {"problem.overrides.T=0.3", "schedule.epochs_pretrain=20",
                                      "schedule.epochs_per_round=5", "schedule.epochs_velocity=5",
                                      "schedule.epochs_final=10", "schedule.n_adaptive=12", "schedule.n_uniform=16",
                                      "schedule.n_initial=20", "schedule.n_boundary=8", "schedule.msm_iterations=1",
                                      "hmc.burn_in=100", "hmc.n_chains=4", "hmc.init_candidates=512",
                                      "eval.per_axis=8", "seed=5", "out=\"" + out + "\""});
}

void expect_same_except_time(const ComparisonRow& a, const ComparisonRow& b) {
  EXPECT_EQ(a.problem, b.problem);
  EXPECT_EQ(a.method, b.method);
  EXPECT_EQ(a.rel_l2, b.rel_l2);
  EXPECT_EQ(a.l_inf, b.l_inf);
  EXPECT_EQ(a.epochs, b.epochs);
  EXPECT_EQ(a.points_per_slice, b.points_per_slice);
  EXPECT_EQ(a.peak_train_points, b.peak_train_points);
}

TEST(Solve, WritesRunDirectory) {
  const auto dir = scratch_dir("solve");
  const RunConfig c = toy_config(dir.string());
  const RunOutcome o = solve(c);
  for (const char* f : {"manifest.json", "errors.csv", "per_slice_errors.csv", "front_concentration.csv",
                        "loss_history.csv", "rounds.csv", "trajectory.csv", "samples_0.csv", "samples_5.csv",
                        "solution.ckpt", "potential.ckpt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::ifstream m(dir / "manifest.json");
  const json manifest = json::parse(m);
  EXPECT_FALSE(c.band.has_value());
  EXPECT_EQ(o.config.band, 0.01);
  EXPECT_EQ(manifest["config"], config_to_json(o.config));
  EXPECT_EQ(manifest["config"]["band"], 0.01);
  EXPECT_TRUE(manifest.contains("version"));
  EXPECT_TRUE(manifest.contains("git_revision"));
  std::ifstream e(dir / "errors.csv");
  const auto rows = read_errors_csv(e);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], o.row);
  EXPECT_EQ(o.front.size(), 7u);

  const RunConfig again = load_config(manifest["config"]);
  const RunOutcome o2 = solve(again, SolveOptions{.evaluate = true, .write_outputs = false});
  expect_same_except_time(o.row, o2.row);
  std::filesystem::remove_all(dir);
}

TEST(Compare, RowsSortedAndBudgetsMatched) {
  const auto dir = scratch_dir("compare");
  RunConfig base = toy_config(dir.string());
  base.schedule.window = 3;
  const std::vector<Method> methods{Method::wr_pmsm, Method::pmsm, Method::pinn, Method::msm};
  const auto rows = compare(budget_matched_configs(base, methods), SolveOptions{.evaluate = true, .write_outputs = false});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].method, "pinn");
  EXPECT_EQ(rows[1].method, "msm");
  EXPECT_EQ(rows[2].method, "pmsm");
  EXPECT_EQ(rows[3].method, "wr_pmsm");
  for (const auto& r : rows) {
    EXPECT_EQ(r.epochs, rows[0].epochs);
    EXPECT_EQ(r.points_per_slice, 28);
  }
  EXPECT_LT(rows[3].peak_train_points, rows[2].peak_train_points);
  EXPECT_EQ(rows[3].peak_train_points, 3 * 28);
}

TEST(Compare, IdenticalConfigsGiveIdenticalRows) {
  const RunConfig c = toy_config(scratch_dir("identical").string());
  const std::vector<RunConfig> configs{c, c};
  const auto rows = compare(configs, SolveOptions{.evaluate = true, .write_outputs = false});
  ASSERT_EQ(rows.size(), 2u);
  expect_same_except_time(rows[0], rows[1]);
}

TEST(Compare, MismatchedBudgetsAreRefused) {
  RunConfig a = toy_config(scratch_dir("refused").string());
  RunConfig b = a;
  b.schedule.epochs_final += 1;
  const std::vector<RunConfig> configs{a, b};
  EXPECT_THROW(compare(configs, SolveOptions{.evaluate = false, .write_outputs = false}), ConfigError);
  b = a;
  b.method = Method::pinn;
  b.schedule.n_uniform += 1;
  EXPECT_THROW(compare(std::vector<RunConfig>{a, b}, SolveOptions{.evaluate = false, .write_outputs = false}),
               ConfigError);
}

TEST(ErrorSanity, ParameterNoiseDoesNotReduceError) {
  const testing::Heat1d p(0.0, std::numbers::pi, 0.3);
  TrainSchedule s;
  s.epochs_pretrain = 400;
  s.epochs_per_round = 0;
  s.epochs_final = 0;
  s.n_uniform = 40;
  s.n_adaptive = 0;
  s.n_initial = 40;
  s.n_boundary = 4;
  HmcConfig hmc;
  hmc.burn_in = 100;
  hmc.n_chains = 4;
  hmc.init_candidates = 512;
  const DenseNet trained = train_pinn_baseline(p, s, hmc, 3).solution;
  EvalGridSpec spec;
  spec.per_axis = 64;
  const EvalGrid g = eval_grid(p, spec);
  EXPECT_LT(compute_errors(trained, p, g).rel_l2, 0.5);
  double previous = 0.0;
  for (double scale : {1e-3, 1e-2, 1e-1, 1.0}) {
    std::vector<double> errs;
    for (int k = 0; k < 5; ++k) {
      Rng rng(derive_seed(11, "noise", static_cast<std::uint64_t>(k)));
      std::normal_distribution<double> n(0.0, scale);
      DenseNet noisy = trained;
      for (auto& w : noisy.params()) w += n(rng);
      errs.push_back(compute_errors(noisy, p, g).rel_l2);
    }
    std::nth_element(errs.begin(), errs.begin() + 2, errs.end());
    EXPECT_GE(errs[2], previous) << "noise scale " << scale;
    previous = errs[2];
  }
}

TEST(Checks, GradientReportIsDeterministic) {
  const GradientCheckReport a = check_gradients(7, 40, 16);
  const GradientCheckReport b = check_gradients(7, 40, 16);
  std::ostringstream sa, sb;
  write_report(sa, a);
  write_report(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_TRUE(a.passed()) << sa.str();
  EXPECT_EQ(a.jet_cases, 40);
  EXPECT_EQ(a.param_entries, 16 * 5);
}

}  // namespace
}  // namespace pmsm
