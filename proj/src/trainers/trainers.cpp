#include "pmsm/trainers/trainers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "pmsm/autodiff/adam.hpp"
#include "pmsm/error.hpp"
#include "pmsm/problems/residual_data.hpp"
#include "pmsm/random.hpp"
#include "pmsm/sampling/point_set.hpp"

namespace pmsm {

namespace {

using Clock = std::chrono::steady_clock;

/// Spatial points (d x n) that are repeated over a set of slice times.
struct SpatialSet {
  Eigen::MatrixXd x;
  std::vector<int> faces;
};

Eigen::MatrixXd repeat_over(const Eigen::MatrixXd& x, std::span<const double> times) {
  const Eigen::Index d = x.rows(), n = x.cols();
  Eigen::MatrixXd out(d + 1, n * static_cast<Eigen::Index>(times.size()));
  for (std::size_t s = 0; s < times.size(); ++s) {
    const auto at = static_cast<Eigen::Index>(s) * n;
    out.block(0, at, d, n) = x;
    out.block(d, at, 1, n).setConstant(times[s]);
  }
  return out;
}

Eigen::MatrixXd at_time(const Eigen::MatrixXd& x, double t) { return repeat_over(x, std::span(&t, 1)); }

PointSet boundary_over(const SpatialSet& b, std::span<const double> times) {
  PointSet out;
  out.kind = PointKind::boundary;
  out.points = repeat_over(b.x, times);
  for (std::size_t s = 0; s < times.size(); ++s) out.faces.insert(out.faces.end(), b.faces.begin(), b.faces.end());
  return out;
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

SpatialSet draw_interior(const PdeProblem& problem, Eigen::Index n, Rng& rng) {
  const double t = problem.t0();
  return {uniform_interior(problem, n, std::span(&t, 1), rng).points.topRows(problem.dim()), {}};
}

SpatialSet draw_boundary(const PdeProblem& problem, Eigen::Index n, Rng& rng) {
  if (n == 0) return {Eigen::MatrixXd(problem.dim(), 0), {}};
  const double t = problem.t0();
  PointSet b = uniform_boundary(problem, n, std::span(&t, 1), rng);
  return {b.points.topRows(problem.dim()), std::move(b.faces)};
}

SeedSets draw_seed_sets(const PdeProblem& problem, const TrainSchedule& s, const HmcConfig& hmc,
                        std::uint64_t seed, Eigen::Index n_adaptive) {
  if (s.n_initial == 0 && n_adaptive == 0) {
    SeedSets out;
    out.initial.points.resize(problem.dim() + 1, 0);
    out.adaptive.points.resize(problem.dim() + 1, 0);
    return out;
  }
  HmcConfig cfg = hmc;
  cfg.seed = derive_seed(seed, "hmc");
  return initial_seed_sets(problem, cfg, s.n_initial, n_adaptive);
}

CollocationSets analytic_sets(const PdeProblem& problem, Eigen::MatrixXd interior, const Eigen::MatrixXd& c0,
                              const PointSet& boundary) {
  CollocationSets sets;
  sets.interior = std::move(interior);
  sets.initial = at_time(c0, problem.t0());
  sets.initial_target = initial_targets(problem, sets.initial);
  sets.boundary = boundary.points;
  sets.boundary_target = boundary_targets(problem, sets.boundary);
  return sets;
}

VelocityField initial_potential(int d, std::uint64_t seed) {
  VelocityField f = VelocityField::glorot(d, derive_seed(seed, "potential-net"));
  const int last = f.potential().num_layers() - 1;
  f.potential().weight(last).setZero();
  f.potential().bias(last).setZero();
  return f;
}

std::vector<Eigen::Index> pick(Eigen::Index n, Eigen::Index k, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> u(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(u(rng))]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

class SolutionTrainer {
 public:
  SolutionTrainer(DenseNet& net, const PdeProblem& problem, const TrainSchedule& s, std::uint64_t seed,
                  RunMetrics& metrics)
      : net_(net),
        problem_(problem),
        s_(s),
        adam_(net.num_params(), AdamConfig{s.learning_rate}),
        rng_(make_rng(seed, "minibatch")),
        metrics_(metrics),
        opts_{JetOrder::laplacian, 256, s.threads},
        weights_{s.lambda_0, s.lambda_b} {}

  double train(const CollocationSets& sets, int epochs) {
    if (epochs == 0) return pinn_loss(net_, sets, problem_, weights_).total;
    double loss = 0.0;
    CollocationSets mb;
    for (int e = 0; e < epochs; ++e) {
      const CollocationSets* batch = &sets;
      if (s_.minibatch > 0 && s_.minibatch < sets.interior.cols()) {
        mb = subsample(sets);
        batch = &mb;
      }
      LossGrad lg;
      try {
        lg = pinn_loss_and_grad(net_, *batch, problem_, weights_, opts_);
      } catch (const NumericError& err) {
        throw DiagnosticsError("solution training diverged at step " + std::to_string(metrics_.solution_steps) +
                               ": " + err.what());
      }
      if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
        throw DiagnosticsError("solution training diverged at step " + std::to_string(metrics_.solution_steps));
      }
      adam_step(adam_, net_.params(), lg.grad);
      ++metrics_.solution_steps;
      loss = lg.loss;
      if (s_.log_every > 0 && metrics_.solution_steps % s_.log_every == 0) {
        metrics_.loss_history.push_back({metrics_.solution_steps, loss});
      }
    }
    return loss;
  }

 private:
  CollocationSets subsample(const CollocationSets& sets) {
    const double frac = static_cast<double>(s_.minibatch) / static_cast<double>(sets.interior.cols());
    auto take = [&](const Eigen::MatrixXd& pts, const Eigen::VectorXd* target, Eigen::MatrixXd& out_pts,
                    Eigen::VectorXd* out_target) {
      const Eigen::Index n = pts.cols();
      const Eigen::Index k = n == 0 ? 0 : std::clamp<Eigen::Index>(std::llround(frac * n), 1, n);
      const auto idx = pick(n, k, rng_);
      out_pts.resize(pts.rows(), k);
      if (out_target) out_target->resize(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        out_pts.col(i) = pts.col(idx[static_cast<std::size_t>(i)]);
        if (out_target) (*out_target)[i] = (*target)[idx[static_cast<std::size_t>(i)]];
      }
    };
    CollocationSets mb;
    take(sets.interior, nullptr, mb.interior, nullptr);
    take(sets.initial, &sets.initial_target, mb.initial, &mb.initial_target);
    take(sets.boundary, &sets.boundary_target, mb.boundary, &mb.boundary_target);
    return mb;
  }

  DenseNet& net_;
  const PdeProblem& problem_;
  const TrainSchedule& s_;
  AdamState adam_;
  Rng rng_;
  RunMetrics& metrics_;
  GradOptions opts_;
  LossWeights weights_;
};

class VelocityTrainer {
 public:
  VelocityTrainer(VelocityField& field, const PdeProblem& problem, const TrainSchedule& s, RunMetrics& metrics)
      : field_(field),
        problem_(problem),
        s_(s),
        adam_(field.potential().num_params(), AdamConfig{s.velocity_learning_rate}),
        metrics_(metrics),
        opts_{JetOrder::laplacian, 256, s.threads} {}

  /// Returns the last loss. On a non-finite loss or gradient the potential and
  /// optimizer state roll back to their values at entry.
  double train(const VelocityLossTerms& terms, const PointSet& boundary, bool* rolled_back) {
    *rolled_back = false;
    if (!s_.train_velocity) return 0.0;
    const bool neumann = problem_.needs_velocity_neumann() && s_.lambda_n > 0 && !boundary.empty();
    const Eigen::VectorXd saved = field_.potential().params();
    const AdamState saved_adam = adam_;
    double loss = 0.0;
    for (int e = 0; e < s_.epochs_velocity; ++e) {
      LossGrad lg;
      bool ok = true;
      try {
        lg = velocity_loss_and_grad(field_, terms, opts_);
        if (neumann) {
          const LossGrad nb = neumann_penalty_and_grad(field_, boundary, problem_.domain(), opts_);
          lg.loss += s_.lambda_n * nb.loss;
          lg.grad += s_.lambda_n * nb.grad;
        }
        ok = std::isfinite(lg.loss) && lg.grad.allFinite();
      } catch (const NumericError&) {
        ok = false;
      }
      if (!ok) {
        field_.potential().params() = saved;
        adam_ = saved_adam;
        *rolled_back = true;
        ++metrics_.velocity_rollbacks;
        return loss;
      }
      adam_step(adam_, field_.potential().params(), lg.grad);
      ++metrics_.velocity_steps;
      loss = lg.loss;
    }
    return loss;
  }

 private:
  VelocityField& field_;
  const PdeProblem& problem_;
  const TrainSchedule& s_;
  AdamState adam_;
  RunMetrics& metrics_;
  GradOptions opts_;
};

VelocityLossTerms pmsm_terms(const PdeProblem& problem, const DenseNet& u, const Eigen::MatrixXd& pts) {
  return pmsm_velocity_terms(pts, residual_data(problem, u, pts));
}

std::vector<double> slice_times(const PdeProblem& problem, double dt, Eigen::Index n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = slice_time(problem.t0(), dt, k, problem.horizon());
  return out;
}

Trajectory roll_out(const Eigen::MatrixXd& seeds, const VelocityField& field, std::span<const double> times,
                    const Box& domain) {
  Trajectory traj(seeds, times.front());
  for (std::size_t k = 1; k < times.size(); ++k) {
    const auto from = static_cast<Eigen::Index>(k - 1);
    traj.append(evolve_slice(traj, field, from, times[k] - times[k - 1], domain), times[k], Provenance::final);
  }
  return traj;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TrainResult run_progressive(Method method, const PdeProblem& problem, const TrainSchedule& s,
                            const HmcConfig& hmc, std::uint64_t seed, int window, const RunHooks& hooks) {
  validate(s);
  if (s.n_adaptive < 1) throw ConfigError(std::string(to_string(method)) + ": at least one adaptive point per slice");
  const auto start = Clock::now();
  const int k_ext = extension_rounds(problem, s);
  const int d = problem.dim();
  const Box& domain = problem.domain();
  TimeGrids grids(problem.t0(), s.dt, s.nt_init, window, problem.horizon());

  TrainResult res;
  res.method = method;
  res.solution = make_glorot_net(solution_net_shape(d), derive_seed(seed, "solution-net"));
  VelocityField field = initial_potential(d, seed);
  RunMetrics& m = res.metrics;

  const SeedSets seeds = draw_seed_sets(problem, s, hmc, seed, s.n_adaptive);
  m.hmc = seeds.diagnostics;
  const Eigen::MatrixXd c0 = seeds.initial.points.topRows(d);
  Rng su_rng = make_rng(seed, "uniform-interior");
  Rng sb_rng = make_rng(seed, "uniform-boundary");
  SpatialSet xu = draw_interior(problem, s.n_uniform, su_rng);
  SpatialSet xb = draw_boundary(problem, s.n_boundary, sb_rng);

  SolutionTrainer ut(res.solution, problem, s, seed, m);
  VelocityTrainer vt(field, problem, s, m);

  // Initial stage on the first nt_init slices, uniform points only.
  {
    const std::vector<double> times = grids.train();
    const PointSet bdry = boundary_over(xb, times);
    CollocationSets sets = analytic_sets(problem, repeat_over(xu.x, times), c0, bdry);
    RoundRecord rec;
    rec.t_new = times.back();
    rec.train_slices = grids.num_train();
    rec.train_interior_points = sets.interior.cols();
    rec.ic_anchor = problem.t0();
    rec.solution_loss = ut.train(sets, s.epochs_pretrain);
    rec.velocity_loss = vt.train(pmsm_terms(problem, res.solution, sets.interior), bdry, &rec.velocity_rollback);
    res.trajectory = roll_out(seeds.adaptive.points.topRows(d), field, times, domain);
    m.peak_train_points = rec.train_interior_points;
    m.rounds.push_back(rec);
    if (hooks.on_round) hooks.on_round(0, res.solution, res.trajectory);
  }

  std::optional<ReferenceModel> reference;
  Trajectory& traj = res.trajectory;
  for (int j = 1; j <= k_ext; ++j) {
    RoundRecord rec;
    rec.round = j;
    rec.window_reset = grids.append();
    const Eigen::Index i = grids.num_global() - 1;
    const double t_new = grids.global().back();
    const double t_prev = grids.global()[static_cast<std::size_t>(i - 1)];
    rec.t_new = t_new;
    traj.append(evolve_slice(traj, field, i - 1, t_new - t_prev, domain), t_new, Provenance::temporary);

    if (rec.window_reset) {
      reference.emplace(res.solution, grids.train_start());
      if (hooks.on_reset) hooks.on_reset(*reference, res.solution);
      xu = draw_interior(problem, s.n_uniform, su_rng);
      xb = draw_boundary(problem, s.n_boundary, sb_rng);
    }

    const std::vector<double> times = grids.train();
    const PointSet bdry = boundary_over(xb, times);
    CollocationSets sets = analytic_sets(
        problem, hcat(repeat_over(xu.x, times), traj.space_time_points(grids.train_first(), grids.num_train()).points),
        c0, bdry);
    rec.ic_anchor = problem.t0();
    if (reference) {
      sets.initial = at_time(c0, reference->t_start());
      sets.initial_target = reference->values(c0);
      rec.ic_anchor = reference->t_start();
    }
    rec.train_slices = grids.num_train();
    rec.train_interior_points = sets.interior.cols();
    rec.solution_loss = ut.train(sets, s.epochs_per_round);

    const double pair[] = {t_prev, t_new};
    rec.velocity_loss = vt.train(pmsm_terms(problem, res.solution, repeat_over(xu.x, pair)),
                                 boundary_over(xb, pair), &rec.velocity_rollback);
    traj.replace(i, evolve_slice(traj, field, i - 1, t_new - t_prev, domain), Provenance::final);

    m.peak_train_points = std::max(m.peak_train_points, rec.train_interior_points);
    m.rounds.push_back(rec);
    if (hooks.on_round) hooks.on_round(j, res.solution, traj);
  }

  // Final refinement over every slice with the analytic initial condition.
  const std::vector<double>& all = grids.global();
  const CollocationSets sets = analytic_sets(
      problem, hcat(repeat_over(xu.x, all), traj.space_time_points(0, traj.num_slices()).points), c0,
      boundary_over(xb, all));
  m.final_loss = ut.train(sets, s.epochs_final);

  res.velocity = std::move(field);
  res.times = all;
  m.wall_s = seconds_since(start);
  return res;
}

}  // namespace

TrainResult train_pinn_baseline(const PdeProblem& problem, const TrainSchedule& schedule, const HmcConfig& hmc,
                                std::uint64_t seed, const RunHooks& hooks) {
  validate(schedule);
  const auto start = Clock::now();
  const int k_ext = extension_rounds(problem, schedule);
  const int d = problem.dim();
  TrainResult res;
  res.method = Method::pinn;
  res.solution = make_glorot_net(solution_net_shape(d), derive_seed(seed, "solution-net"));
  RunMetrics& m = res.metrics;
  res.times = slice_times(problem, schedule.dt, schedule.nt_init + k_ext);

  const SeedSets seeds = draw_seed_sets(problem, schedule, hmc, seed, 0);
  m.hmc = seeds.diagnostics;
  Rng su_rng = make_rng(seed, "uniform-interior");
  Rng sb_rng = make_rng(seed, "uniform-boundary");
  const SpatialSet xu = draw_interior(problem, schedule.n_uniform + schedule.n_adaptive, su_rng);
  const SpatialSet xb = draw_boundary(problem, schedule.n_boundary, sb_rng);
  const CollocationSets sets = analytic_sets(problem, repeat_over(xu.x, res.times),
                                             seeds.initial.points.topRows(d), boundary_over(xb, res.times));

  SolutionTrainer ut(res.solution, problem, schedule, seed, m);
  RoundRecord rec;
  rec.t_new = res.times.back();
  rec.train_slices = static_cast<Eigen::Index>(res.times.size());
  rec.train_interior_points = sets.interior.cols();
  rec.ic_anchor = problem.t0();
  rec.solution_loss = ut.train(sets, static_cast<int>(planned_solution_steps(Method::pinn, schedule, k_ext)));
  m.final_loss = rec.solution_loss;
  m.peak_train_points = rec.train_interior_points;
  m.rounds.push_back(rec);
  if (hooks.on_round) hooks.on_round(0, res.solution, res.trajectory);
  m.wall_s = seconds_since(start);
  return res;
}

TrainResult run_msm(const PdeProblem& problem, const TrainSchedule& s, const HmcConfig& hmc, std::uint64_t seed,
                    const RunHooks& hooks) {
  validate(s);
  const auto start = Clock::now();
  const int k_ext = extension_rounds(problem, s);
  const int d = problem.dim();
  const Box& domain = problem.domain();
  TrainResult res;
  res.method = Method::msm;
  res.solution = make_glorot_net(solution_net_shape(d), derive_seed(seed, "solution-net"));
  VelocityField field = initial_potential(d, seed);
  RunMetrics& m = res.metrics;
  res.times = slice_times(problem, s.dt, s.nt_init + k_ext);
  const std::vector<double>& times = res.times;

  const SeedSets seeds = draw_seed_sets(problem, s, hmc, seed, s.n_adaptive);
  m.hmc = seeds.diagnostics;
  const Eigen::MatrixXd c0 = seeds.initial.points.topRows(d);
  Rng su_rng = make_rng(seed, "uniform-interior");
  Rng sb_rng = make_rng(seed, "uniform-boundary");
  const SpatialSet xu = draw_interior(problem, s.n_uniform, su_rng);
  const SpatialSet xb = draw_boundary(problem, s.n_boundary, sb_rng);
  const Eigen::MatrixXd su = repeat_over(xu.x, times);
  const PointSet bdry = boundary_over(xb, times);

  SolutionTrainer ut(res.solution, problem, s, seed, m);
  VelocityTrainer vt(field, problem, s, m);

  {
    CollocationSets sets = analytic_sets(problem, su, c0, bdry);
    RoundRecord rec;
    rec.t_new = times.back();
    rec.train_slices = static_cast<Eigen::Index>(times.size());
    rec.train_interior_points = sets.interior.cols();
    rec.ic_anchor = problem.t0();
    rec.solution_loss = ut.train(sets, s.epochs_pretrain);
    m.peak_train_points = rec.train_interior_points;
    m.rounds.push_back(rec);
    if (hooks.on_round) hooks.on_round(0, res.solution, res.trajectory);
  }

  // With no extension epochs there is still one velocity/evolve pass so the
  // final refinement sees adaptive points.
  std::vector<int> iter_epochs = msm_iteration_epochs(s, k_ext);
  if (iter_epochs.empty()) iter_epochs.push_back(0);
  const ResidualField rfield = [&](const Eigen::MatrixXd& pts) -> Eigen::VectorXd {
    return residual_field(problem, res.solution)(pts);
  };
  for (std::size_t it = 0; it < iter_epochs.size(); ++it) {
    RoundRecord rec;
    rec.round = static_cast<int>(it) + 1;
    rec.t_new = times.back();
    rec.ic_anchor = problem.t0();

    if (times.size() >= 2) {
      std::vector<SlicePair> pairs;
      for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        SlicePair p;
        p.points = at_time(xu.x, times[k]);
        p.current = residual_data(problem, res.solution, p.points);
        p.r_next = rfield(at_time(xu.x, times[k + 1]));
        p.dt = times[k + 1] - times[k];
        pairs.push_back(std::move(p));
      }
      const VelocityLossTerms terms = msm_velocity_terms(pairs, domain.volume());
      m.degenerate_pairs += static_cast<int>(std::count(terms.degenerate_pairs.begin(), terms.degenerate_pairs.end(), 1));
      rec.velocity_loss = vt.train(terms, bdry, &rec.velocity_rollback);
    }

    Eigen::MatrixXd z0 = seeds.adaptive.points.topRows(d);
    if (it > 0 && s.n_adaptive > 0) {
      HmcConfig cfg = hmc;
      cfg.seed = derive_seed(seed, "msm-z0", it);
      z0 = hmc_sample(problem, cfg, s.n_adaptive).points.topRows(d);
    }
    res.trajectory = s.n_adaptive > 0 ? roll_out(z0, field, times, domain) : Trajectory();

    const Eigen::MatrixXd adaptive =
        s.n_adaptive > 0 ? res.trajectory.space_time_points(0, res.trajectory.num_slices()).points
                         : Eigen::MatrixXd(d + 1, 0);
    CollocationSets sets = analytic_sets(problem, hcat(su, adaptive), c0, bdry);
    rec.train_slices = static_cast<Eigen::Index>(times.size());
    rec.train_interior_points = sets.interior.cols();
    rec.solution_loss = ut.train(sets, iter_epochs[it]);
    m.peak_train_points = std::max(m.peak_train_points, rec.train_interior_points);
    m.rounds.push_back(rec);
    if (hooks.on_round) hooks.on_round(rec.round, res.solution, res.trajectory);
  }

  const Eigen::MatrixXd adaptive = s.n_adaptive > 0
                                       ? res.trajectory.space_time_points(0, res.trajectory.num_slices()).points
                                       : Eigen::MatrixXd(d + 1, 0);
  m.final_loss = ut.train(analytic_sets(problem, hcat(su, adaptive), c0, bdry), s.epochs_final);
  res.velocity = std::move(field);
  m.wall_s = seconds_since(start);
  return res;
}

TrainResult run_pmsm(const PdeProblem& problem, const TrainSchedule& schedule, const HmcConfig& hmc,
                     std::uint64_t seed, const RunHooks& hooks) {
  return run_progressive(Method::pmsm, problem, schedule, hmc, seed, 0, hooks);
}

TrainResult run_wr_pmsm(const PdeProblem& problem, const TrainSchedule& schedule, const HmcConfig& hmc,
                        std::uint64_t seed, int window, const RunHooks& hooks) {
  if (window < schedule.nt_init) throw ConfigError("wr_pmsm: window must be at least nt_init");
  return run_progressive(Method::wr_pmsm, problem, schedule, hmc, seed, window, hooks);
}

TrainResult run_method(Method method, const PdeProblem& problem, const TrainSchedule& schedule,
                       const HmcConfig& hmc, std::uint64_t seed, const RunHooks& hooks) {
  switch (method) {
    case Method::pinn: return train_pinn_baseline(problem, schedule, hmc, seed, hooks);
    case Method::msm: return run_msm(problem, schedule, hmc, seed, hooks);
    case Method::pmsm: return run_pmsm(problem, schedule, hmc, seed, hooks);
    case Method::wr_pmsm: return run_wr_pmsm(problem, schedule, hmc, seed, schedule.window, hooks);
  }
  throw ConfigError("unknown method");
}

}  // namespace pmsm
