#include "pmsm/harness/evaluation.hpp"

#include <chrono>
#include <cmath>

#include "pmsm/autodiff/jet.hpp"
#include "pmsm/error.hpp"
#include "pmsm/trainers/schedule.hpp"

namespace pmsm {

namespace {

int default_per_axis(int d) {
  switch (d) {
    case 1: return 256;
    case 2: return 64;
    default: return 32;
  }
}

Eigen::MatrixXd tensor_grid(const Box& box, int per_axis) {
  const int d = box.dim();
  Eigen::Index n = 1;
  for (int k = 0; k < d; ++k) n *= per_axis;
  Eigen::MatrixXd x(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index rest = i;
    for (int k = 0; k < d; ++k) {
      const Eigen::Index j = rest % per_axis;
      rest /= per_axis;
      x(k, i) = per_axis == 1 ? 0.5 * (box.lo[k] + box.hi[k])
                              : box.lo[k] + (box.hi[k] - box.lo[k]) * static_cast<double>(j) / (per_axis - 1);
    }
  }
  return x;
}

}  // namespace

std::vector<double> plot_times(double t0, double horizon, double interval) {
  if (!(interval > 0.0) || !(horizon >= t0)) throw ConfigError("plot times: need interval > 0 and T >= t0");
  std::vector<double> out;
  for (Eigen::Index k = 0;; ++k) {
    const double t = slice_time(t0, interval, k, horizon);
    if (t > horizon - 1e-9 * interval) break;
    out.push_back(t);
  }
  out.push_back(horizon);
  return out;
}

EvalGrid eval_grid(const PdeProblem& problem, const EvalGridSpec& spec, std::uint64_t seed) {
  const int d = problem.dim();
  EvalGrid g;
  g.times = plot_times(problem.t0(), problem.horizon(), spec.plot_interval);
  Eigen::MatrixXd x;
  if (d <= 3) {
    const int per_axis = spec.per_axis > 0 ? spec.per_axis : default_per_axis(d);
    double n = 1.0;
    for (int k = 0; k < d; ++k) n *= per_axis;
    if (n * static_cast<double>(g.times.size()) > static_cast<double>(spec.max_points)) {
      throw ConfigError("eval grid: " + std::to_string(per_axis) + " points per axis exceeds the point cap");
    }
    x = tensor_grid(problem.domain(), per_axis);
  } else {
    if (static_cast<double>(spec.random_points) * static_cast<double>(g.times.size()) >
        static_cast<double>(spec.max_points)) {
      throw ConfigError("eval grid: random point count exceeds the point cap");
    }
    Rng rng = make_rng(seed, "eval-grid");
    const double t0 = problem.t0();
    x = uniform_interior(problem, spec.random_points, std::span<const double>(&t0, 1), rng).points.topRows(d);
  }
  g.points_per_slice = x.cols();
  g.points.kind = PointKind::interior;
  g.points.points.resize(d + 1, x.cols() * static_cast<Eigen::Index>(g.times.size()));
  for (std::size_t s = 0; s < g.times.size(); ++s) {
    auto block = g.points.points.middleCols(static_cast<Eigen::Index>(s) * x.cols(), x.cols());
    block.topRows(d) = x;
    block.bottomRows(1).setConstant(g.times[s]);
  }
  return g;
}

ErrorReport compute_errors(const ValueFn& predict, const PdeProblem& problem, const EvalGrid& grid) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::MatrixXd& pts = grid.points.points;
  const Eigen::Index per = grid.points_per_slice;
  if (per < 1 || pts.cols() != per * static_cast<Eigen::Index>(grid.times.size())) {
    throw ConfigError("compute_errors: grid layout does not match its slice count");
  }
  const Eigen::VectorXd pred = predict(pts);
  if (pred.size() != pts.cols()) throw ConfigError("compute_errors: prediction count mismatch");
  ErrorReport rep;
  rep.points = pts.cols();
  rep.times = grid.times;
  double num = 0.0, den = 0.0;
  for (std::size_t s = 0; s < grid.times.size(); ++s) {
    double sn = 0.0, sd = 0.0, sinf = 0.0;
    for (Eigen::Index i = static_cast<Eigen::Index>(s) * per; i < static_cast<Eigen::Index>(s + 1) * per; ++i) {
      const double e = problem.exact(pts.col(i));
      const double diff = pred[i] - e;
      if (!std::isfinite(diff)) throw NumericError("compute_errors: non-finite prediction", static_cast<std::size_t>(i));
      sn += diff * diff;
      sd += e * e;
      sinf = std::max(sinf, std::abs(diff));
    }
    num += sn;
    den += sd;
    rep.l_inf = std::max(rep.l_inf, sinf);
    rep.slice_absolute.push_back(sd == 0.0);
    rep.slice_rel_l2.push_back(sd == 0.0 ? std::sqrt(sn) : std::sqrt(sn / sd));
    rep.slice_l_inf.push_back(sinf);
  }
  rep.absolute = den == 0.0;
  rep.rel_l2 = rep.absolute ? std::sqrt(num) : std::sqrt(num / den);
  rep.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

ErrorReport compute_errors(const DenseNet& net, const PdeProblem& problem, const EvalGrid& grid) {
  if (net.input_dim() != problem.dim() + 1) throw ConfigError("compute_errors: network input dimension mismatch");
  return compute_errors(
      [&net](const Eigen::MatrixXd& pts) {
        Eigen::VectorXd out(pts.cols());
        const Eigen::Index chunk = 8192;
        for (Eigen::Index i = 0; i < pts.cols(); i += chunk) {
          const Eigen::Index n = std::min(chunk, pts.cols() - i);
          out.segment(i, n) = forward_batch(net, pts.middleCols(i, n), JetOrder::value).values;
        }
        return out;
      },
      problem, grid);
}

std::vector<double> front_concentration(const Trajectory& traj, const PdeProblem& problem, double band) {
  if (!(band >= 0.0)) throw ConfigError("front_concentration: band must be non-negative");
  if (traj.num_slices() > 0 && traj.spatial_dim() != problem.dim()) {
    throw ConfigError("front_concentration: trajectory dimension does not match the problem");
  }
  const int d = problem.dim();
  std::vector<double> out;
  Eigen::VectorXd p(d + 1);
  for (Eigen::Index s = 0; s < traj.num_slices(); ++s) {
    const Eigen::MatrixXd& x = traj.slice(s);
    if (x.cols() == 0) {
      out.push_back(0.0);
      continue;
    }
    Eigen::Index inside = 0;
    p[d] = traj.time(s);
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      p.head(d) = x.col(i);
      inside += std::abs(problem.front_functional(p)) <= band;
    }
    out.push_back(static_cast<double>(inside) / static_cast<double>(x.cols()));
  }
  return out;
}

double default_front_band(const PdeProblem& problem) {
  const ProblemParams& p = problem.params();
  return 10.0 * (p.alpha > 0.0 ? p.alpha : 0.5 * p.sigma * p.sigma);
}

}  // namespace pmsm
