#include "pmsm/transport/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "pmsm/error.hpp"
#include "pmsm/format.hpp"
#include "pmsm/random.hpp"

namespace pmsm {

std::string_view to_string(Provenance p) { return p == Provenance::final ? "final" : "temporary"; }

Trajectory::Trajectory(Eigen::MatrixXd seeds, double t0) {
  if (seeds.cols() == 0) throw ConfigError("trajectory: no seed points");
  slices_.push_back(std::move(seeds));
  times_.push_back(t0);
  provenance_.push_back(Provenance::final);
}

void Trajectory::append(Eigen::MatrixXd points, double t, Provenance p) {
  if (slices_.empty()) {
    if (points.cols() == 0) throw ConfigError("trajectory: no seed points");
  } else if (points.rows() != slices_.front().rows() || points.cols() != slices_.front().cols()) {
    throw ConfigError("trajectory: every slice must hold the same number of points");
  }
  slices_.push_back(std::move(points));
  times_.push_back(t);
  provenance_.push_back(p);
}

void Trajectory::replace(Eigen::Index i, Eigen::MatrixXd points, Provenance p) {
  auto& s = slices_.at(static_cast<std::size_t>(i));
  if (points.rows() != s.rows() || points.cols() != s.cols()) {
    throw ConfigError("trajectory: replacement slice has the wrong shape");
  }
  s = std::move(points);
  provenance_[static_cast<std::size_t>(i)] = p;
}

void Trajectory::truncate(Eigen::Index n) {
  const auto keep = static_cast<std::size_t>(std::clamp<Eigen::Index>(n, 0, num_slices()));
  slices_.resize(keep);
  times_.resize(keep);
  provenance_.resize(keep);
}

PointSet Trajectory::space_time_points(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 0 || first + count > num_slices()) {
    throw ConfigError("trajectory: slice range out of bounds");
  }
  const int d = spatial_dim();
  const Eigen::Index n = num_points();
  PointSet out;
  out.kind = PointKind::adaptive;
  out.points.resize(d + 1, n * count);
  for (Eigen::Index s = 0; s < count; ++s) {
    out.points.block(0, s * n, d, n) = slice(first + s);
    out.points.block(d, s * n, 1, n).setConstant(time(first + s));
  }
  return out;
}

VelocityFn velocity_fn(const VelocityField& field) {
  return [&field](const Eigen::MatrixXd& x, double t) -> Eigen::MatrixXd {
    if (x.rows() != field.spatial_dim()) throw ConfigError("evolve: points do not match the velocity field");
    Eigen::MatrixXd st(x.rows() + 1, x.cols());
    st.topRows(x.rows()) = x;
    st.bottomRows(1).setConstant(t);
    return velocity_batch(field, st, false).v;
  };
}

namespace {

Eigen::MatrixXd euler_step(const VelocityFn& velocity, const Eigen::Ref<const Eigen::MatrixXd>& x, double t,
                           double dt) {
  const Eigen::MatrixXd v = velocity(x, t);
  if (v.rows() != x.rows() || v.cols() != x.cols()) throw ConfigError("evolve: velocity has the wrong shape");
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    if (!v.col(i).allFinite()) throw NumericError("evolve: non-finite velocity at point " + std::to_string(i), static_cast<std::size_t>(i));
  }
  return x + dt * v;
}

}  // namespace

Eigen::MatrixXd evolve_points(const VelocityFn& velocity, const Eigen::Ref<const Eigen::MatrixXd>& x, double t,
                              double dt, const Box& domain) {
  if (x.rows() != domain.dim()) throw ConfigError("evolve: points do not match the domain");
  Eigen::MatrixXd y = euler_step(velocity, x, t, dt);
  for (Eigen::Index i = 0; i < y.cols(); ++i) domain.clamp(y.col(i));
  return y;
}

Eigen::MatrixXd evolve_points(const VelocityField& field, const Eigen::Ref<const Eigen::MatrixXd>& x, double t,
                              double dt, const Box& domain) {
  return evolve_points(velocity_fn(field), x, t, dt, domain);
}

Eigen::MatrixXd evolve_slice(const Trajectory& traj, const VelocityField& field, Eigen::Index from_slice, double dt,
                             const Box& domain) {
  if (from_slice < 0 || from_slice >= traj.num_slices()) throw ConfigError("evolve_slice: slice does not exist");
  return evolve_points(field, traj.slice(from_slice), traj.time(from_slice), dt, domain);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const int d = traj.spatial_dim();
  out << "t";
  for (int k = 1; k <= d; ++k) out << ",x" << k;
  out << ",kind,provenance\n";
  for (Eigen::Index s = 0; s < traj.num_slices(); ++s) {
    const auto& x = traj.slice(s);
    const std::string t = format_double(traj.time(s));
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      out << t;
      for (int k = 0; k < d; ++k) out << ',' << format_double(x(k, i));
      out << ",adaptive," << to_string(traj.provenance(s)) << '\n';
    }
  }
}

PushforwardReport density_pushforward_check(const VelocityField& field, const Box& box, double t0, double dt,
                                            int n, int steps, int bins, BoundaryMode mode, std::uint64_t seed) {
  if (box.dim() != field.spatial_dim()) throw ConfigError("pushforward check: box does not match the velocity field");
  return density_pushforward_check(velocity_fn(field), box, t0, dt, n, steps, bins, mode, seed);
}

PushforwardReport density_pushforward_check(const VelocityFn& velocity, const Box& box, double t0, double dt, int n,
                                            int steps, int bins, BoundaryMode mode, std::uint64_t seed) {
  const int d = box.dim();
  if (n < 1 || steps < 0 || bins < 1) throw ConfigError("pushforward check: invalid sizes");

  // Compose the per-step affine maps x -> (I + dt A_k) x + dt c_k, reading A_k
  // and c_k off the velocity at the origin and the unit vectors.
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    Eigen::MatrixXd probe = Eigen::MatrixXd::Zero(d, d + 1);
    for (int j = 0; j < d; ++j) probe(j, j + 1) = 1.0;
    const Eigen::MatrixXd v = velocity(probe, t);
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(d, d);
    for (int j = 0; j < d; ++j) step.col(j) += dt * (v.col(j + 1) - v.col(0));
    m = step * m;
    b = step * b + dt * v.col(0);
  }
  const double m0 = m(0, 0);
  for (int j = 1; j < d; ++j) {
    if (std::abs(m(0, j)) > 1e-9 * std::max(1.0, std::abs(m0))) {
      throw ConfigError("pushforward check: the map mixes the first coordinate with the others");
    }
  }
  if (mode == BoundaryMode::wrap && std::abs(m0 - 1.0) > 1e-9) {
    throw ConfigError("pushforward check: wrapped transport requires a pure translation");
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(d, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) x(k, i) = box.lo[k] + u(rng) * (box.hi[k] - box.lo[k]);
  }
  const double lo = box.lo[0], len = box.hi[0] - box.lo[0];
  auto wrap = [&](double v) {
    double r = std::fmod(v - lo, len);
    if (r < 0) r += len;
    return lo + r;
  };
  for (int k = 0; k < steps; ++k) {
    x = euler_step(velocity, x, t0 + k * dt, dt);
    if (mode == BoundaryMode::wrap) x.row(0) = x.row(0).unaryExpr(wrap);
  }

  // The first coordinate of the image is uniform on [y_lo, y_hi].
  const double y_a = m0 * box.lo[0] + b[0], y_b = m0 * box.hi[0] + b[0];
  const double y_lo = std::min(y_a, y_b), y_hi = std::max(y_a, y_b);
  double h_lo = lo, h_hi = box.hi[0];
  if (mode == BoundaryMode::none) {
    h_lo = std::min(h_lo, y_lo);
    h_hi = std::max(h_hi, y_hi);
  }
  const double width = (h_hi - h_lo) / bins;
  auto overlap = [](double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); };

  std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
  for (int i = 0; i < n; ++i) {
    const int bin = std::clamp(static_cast<int>((x(0, i) - h_lo) / width), 0, bins - 1);
    count[static_cast<std::size_t>(bin)] += 1.0;
  }
  PushforwardReport rep;
  rep.bins = bins;
  for (int j = 0; j < bins; ++j) {
    const double a0 = h_lo + j * width, a1 = a0 + width;
    double mass = 0.0;
    if (mode == BoundaryMode::wrap) {
      const auto k_lo = static_cast<long>(std::floor((y_lo - a1) / len)), k_hi = static_cast<long>(std::ceil((y_hi - a0) / len));
      for (long k = k_lo; k <= k_hi; ++k) mass += overlap(a0 + k * len, a1 + k * len, y_lo, y_hi);
    } else {
      mass = overlap(a0, a1, y_lo, y_hi);
    }
    const double p = y_hi > y_lo ? mass / (y_hi - y_lo) : 0.0;
    const double c = count[static_cast<std::size_t>(j)];
    rep.max_abs_prob_diff = std::max(rep.max_abs_prob_diff, std::abs(c / n - p));
    if (p > 0 && p < 1) {
      rep.max_sigma = std::max(rep.max_sigma, std::abs(c - n * p) / std::sqrt(n * p * (1 - p)));
    } else if (std::abs(c - n * p) > 0.5) {
      rep.max_sigma = std::numeric_limits<double>::infinity();
    }
  }
  return rep;
}

}  // namespace pmsm
