#include "pmsm/sampling/point_set.hpp"

#include <ostream>

#include "pmsm/error.hpp"
#include "pmsm/format.hpp"

namespace pmsm {

std::string_view to_string(PointKind kind) {
  switch (kind) {
    case PointKind::interior: return "interior";
    case PointKind::initial: return "initial";
    case PointKind::boundary: return "boundary";
    case PointKind::adaptive: return "adaptive";
  }
  return "unknown";
}

PointSet slice_columns(const PointSet& set, Eigen::Index first, Eigen::Index count) {
  if (first < 0 || count < 0 || first + count > set.size()) throw ConfigError("slice_columns: range out of bounds");
  PointSet out;
  out.kind = set.kind;
  out.points = set.points.middleCols(first, count);
  if (!set.faces.empty()) out.faces.assign(set.faces.begin() + first, set.faces.begin() + first + count);
  return out;
}

PointSet concat(std::span<const PointSet> sets) {
  PointSet out;
  if (sets.empty()) return out;
  out.kind = sets.front().kind;
  Eigen::Index total = 0;
  bool tagged = true;
  for (const auto& s : sets) {
    if (s.points.rows() != sets.front().points.rows()) throw ConfigError("concat: point sets differ in dimension");
    total += s.size();
    tagged = tagged && (s.faces.size() == static_cast<std::size_t>(s.size()));
  }
  out.points.resize(sets.front().points.rows(), total);
  Eigen::Index at = 0;
  for (const auto& s : sets) {
    out.points.middleCols(at, s.size()) = s.points;
    at += s.size();
    if (tagged) out.faces.insert(out.faces.end(), s.faces.begin(), s.faces.end());
  }
  return out;
}

namespace {

Eigen::MatrixXd repeat_over_times(const Eigen::MatrixXd& spatial, std::span<const double> times) {
  const Eigen::Index d = spatial.rows(), n = spatial.cols();
  Eigen::MatrixXd pts(d + 1, n * static_cast<Eigen::Index>(times.size()));
  for (std::size_t s = 0; s < times.size(); ++s) {
    const Eigen::Index base = static_cast<Eigen::Index>(s) * n;
    pts.block(0, base, d, n) = spatial;
    pts.block(d, base, 1, n).setConstant(times[s]);
  }
  return pts;
}

void check_times(const PdeProblem& problem, std::span<const double> times) {
  for (double t : times) {
    if (!(t >= problem.t0() && t <= problem.horizon())) {
      throw DomainError("sampling time " + format_double(t) + " outside [t0, T]");
    }
  }
}

Eigen::MatrixXd uniform_in_box(const Box& box, Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(box.dim(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < box.dim(); ++k) x(k, i) = box.lo[k] + u(rng) * (box.hi[k] - box.lo[k]);
  }
  return x;
}

}  // namespace

PointSet uniform_interior(const PdeProblem& problem, Eigen::Index n_per_slice, std::span<const double> times,
                          Rng& rng) {
  check_times(problem, times);
  PointSet out;
  out.kind = PointKind::interior;
  out.points = repeat_over_times(uniform_in_box(problem.domain(), n_per_slice, rng), times);
  return out;
}

PointSet uniform_boundary(const PdeProblem& problem, Eigen::Index n_per_slice, std::span<const double> times,
                          Rng& rng) {
  check_times(problem, times);
  const Box& box = problem.domain();
  std::vector<double> weights(static_cast<std::size_t>(box.num_faces()));
  for (int f = 0; f < box.num_faces(); ++f) weights[static_cast<std::size_t>(f)] = box.face_measure(f);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());

  Eigen::MatrixXd spatial = uniform_in_box(box, n_per_slice, rng);
  std::vector<int> faces(static_cast<std::size_t>(n_per_slice));
  for (Eigen::Index i = 0; i < n_per_slice; ++i) {
    const int f = pick(rng);
    faces[static_cast<std::size_t>(i)] = f;
    spatial(f / 2, i) = (f % 2 == 0) ? box.lo[f / 2] : box.hi[f / 2];
  }
  PointSet out;
  out.kind = PointKind::boundary;
  out.points = repeat_over_times(spatial, times);
  for (std::size_t s = 0; s < times.size(); ++s) out.faces.insert(out.faces.end(), faces.begin(), faces.end());
  return out;
}

PointSet uniform_initial(const PdeProblem& problem, Eigen::Index n, Rng& rng) {
  const double t0 = problem.t0();
  PointSet out;
  out.kind = PointKind::initial;
  out.points = repeat_over_times(uniform_in_box(problem.domain(), n, rng), {&t0, 1});
  return out;
}

bool valid_point_set(const PdeProblem& problem, const PointSet& set) {
  if (set.points.rows() != problem.dim() + 1) return false;
  if (set.kind == PointKind::boundary && set.faces.size() != static_cast<std::size_t>(set.size())) return false;
  const int d = problem.dim();
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const auto p = set.points.col(i);
    if (!problem.in_space_time(p)) return false;
    if (set.kind == PointKind::initial && p[d] != problem.t0()) return false;
    if (set.kind == PointKind::boundary && !problem.domain().on_face(p.head(d), set.faces[static_cast<std::size_t>(i)])) {
      return false;
    }
  }
  return true;
}

void write_point_csv(std::ostream& out, std::span<const PointSet> sets) {
  if (sets.empty()) return;
  const int d = sets.front().spatial_dim();
  out << "t";
  for (int k = 1; k <= d; ++k) out << ",x" << k;
  out << ",kind\n";
  for (const auto& s : sets) {
    if (s.spatial_dim() != d) throw ConfigError("write_point_csv: point sets differ in dimension");
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      out << format_double(s.points(d, i));
      for (int k = 0; k < d; ++k) out << ',' << format_double(s.points(k, i));
      out << ',' << to_string(s.kind) << '\n';
    }
  }
}

}  // namespace pmsm
