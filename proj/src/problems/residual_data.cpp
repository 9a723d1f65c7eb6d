#include "pmsm/problems/residual_data.hpp"

#include <array>
#include <cmath>

#include "pmsm/autodiff/jet.hpp"
#include "pmsm/error.hpp"

namespace pmsm {

ResidualData ResidualDataBatch::at(Eigen::Index i) const {
  return {r[i], grad_r.col(i), dr_dt[i], one_sided[static_cast<std::size_t>(i)] != 0};
}

namespace {

// Stencil offsets (in units of h) and weights (times 1/h) for one derivative.
struct Stencil {
  std::array<double, 2> offset;
  std::array<double, 3> weight;  // center, offset[0], offset[1]
  bool one_sided;
};

constexpr Stencil kCentral{{-1.0, 1.0}, {0.0, -0.5, 0.5}, false};
constexpr Stencil kForward{{1.0, 2.0}, {-1.5, 2.0, -0.5}, true};
constexpr Stencil kBackward{{-1.0, -2.0}, {1.5, -2.0, 0.5}, true};

Stencil choose(double x, double lo, double hi, double h) {
  if (x - h >= lo && x + h <= hi) return kCentral;
  if (x + 2 * h <= hi && x >= lo) return kForward;
  if (x - 2 * h >= lo && x <= hi) return kBackward;
  throw ConfigError("residual_data: box axis narrower than the finite-difference stencil");
}

}  // namespace

ResidualDataBatch residual_data(const ResidualField& field, const Box& space_time,
                                const Eigen::Ref<const Eigen::MatrixXd>& points, double h) {
  const Eigen::Index n_in = points.rows(), n = points.cols();
  if (n_in != space_time.dim()) throw ConfigError("residual_data: points do not match the space-time box");
  if (!(h > 0)) throw ConfigError("residual_data: step must be positive");
  const Eigen::Index per_point = 1 + 2 * n_in;

  std::vector<Stencil> stencils(static_cast<std::size_t>(n * n_in), kCentral);
  Eigen::MatrixXd eval(n_in, n * per_point);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index base = i * per_point;
    eval.col(base) = points.col(i);
    for (Eigen::Index k = 0; k < n_in; ++k) {
      const Stencil s = choose(points(k, i), space_time.lo[k], space_time.hi[k], h);
      stencils[static_cast<std::size_t>(i * n_in + k)] = s;
      for (int j = 0; j < 2; ++j) {
        Eigen::Index c = base + 1 + 2 * k + j;
        eval.col(c) = points.col(i);
        eval(k, c) += s.offset[j] * h;
      }
    }
  }
  const Eigen::VectorXd r = field(eval);
  if (r.size() != eval.cols()) throw ConfigError("residual_data: field returned the wrong number of values");

  ResidualDataBatch out;
  out.r.resize(n);
  out.grad_r.resize(n_in - 1, n);
  out.dr_dt.resize(n);
  out.one_sided.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index base = i * per_point;
    out.r[i] = r[base];
    for (Eigen::Index k = 0; k < n_in; ++k) {
      const Stencil& s = stencils[static_cast<std::size_t>(i * n_in + k)];
      const double d = (s.weight[0] * r[base] + s.weight[1] * r[base + 1 + 2 * k] +
                        s.weight[2] * r[base + 2 + 2 * k]) / h;
      if (k + 1 < n_in) {
        out.grad_r(k, i) = d;
      } else {
        out.dr_dt[i] = d;
      }
      if (s.one_sided) out.one_sided[static_cast<std::size_t>(i)] = 1;
    }
    if (!std::isfinite(out.r[i]) || !out.grad_r.col(i).allFinite() || !std::isfinite(out.dr_dt[i])) {
      throw NumericError("residual_data: non-finite residual or derivative", static_cast<std::size_t>(i));
    }
  }
  return out;
}

ResidualField residual_field(const PdeProblem& problem, const DenseNet& net) {
  return [&problem, &net](const Eigen::MatrixXd& pts) {
    const JetBatch jets = forward_batch(net, pts, JetOrder::laplacian);
    return residual_batch(problem, jets, pts);
  };
}

Box space_time_box(const PdeProblem& problem) {
  const int d = problem.dim();
  Box b{Eigen::VectorXd(d + 1), Eigen::VectorXd(d + 1)};
  b.lo << problem.domain().lo, problem.t0();
  b.hi << problem.domain().hi, problem.horizon();
  return b;
}

ResidualDataBatch residual_data(const PdeProblem& problem, const DenseNet& net,
                                const Eigen::Ref<const Eigen::MatrixXd>& points, double h) {
  if (net.input_dim() != problem.dim() + 1) {
    throw ConfigError("residual_data: network input dimension does not match the problem");
  }
  return residual_data(residual_field(problem, net), space_time_box(problem), points, h);
}

ResidualData residual_data_at(const PdeProblem& problem, const DenseNet& net, Point point, double h) {
  return residual_data(problem, net, Eigen::MatrixXd(point), h).at(0);
}

}  // namespace pmsm
