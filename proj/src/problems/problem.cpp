#include "pmsm/problems/problem.hpp"

#include <cmath>
#include <sstream>

#include "pmsm/error.hpp"
#include "pmsm/problems/benchmarks.hpp"

namespace pmsm {

Box Box::cube(int dim, double lo, double hi) {
  return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi)};
}

double Box::volume() const { return (hi - lo).prod(); }

double Box::face_measure(int face) const {
  const int axis = face / 2;
  double m = 1.0;
  for (int k = 0; k < dim(); ++k) {
    if (k != axis) m *= hi[k] - lo[k];
  }
  return m;
}

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  for (int k = 0; k < dim(); ++k) {
    if (!(x[k] >= lo[k] && x[k] <= hi[k])) return false;
  }
  return true;
}

bool Box::on_face(const Eigen::Ref<const Eigen::VectorXd>& x, int face) const {
  const int axis = face / 2;
  const double bound = (face % 2 == 0) ? lo[axis] : hi[axis];
  return x[axis] == bound && contains(x);
}

int Box::face_of(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!contains(x)) return -1;
  for (int f = 0; f < num_faces(); ++f) {
    if (on_face(x, f)) return f;
  }
  return -1;
}

Eigen::VectorXd Box::outward_normal(int face) const {
  Eigen::VectorXd n = Eigen::VectorXd::Zero(dim());
  n[face / 2] = (face % 2 == 0) ? -1.0 : 1.0;
  return n;
}

void Box::clamp(Eigen::Ref<Eigen::VectorXd> x) const { x = x.cwiseMax(lo).cwiseMin(hi); }

std::string_view to_string(ProblemId id) {
  switch (id) {
    case ProblemId::burgers2d: return "burgers2d";
    case ProblemId::parabolic2d: return "parabolic2d";
    case ProblemId::fokker_planck3d: return "fokker_planck3d";
    case ProblemId::burgers6d: return "burgers6d";
  }
  return "unknown";
}

ProblemId problem_id_from_string(std::string_view name) {
  for (ProblemId id : {ProblemId::burgers2d, ProblemId::parabolic2d, ProblemId::fokker_planck3d,
                       ProblemId::burgers6d}) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

PdeProblem::PdeProblem(Box domain, double t0, double horizon, ProblemParams params, SeedDensity seed,
                       bool needs_velocity_neumann)
    : domain_(std::move(domain)),
      t0_(t0),
      horizon_(horizon),
      params_(params),
      seed_density_(seed),
      needs_velocity_neumann_(needs_velocity_neumann) {
  if (!(horizon_ > t0_)) throw ConfigError("time horizon must exceed t0");
  if ((domain_.hi.array() <= domain_.lo.array()).any()) throw ConfigError("domain box has an empty axis");
}

bool PdeProblem::in_space_time(Point point) const {
  if (point.size() != dim() + 1) return false;
  const double t = point[dim()];
  return t >= t0_ && t <= horizon_ && domain_.contains(point.head(dim()));
}

double PdeProblem::residual(const Jet& jet, Point point) const {
  if (point.size() != dim() + 1 || jet.grad.size() != dim() + 1) {
    throw ConfigError("residual: expected points and jet gradients of length " + std::to_string(dim() + 1));
  }
  if (!in_space_time(point)) {
    std::ostringstream os;
    os << name() << ": point (" << point.transpose() << ") outside the space-time domain";
    throw DomainError(os.str());
  }
  return residual_terms(jet.value, {jet.grad.data(), static_cast<std::size_t>(jet.grad.size())}, jet.lap_x,
                        {point.data(), static_cast<std::size_t>(point.size())}, nullptr);
}

double PdeProblem::initial(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd p(dim() + 1);
  p << x, t0_;
  return exact(p);
}

Eigen::VectorXd residual_batch(const PdeProblem& problem, const JetBatch& jets,
                               const Eigen::Ref<const Eigen::MatrixXd>& points, JetBatch* partials) {
  const int n_in = problem.dim() + 1;
  if (points.rows() != n_in || points.cols() != jets.size() || jets.grads.rows() != n_in ||
      jets.laps.size() != jets.size()) {
    throw ConfigError("residual_batch: jets and points disagree in shape");
  }
  if (partials) partials->resize(jets.size(), n_in, JetOrder::laplacian);
  Eigen::VectorXd r(jets.size());
  JetPartials jp;
  for (Eigen::Index i = 0; i < jets.size(); ++i) {
    if (!problem.in_space_time(points.col(i))) {
      std::ostringstream os;
      os << problem.name() << ": point " << i << " (" << points.col(i).transpose()
         << ") outside the space-time domain";
      throw DomainError(os.str());
    }
    r[i] = problem.residual_terms(jets.values[i], {jets.grads.col(i).data(), static_cast<std::size_t>(n_in)},
                                  jets.laps[i], {points.col(i).data(), static_cast<std::size_t>(n_in)},
                                  partials ? &jp : nullptr);
    if (partials) {
      partials->values[i] = jp.value;
      partials->grads.col(i) = jp.grad;
      partials->laps[i] = jp.lap;
    }
  }
  return r;
}

namespace {

double take(ProblemOverrides& o, const char* key, double fallback) {
  auto it = o.find(key);
  if (it == o.end()) return fallback;
  const double v = it->second;
  o.erase(it);
  if (!std::isfinite(v)) throw ConfigError(std::string("problem parameter '") + key + "' must be finite");
  return v;
}

void require_positive(double v, const char* key) {
  if (!(v > 0.0)) throw ConfigError(std::string("problem parameter '") + key + "' must be positive");
}

}  // namespace

std::unique_ptr<PdeProblem> make_problem(ProblemId id, const ProblemOverrides& overrides) {
  ProblemOverrides o = overrides;
  std::unique_ptr<PdeProblem> p;
  switch (id) {
    case ProblemId::burgers2d: {
      const double alpha = take(o, "alpha", 0.001), T = take(o, "T", 1.05);
      require_positive(alpha, "alpha");
      p = std::make_unique<Burgers2d>(alpha, T);
      break;
    }
    case ProblemId::parabolic2d: {
      const double alpha = take(o, "alpha", 0.01), c0 = take(o, "c0", 1.0), cinf = take(o, "cinf", 4.0),
                   beta = take(o, "beta", 2.0), T = take(o, "T", 1.55);
      require_positive(alpha, "alpha");
      require_positive(c0, "c0");
      require_positive(cinf, "cinf");
      require_positive(beta, "beta");
      p = std::make_unique<Parabolic2d>(alpha, c0, cinf, beta, T);
      break;
    }
    case ProblemId::fokker_planck3d: {
      const double sigma = take(o, "sigma", 0.1), r = take(o, "r", 1.0), T = take(o, "T", 1.15);
      require_positive(sigma, "sigma");
      require_positive(r, "r");
      p = std::make_unique<FokkerPlanck3d>(sigma, r, T);
      break;
    }
    case ProblemId::burgers6d: {
      const double alpha = take(o, "alpha", 0.01), T = take(o, "T", 1.05);
      require_positive(alpha, "alpha");
      p = std::make_unique<Burgers6d>(alpha, T);
      break;
    }
  }
  if (!o.empty()) {
    throw ConfigError("parameter '" + o.begin()->first + "' does not apply to problem " +
                      std::string(to_string(id)));
  }
  return p;
}

std::unique_ptr<PdeProblem> make_problem(std::string_view id, const ProblemOverrides& overrides) {
  return make_problem(problem_id_from_string(id), overrides);
}

}  // namespace pmsm
