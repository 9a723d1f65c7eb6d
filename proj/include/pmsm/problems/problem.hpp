#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "pmsm/autodiff/jet.hpp"

namespace pmsm {

using Point = Eigen::Ref<const Eigen::VectorXd>;

/// Closed axis-aligned box. Faces are numbered 2*axis (lower) and 2*axis+1
/// (upper); the outward normal of face f is -e_axis or +e_axis.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  double face_measure(int face) const;
  int num_faces() const { return 2 * dim(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  bool on_face(const Eigen::Ref<const Eigen::VectorXd>& x, int face) const;
  /// First face the point lies on, or -1 for interior/exterior points.
  int face_of(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd outward_normal(int face) const;
  void clamp(Eigen::Ref<Eigen::VectorXd> x) const;
};

enum class ProblemId { burgers2d, parabolic2d, fokker_planck3d, burgers6d };
enum class SeedDensity { abs_u0, grad_energy_u0 };

std::string_view to_string(ProblemId id);
ProblemId problem_id_from_string(std::string_view name);

/// Scalar parameters shared by the benchmarks; unused entries stay zero.
struct ProblemParams {
  double alpha = 0.0;
  double sigma = 0.0;
  double radius = 0.0;
  double c0 = 0.0;
  double cinf = 0.0;
  double beta = 0.0;
};

/// d(residual)/d(jet entries) at one point.
struct JetPartials {
  double value = 0.0;
  Eigen::VectorXd grad;  // length d+1
  double lap = 0.0;
};

/// A seed monitor m(x) >= 0 and its spatial gradient; the HMC target is
/// log(m(x) + eps).
struct Monitor {
  double value = 0.0;
  Eigen::VectorXd grad;
};

/// A time-dependent PDE  L u = f  on domain x [t0, T] with Dirichlet data and a
/// closed-form solution. Points are (x_1, ..., x_d, t).
class PdeProblem {
 public:
  virtual ~PdeProblem() = default;

  virtual std::string_view name() const = 0;

  int dim() const { return domain_.dim(); }
  const Box& domain() const { return domain_; }
  double t0() const { return t0_; }
  double horizon() const { return horizon_; }
  const ProblemParams& params() const { return params_; }
  SeedDensity seed_density() const { return seed_density_; }
  bool needs_velocity_neumann() const { return needs_velocity_neumann_; }

  bool in_space_time(Point point) const;

  /// r = L u - f from a jet of u at `point`. Throws DomainError outside the
  /// closed space-time domain.
  double residual(const Jet& jet, Point point) const;

  /// Residual from raw jet entries without the domain check. When `partials`
  /// is non-null it receives d r / d(value, grad, lap).
  virtual double residual_terms(double u, std::span<const double> grad, double lap, std::span<const double> point,
                                JetPartials* partials) const = 0;

  virtual double forcing(Point) const { return 0.0; }
  virtual double exact(Point point) const = 0;
  /// Analytic value, space-time gradient and spatial Laplacian of the exact solution.
  virtual Jet exact_jet(Point point) const = 0;
  /// u0(x), the exact solution at t0.
  double initial(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Dirichlet data; equals the exact solution on the boundary.
  double boundary(Point point) const { return exact(point); }
  /// |u0| or |grad u0|^2 depending on seed_density().
  virtual Monitor seed_monitor(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  /// Signed or unsigned distance-like functional to the moving singular set.
  virtual double front_functional(Point point) const = 0;

 protected:
  PdeProblem(Box domain, double t0, double horizon, ProblemParams params, SeedDensity seed,
             bool needs_velocity_neumann);

 private:
  Box domain_;
  double t0_;
  double horizon_;
  ProblemParams params_;
  SeedDensity seed_density_;
  bool needs_velocity_neumann_;
};

/// Named overrides, e.g. {"alpha": 0.01, "T": 2.0}. Keys: alpha, sigma, r, c0,
/// cinf, beta, T.
using ProblemOverrides = std::map<std::string, double>;

std::unique_ptr<PdeProblem> make_problem(ProblemId id, const ProblemOverrides& overrides = {});
std::unique_ptr<PdeProblem> make_problem(std::string_view id, const ProblemOverrides& overrides = {});

/// Residuals at a batch of points from a batch of jets. When `partials` is
/// non-null it is resized like `jets` (laplacian order) and filled.
Eigen::VectorXd residual_batch(const PdeProblem& problem, const JetBatch& jets,
                               const Eigen::Ref<const Eigen::MatrixXd>& points, JetBatch* partials = nullptr);

}  // namespace pmsm
