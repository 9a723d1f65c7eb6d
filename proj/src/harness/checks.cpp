#include "pmsm/harness/checks.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <ostream>

#include "pmsm/autodiff/jet.hpp"
#include "pmsm/format.hpp"
#include "pmsm/problems/residual_data.hpp"
#include "pmsm/random.hpp"
#include "pmsm/sampling/hmc.hpp"
#include "pmsm/trainers/pinn_loss.hpp"
#include "pmsm/transport/velocity.hpp"

namespace pmsm {

namespace {

// Plain scalar forward pass sharing nothing with the jet code.
double naive_value(const DenseNet& net, const Eigen::VectorXd& x) {
  std::vector<double> h(x.data(), x.data() + x.size());
  for (int l = 0; l < net.num_layers(); ++l) {
    const int in = net.layer_sizes()[l];
    const int out = net.layer_sizes()[l + 1];
    const double* w = net.params().data() + net.weight_offset(l);
    const double* b = net.params().data() + net.bias_offset(l);
    std::vector<double> z(static_cast<std::size_t>(out));
    for (int i = 0; i < out; ++i) {
      double acc = b[i];
      for (int j = 0; j < in; ++j) acc += w[i * in + j] * h[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(i)] = (l + 1 < net.num_layers()) ? std::tanh(acc) : acc;
    }
    h = std::move(z);
  }
  return h[0];
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-3); }

double shifted(const DenseNet& net, const Eigen::VectorXd& x, Eigen::Index k, double s) {
  Eigen::VectorXd p = x;
  p[k] += s;
  return naive_value(net, p);
}

void check_jet_case(const DenseNet& net, const Eigen::VectorXd& x, int id, GradientCheckReport& r) {
  const Jet jet = forward_extended(net, x);
  const int d = net.spatial_dim();
  const double hg = 1e-3, hl = 5e-3;
  const double f0 = naive_value(net, x);
  double lap = 0.0;
  for (Eigen::Index k = 0; k <= d; ++k) {
    const double g = (-shifted(net, x, k, 2 * hg) + 8 * shifted(net, x, k, hg) - 8 * shifted(net, x, k, -hg) +
                      shifted(net, x, k, -2 * hg)) /
                     (12 * hg);
    const double e = rel_err(jet.grad[k], g);
    r.max_grad_err = std::max(r.max_grad_err, e);
    if (!(e < r.jet_tolerance)) {
      r.failures.push_back("jet case " + std::to_string(id) + ": d/dx" + std::to_string(k) + " error " +
                           format_double(e));
    }
    if (k < d) {
      lap += (-shifted(net, x, k, 2 * hl) + 16 * shifted(net, x, k, hl) - 30 * f0 + 16 * shifted(net, x, k, -hl) -
              shifted(net, x, k, -2 * hl)) /
             (12 * hl * hl);
    }
  }
  const double e = rel_err(jet.lap_x, lap);
  r.max_lap_err = std::max(r.max_lap_err, e);
  if (!(e < r.jet_tolerance)) {
    r.failures.push_back("jet case " + std::to_string(id) + ": laplacian error " + format_double(e));
  }
}

Eigen::MatrixXd random_space_time(const PdeProblem& p, Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box& b = p.domain();
  Eigen::MatrixXd pts(p.dim() + 1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int k = 0; k < p.dim(); ++k) pts(k, i) = b.lo[k] + u(rng) * (b.hi[k] - b.lo[k]);
    pts(p.dim(), i) = p.t0() + u(rng) * (p.horizon() - p.t0());
  }
  return pts;
}

ResidualDataBatch random_residual(int d, Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ResidualDataBatch rd;
  rd.r.resize(n);
  rd.grad_r.resize(d, n);
  rd.dr_dt.resize(n);
  rd.one_sided.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    rd.r[i] = g(rng);
    rd.dr_dt[i] = g(rng);
    for (int k = 0; k < d; ++k) rd.grad_r(k, i) = g(rng);
  }
  return rd;
}

// One parameter-gradient case: a loss with its analytic gradient and a way to
// re-evaluate the loss value only.
template <typename LossFn, typename GradFn>
void check_param_case(DenseNet& net, LossFn loss, GradFn grad, int id, const char* family, Rng& rng,
                      GradientCheckReport& r) {
  const LossGrad lg = grad(net);
  std::uniform_int_distribution<Eigen::Index> pick(0, net.num_params() - 1);
  for (int k = 0; k < 5; ++k) {
    const Eigen::Index j = pick(rng);
    const double keep = net.params()[j];
    const double h = 1e-6 * std::max(1.0, std::abs(keep));
    net.params()[j] = keep + h;
    const double up = loss(net);
    net.params()[j] = keep - h;
    const double down = loss(net);
    net.params()[j] = keep;
    const double e = rel_err(lg.grad[j], (up - down) / (2 * h));
    r.max_param_err = std::max(r.max_param_err, e);
    ++r.param_entries;
    if (!(e < r.param_tolerance)) {
      r.failures.push_back(std::string(family) + " case " + std::to_string(id) + ": param " + std::to_string(j) +
                           " error " + format_double(e));
    }
  }
}

}  // namespace

GradientCheckReport check_gradients(std::uint64_t seed, int jet_cases, int param_cases) {
  GradientCheckReport r;
  Rng rng = make_rng(seed, "check-gradients");
  std::uniform_int_distribution<int> width(4, 12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int dims[] = {1, 2, 3, 6};
  for (int c = 0; c < jet_cases; ++c) {
    const int d = dims[c % 4];
    const int w = width(rng);
    const DenseNet net = make_glorot_net({d + 1, w, w, 1}, rng());
    Eigen::VectorXd x(d + 1);
    for (auto& v : x) v = u(rng);
    check_jet_case(net, x, c, r);
    ++r.jet_cases;
  }

  const ProblemId problems[] = {ProblemId::burgers2d, ProblemId::parabolic2d, ProblemId::fokker_planck3d,
                                ProblemId::burgers6d};
  for (int c = 0; c < param_cases; ++c) {
    const auto problem = make_problem(problems[(c / 4) % 4]);
    const int d = problem->dim();
    switch (c % 4) {
      case 0: {
        DenseNet net = make_glorot_net({d + 1, 6, 6, 1}, rng());
        CollocationSets s;
        s.interior = random_space_time(*problem, 12, rng);
        s.initial = random_space_time(*problem, 6, rng);
        s.initial.bottomRows(1).setConstant(problem->t0());
        s.initial_target = initial_targets(*problem, s.initial);
        s.boundary = uniform_boundary(*problem, 6, std::vector<double>{problem->horizon()}, rng).points;
        s.boundary_target = boundary_targets(*problem, s.boundary);
        const LossWeights lw{0.8, 1.2};
        check_param_case(
            net, [&](const DenseNet& n) { return pinn_loss(n, s, *problem, lw).total; },
            [&](const DenseNet& n) { return pinn_loss_and_grad(n, s, *problem, lw); }, c, "solution loss", rng, r);
        break;
      }
      case 1: {
        VelocityField field(make_glorot_net({d + 1, 8, 1}, rng()));
        const Eigen::MatrixXd pts = random_space_time(*problem, 10, rng);
        const VelocityLossTerms terms = pmsm_velocity_terms(pts, random_residual(d, 10, rng));
        check_param_case(
            field.potential(), [&](const DenseNet& n) { return velocity_loss(VelocityField(n), terms); },
            [&](const DenseNet& n) { return velocity_loss_and_grad(VelocityField(n), terms); }, c,
            "pmsm velocity loss", rng, r);
        break;
      }
      case 2: {
        VelocityField field(make_glorot_net({d + 1, 8, 1}, rng()));
        std::vector<SlicePair> pairs(2);
        for (auto& pr : pairs) {
          pr.points = random_space_time(*problem, 8, rng);
          pr.current = random_residual(d, 8, rng);
          pr.r_next = random_residual(d, 8, rng).r;
          pr.dt = 0.05;
        }
        const VelocityLossTerms terms = msm_velocity_terms(pairs, problem->domain().volume());
        check_param_case(
            field.potential(), [&](const DenseNet& n) { return velocity_loss(VelocityField(n), terms); },
            [&](const DenseNet& n) { return velocity_loss_and_grad(VelocityField(n), terms); }, c,
            "msm velocity loss", rng, r);
        break;
      }
      default: {
        VelocityField field(make_glorot_net({d + 1, 8, 1}, rng()));
        const PointSet bnd = uniform_boundary(*problem, 10, std::vector<double>{problem->t0()}, rng);
        check_param_case(
            field.potential(),
            [&](const DenseNet& n) { return neumann_penalty(VelocityField(n), bnd, problem->domain()); },
            [&](const DenseNet& n) { return neumann_penalty_and_grad(VelocityField(n), bnd, problem->domain()); }, c,
            "neumann penalty", rng, r);
        break;
      }
    }
    ++r.param_cases;
  }
  return r;
}

void write_report(std::ostream& out, const GradientCheckReport& r) {
  out << "jet_cases " << r.jet_cases << "\n"
      << "max_grad_rel_err " << format_double(r.max_grad_err) << "\n"
      << "max_lap_rel_err " << format_double(r.max_lap_err) << "\n"
      << "jet_tolerance " << format_double(r.jet_tolerance) << "\n"
      << "param_cases " << r.param_cases << "\n"
      << "param_entries " << r.param_entries << "\n"
      << "max_param_rel_err " << format_double(r.max_param_err) << "\n"
      << "param_tolerance " << format_double(r.param_tolerance) << "\n"
      << "failures " << r.failures.size() << "\n";
  for (const auto& f : r.failures) out << "  " << f << "\n";
  out << (r.passed() ? "PASS" : "FAIL") << "\n";
}

HmcDiagReport hmc_diagnostics(std::uint64_t seed) {
  HmcDiagReport r;
  {
    const Box box{Eigen::VectorXd::Constant(1, -10), Eigen::VectorXd::Constant(1, 10)};
    const LogDensity target = [&box](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      if (!box.contains(x)) return kLogZero;
      if (g) *g = -x / 0.25;
      return -0.5 * x.squaredNorm() / 0.25;
    };
    HmcConfig cfg;
    cfg.seed = derive_seed(seed, "hmc-diag-gaussian");
    cfg.thin = 2;
    const HmcResult h = hmc_sample(target, box, cfg, 10000);
    r.gaussian_mean = h.samples.mean();
    r.gaussian_var = (h.samples.array() - r.gaussian_mean).square().mean();
    r.gaussian_ok = std::abs(r.gaussian_mean) < 0.02 && std::abs(r.gaussian_var - 0.25) < 0.025;
  }
  {
    // The gradient-energy density of the burgers2d initial front depends on
    // s = x + y only; the chord of the square at s has length proportional to 2 - |s|.
    const auto problem = make_problem(ProblemId::burgers2d);
    HmcConfig cfg;
    cfg.seed = derive_seed(seed, "hmc-diag-front");
    const double eps = cfg.epsilon_floor, k = 1.0 / (2 * problem->params().alpha);
    auto density = [&](double s) {
      const double e = std::exp(-std::abs(s) * k);
      const double w = e / ((1 + e) * (1 + e));
      return (2 * k * k * w * w + eps) * (2 - std::abs(s));
    };
    double band = 0.0, total = 0.0;
    const int fine = 400000;
    for (int i = 0; i < fine; ++i) {
      const double s = -2.0 + 4.0 * (i + 0.5) / fine;
      const double m = density(s);
      total += m;
      if (std::abs(s) <= 0.05) band += m;
    }
    r.front_oracle = band / total;
    const PointSet seeds = hmc_sample(*problem, cfg, 2000);
    int inside = 0;
    for (Eigen::Index i = 0; i < seeds.size(); ++i) inside += std::abs(seeds.points(0, i) + seeds.points(1, i)) <= 0.05;
    r.front_fraction = inside / static_cast<double>(seeds.size());
    r.front_ok = std::abs(r.front_fraction - r.front_oracle) <= 0.05;
  }
  {
    const Box box{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
    auto logp = [](double x) { return -std::pow(x - 0.35, 2) / (2 * 0.04) + 0.8 * x; };
    const LogDensity target = [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
      if (!box.contains(x)) return kLogZero;
      if (g) *g = Eigen::VectorXd::Constant(1, -(x[0] - 0.35) / 0.04 + 0.8);
      return logp(x[0]);
    };
    const int bins = 20, fine = 200000, n = 100000;
    std::vector<double> prob(bins, 0.0);
    double total = 0.0;
    for (int i = 0; i < fine; ++i) {
      const double x = (i + 0.5) / fine;
      const double w = std::exp(logp(x));
      prob[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(x * bins)))] += w;
      total += w;
    }
    HmcConfig cfg;
    cfg.seed = derive_seed(seed, "hmc-diag-chi2");
    cfg.n_chains = 50;
    cfg.thin = 5;
    const HmcResult h = hmc_sample(target, box, cfg, n);
    std::vector<double> count(bins, 0.0);
    for (Eigen::Index i = 0; i < h.samples.cols(); ++i) {
      count[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(h.samples(0, i) * bins)))] += 1.0;
    }
    for (int b = 0; b < bins; ++b) {
      const double e = prob[static_cast<std::size_t>(b)] / total * n;
      const double diff = count[static_cast<std::size_t>(b)] - e;
      r.chi2 += diff * diff / e;
    }
    r.chi2_dof = bins - 1;
    r.chi2_p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.chi2_dof), r.chi2));
    r.chi2_ok = r.chi2_p > 0.01;
  }
  return r;
}

void write_report(std::ostream& out, const HmcDiagReport& r) {
  out << "gaussian_mean " << format_double(r.gaussian_mean) << "\n"
      << "gaussian_var " << format_double(r.gaussian_var) << " (target 0.25)\n"
      << "gaussian " << (r.gaussian_ok ? "ok" : "FAIL") << "\n"
      << "front_fraction " << format_double(r.front_fraction) << " oracle " << format_double(r.front_oracle) << "\n"
      << "front " << (r.front_ok ? "ok" : "FAIL") << "\n"
      << "chi2 " << format_double(r.chi2) << " dof " << r.chi2_dof << " p " << format_double(r.chi2_p) << "\n"
      << "chi2 " << (r.chi2_ok ? "ok" : "FAIL") << "\n"
      << (r.passed() ? "PASS" : "FAIL") << "\n";
}

}  // namespace pmsm
