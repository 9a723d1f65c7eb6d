#include "pmsm/sampling/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "pmsm/error.hpp"
#include "pmsm/format.hpp"

namespace pmsm {

void validate(const HmcConfig& cfg) {
  if (cfg.n_chains < 1) throw ConfigError("hmc: n_chains must be positive");
  if (cfg.burn_in < 0) throw ConfigError("hmc: burn_in must be non-negative");
  if (cfg.leapfrog_steps < 1) throw ConfigError("hmc: leapfrog_steps must be positive");
  if (!(cfg.step_size > 0)) throw ConfigError("hmc: step_size must be positive");
  if (!(cfg.target_accept > 0 && cfg.target_accept < 1)) throw ConfigError("hmc: target_accept must lie in (0,1)");
  if (!(cfg.epsilon_floor > 0)) throw ConfigError("hmc: epsilon_floor must be positive");
  if (cfg.thin < 1) throw ConfigError("hmc: thin must be positive");
  if (cfg.init_candidates < 1) throw ConfigError("hmc: init_candidates must be positive");
  if (cfg.threads < 1) throw ConfigError("hmc: threads must be positive");
}

LeapfrogState leapfrog(const LogDensity& log_density, LeapfrogState s, double step_size, int steps) {
  for (int i = 0; i < steps; ++i) {
    s.p += 0.5 * step_size * s.grad;
    s.x += step_size * s.p;
    s.log_density = log_density(s.x, &s.grad);
    if (!std::isfinite(s.log_density)) {
      s.log_density = kLogZero;
      return s;
    }
    s.p += 0.5 * step_size * s.grad;
  }
  return s;
}

namespace {

// Dual averaging of the log step size toward a target acceptance probability.
class StepAdapter {
 public:
  StepAdapter(double step, double target) : mu_(std::log(10.0 * step)), target_(target), log_step_(std::log(step)) {}

  double update(double accept_prob) {
    ++m_;
    const double m = static_cast<double>(m_);
    h_bar_ = (1.0 - 1.0 / (m + kT0)) * h_bar_ + (target_ - accept_prob) / (m + kT0);
    log_step_ = mu_ - std::sqrt(m) / kGamma * h_bar_;
    const double eta = std::pow(m, -kKappa);
    log_step_bar_ = eta * log_step_ + (1.0 - eta) * log_step_bar_;
    return std::exp(log_step_);
  }
  double final_step() const { return std::exp(log_step_bar_); }

 private:
  static constexpr double kGamma = 0.05, kT0 = 10.0, kKappa = 0.75;
  double mu_, target_;
  double log_step_;
  double log_step_bar_ = 0.0;
  double h_bar_ = 0.0;
  long m_ = 0;
};

struct ChainOutput {
  Eigen::MatrixXd samples;
  std::int64_t accepted = 0, proposals = 0, left_support = 0, energy_count = 0;
  double abs_delta_h = 0.0;
  double step = 0.0;
};

ChainOutput run_chain(const LogDensity& log_density, const Eigen::VectorXd& start, const HmcConfig& cfg,
                      Eigen::Index n_keep, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> path_length(1, cfg.leapfrog_steps);
  const Eigen::Index d = start.size();

  LeapfrogState cur{start, Eigen::VectorXd::Zero(d), kLogZero, Eigen::VectorXd::Zero(d)};
  cur.log_density = log_density(cur.x, &cur.grad);

  ChainOutput out;
  out.samples.resize(d, n_keep);
  StepAdapter adapter(cfg.step_size, cfg.target_accept);
  double step = cfg.step_size;
  if (cfg.burn_in == 0) out.step = step;
  const std::int64_t total = cfg.burn_in + static_cast<std::int64_t>(n_keep) * cfg.thin;
  Eigen::Index kept = 0;
  for (std::int64_t it = 0; it < total; ++it) {
    LeapfrogState prop = cur;
    for (Eigen::Index k = 0; k < d; ++k) prop.p[k] = normal(rng);
    const double h0 = -cur.log_density + 0.5 * prop.p.squaredNorm();
    const int steps = cfg.random_path_length ? path_length(rng) : cfg.leapfrog_steps;
    prop = leapfrog(log_density, std::move(prop), step, steps);
    double accept_prob = 0.0;
    double delta_h = 0.0;
    const bool in_support = std::isfinite(prop.log_density);
    if (in_support) {
      delta_h = (-prop.log_density + 0.5 * prop.p.squaredNorm()) - h0;
      accept_prob = std::isfinite(delta_h) ? std::min(1.0, std::exp(-delta_h)) : 0.0;
    }
    const bool accept = unif(rng) < accept_prob;
    if (accept) cur = std::move(prop);

    if (it < cfg.burn_in) {
      step = adapter.update(accept_prob);
      if (it + 1 == cfg.burn_in) out.step = step = adapter.final_step();
      continue;
    }
    ++out.proposals;
    out.accepted += accept;
    if (in_support) {
      out.abs_delta_h += std::abs(delta_h);
      ++out.energy_count;
    } else {
      ++out.left_support;
    }
    if ((it - cfg.burn_in) % cfg.thin == cfg.thin - 1) out.samples.col(kept++) = cur.x;
  }
  return out;
}

// Chain starts: uniform candidates resampled with weights proportional to the target.
Eigen::MatrixXd chain_starts(const LogDensity& log_density, const Box& support, const HmcConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, "hmc-init"));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = support.dim();
  Eigen::MatrixXd cand(d, cfg.init_candidates);
  std::vector<double> lp(static_cast<std::size_t>(cfg.init_candidates));
  double best = kLogZero;
  for (int i = 0; i < cfg.init_candidates; ++i) {
    for (int k = 0; k < d; ++k) cand(k, i) = support.lo[k] + u(rng) * (support.hi[k] - support.lo[k]);
    lp[static_cast<std::size_t>(i)] = log_density(cand.col(i), nullptr);
    best = std::max(best, lp[static_cast<std::size_t>(i)]);
  }
  if (!std::isfinite(best)) throw DiagnosticsError("hmc: target density vanishes at every initial candidate");
  std::vector<double> w(lp.size());
  std::transform(lp.begin(), lp.end(), w.begin(), [best](double v) { return std::exp(v - best); });
  std::discrete_distribution<int> pick(w.begin(), w.end());
  Eigen::MatrixXd starts(d, cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c) starts.col(c) = cand.col(pick(rng));
  return starts;
}

}  // namespace

HmcResult hmc_sample(const LogDensity& log_density, const Box& support, const HmcConfig& cfg, Eigen::Index n) {
  validate(cfg);
  if (n < 1) throw ConfigError("hmc: number of samples must be positive");
  const Eigen::MatrixXd starts = chain_starts(log_density, support, cfg);
  const Eigen::Index per_chain = (n + cfg.n_chains - 1) / cfg.n_chains;

  std::vector<ChainOutput> chains(static_cast<std::size_t>(cfg.n_chains));
  auto work = [&](int first, int stride) {
    for (int c = first; c < cfg.n_chains; c += stride) {
      chains[static_cast<std::size_t>(c)] =
          run_chain(log_density, starts.col(c), cfg, per_chain, derive_seed(cfg.seed, "hmc-chain", c));
    }
  };
  const int workers = std::min(cfg.threads, cfg.n_chains);
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, workers);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  HmcResult res;
  auto& diag = res.diagnostics;
  diag.step_sizes.resize(cfg.n_chains);
  Eigen::MatrixXd all(support.dim(), per_chain * cfg.n_chains);
  std::int64_t accepted = 0, energy_count = 0;
  double abs_dh = 0.0;
  for (int c = 0; c < cfg.n_chains; ++c) {
    const auto& ch = chains[static_cast<std::size_t>(c)];
    all.middleCols(c * per_chain, per_chain) = ch.samples;
    accepted += ch.accepted;
    diag.proposals += ch.proposals;
    diag.left_support += ch.left_support;
    energy_count += ch.energy_count;
    abs_dh += ch.abs_delta_h;
    diag.step_sizes[c] = ch.step;
  }
  diag.accept_rate = diag.proposals ? static_cast<double>(accepted) / static_cast<double>(diag.proposals) : 0.0;
  diag.mean_abs_delta_h = energy_count ? abs_dh / static_cast<double>(energy_count) : 0.0;
  if (diag.accept_rate < cfg.min_accept) {
    throw DiagnosticsError("hmc: acceptance rate " + format_double(diag.accept_rate) + " below " +
                           format_double(cfg.min_accept) + "; lower step_size or raise epsilon_floor");
  }

  // Shuffle, then keep the first n states inside the support.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(all.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng shuffle_rng(derive_seed(cfg.seed, "hmc-shuffle"));
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  res.samples.resize(support.dim(), n);
  Eigen::Index kept = 0;
  for (Eigen::Index idx : order) {
    if (kept == n) break;
    if (!support.contains(all.col(idx))) continue;
    res.samples.col(kept++) = all.col(idx);
  }
  if (kept < n) throw DiagnosticsError("hmc: too few in-domain samples after filtering");
  return res;
}

double log_density_ic(const PdeProblem& problem, const Eigen::VectorXd& x, double eps, Eigen::VectorXd* grad) {
  if (x.size() != problem.dim()) throw ConfigError("log_density_ic: point has the wrong dimension");
  if (!problem.domain().contains(x)) return kLogZero;
  const Monitor m = problem.seed_monitor(x);
  const double v = m.value + eps;
  if (grad) *grad = m.grad / v;
  return std::log(v);
}

PointSet hmc_sample(const PdeProblem& problem, const HmcConfig& cfg, Eigen::Index n, HmcDiagnostics* diagnostics) {
  if (!(cfg.epsilon_floor > 0)) throw ConfigError("hmc: epsilon_floor must be positive");
  const double eps = cfg.epsilon_floor;
  LogDensity target = [&problem, eps](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    return log_density_ic(problem, x, eps, grad);
  };
  HmcResult r = hmc_sample(target, problem.domain(), cfg, n);
  if (diagnostics) *diagnostics = r.diagnostics;
  PointSet out;
  out.kind = PointKind::adaptive;
  out.points.resize(problem.dim() + 1, n);
  out.points.topRows(problem.dim()) = r.samples;
  out.points.bottomRows(1).setConstant(problem.t0());
  return out;
}

SeedSets initial_seed_sets(const PdeProblem& problem, const HmcConfig& cfg, Eigen::Index n_initial,
                           Eigen::Index n_adaptive, double uniform_fraction) {
  if (n_initial < 0 || n_adaptive < 0 || n_initial + n_adaptive < 1) throw ConfigError("initial_seed_sets: invalid set sizes");
  if (!(uniform_fraction >= 0 && uniform_fraction <= 1)) {
    throw ConfigError("initial_seed_sets: uniform_fraction must lie in [0,1]");
  }
  const auto n_uniform = static_cast<Eigen::Index>(std::lround(uniform_fraction * static_cast<double>(n_initial)));
  const Eigen::Index n_hmc_initial = n_initial - n_uniform;
  SeedSets out;
  PointSet draws;
  draws.points.resize(problem.dim() + 1, 0);
  if (n_hmc_initial + n_adaptive > 0) draws = hmc_sample(problem, cfg, n_hmc_initial + n_adaptive, &out.diagnostics);
  Rng rng(derive_seed(cfg.seed, "ic-uniform"));
  PointSet uniform = uniform_initial(problem, n_uniform, rng);
  PointSet hmc_part = slice_columns(draws, 0, n_hmc_initial);
  hmc_part.kind = PointKind::initial;
  const PointSet parts[] = {uniform, hmc_part};
  out.initial = concat(parts);
  out.adaptive = slice_columns(draws, n_hmc_initial, n_adaptive);
  return out;
}

}  // namespace pmsm
