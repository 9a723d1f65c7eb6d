#include "pmsm/harness/run.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "pmsm/autodiff/checkpoint.hpp"
#include "pmsm/error.hpp"
#include "pmsm/format.hpp"

#ifndef PMSM_VERSION
#define PMSM_VERSION "unknown"
#endif
#ifndef PMSM_GIT_REV
#define PMSM_GIT_REV "unknown"
#endif

namespace pmsm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("errors.csv: bad number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("errors.csv: bad integer '" + s + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_outputs(const RunOutcome& o) {
  const auto& dir = o.config.out_dir;
  open_out(dir / "manifest.json") << run_manifest(o.config).dump(2) << "\n";
  {
    auto out = open_out(dir / "errors.csv");
    write_errors_csv(out, std::span<const ComparisonRow>(&o.row, 1));
  }
  if (!o.errors.times.empty()) {
    auto out = open_out(dir / "per_slice_errors.csv");
    write_per_slice_csv(out, o.errors);
  }
  if (!o.front.empty()) {
    auto out = open_out(dir / "front_concentration.csv");
    out << "t,band,fraction\n";
    for (std::size_t s = 0; s < o.front.size(); ++s) {
      out << format_double(o.result.trajectory.time(static_cast<Eigen::Index>(s))) << ','
          << format_double(*o.config.band) << ',' << format_double(o.front[s]) << "\n";
    }
  }
  {
    auto out = open_out(dir / "loss_history.csv");
    out << "step,loss\n";
    for (const auto& l : o.result.metrics.loss_history) out << l.step << ',' << format_double(l.loss) << "\n";
  }
  {
    auto out = open_out(dir / "rounds.csv");
    out << "round,t_new,train_slices,train_interior_points,solution_loss,velocity_loss,velocity_rollback,"
           "window_reset,ic_anchor\n";
    for (const auto& r : o.result.metrics.rounds) {
      out << r.round << ',' << format_double(r.t_new) << ',' << r.train_slices << ',' << r.train_interior_points
          << ',' << format_double(r.solution_loss) << ',' << format_double(r.velocity_loss) << ','
          << r.velocity_rollback << ',' << r.window_reset << ',' << format_double(r.ic_anchor) << "\n";
    }
  }
  if (o.result.trajectory.num_slices() > 0) {
    auto out = open_out(dir / "trajectory.csv");
    write_trajectory_csv(out, o.result.trajectory);
  }
  save_checkpoint(dir / "solution.ckpt", o.result.solution);
  if (o.result.velocity) save_checkpoint(dir / "potential.ckpt", o.result.velocity->potential());
}

}  // namespace

void write_errors_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << kErrorsCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.problem << ',' << r.method << ',' << format_double(r.rel_l2) << ',' << format_double(r.l_inf) << ','
        << r.epochs << ',' << r.points_per_slice << ',' << r.peak_train_points << ',' << format_double(r.wall_s)
        << "\n";
  }
}

std::vector<ComparisonRow> read_errors_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kErrorsCsvHeader) throw ConfigError("errors.csv: unexpected header");
  std::vector<ComparisonRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) throw ConfigError("errors.csv: expected 8 columns in '" + line + "'");
    ComparisonRow r;
    r.problem = cells[0];
    r.method = cells[1];
    r.rel_l2 = parse_double(cells[2]);
    r.l_inf = parse_double(cells[3]);
    r.epochs = parse_int(cells[4]);
    r.points_per_slice = parse_int(cells[5]);
    r.peak_train_points = parse_int(cells[6]);
    r.wall_s = parse_double(cells[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_per_slice_csv(std::ostream& out, const ErrorReport& report) {
  out << "t,rel_l2,l_inf,absolute\n";
  for (std::size_t s = 0; s < report.times.size(); ++s) {
    out << format_double(report.times[s]) << ',' << format_double(report.slice_rel_l2[s]) << ','
        << format_double(report.slice_l_inf[s]) << ',' << int(report.slice_absolute[s]) << "\n";
  }
}

nlohmann::json run_manifest(const RunConfig& c) {
  return {{"config", config_to_json(c)},
          {"seed", c.seed},
          {"version", PMSM_VERSION},
          {"git_revision", PMSM_GIT_REV},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}};
}

RunOutcome solve(const RunConfig& config, const SolveOptions& options) {
  validate(config);
  const auto problem = make_problem(config.problem, config.overrides);
  if (options.write_outputs) std::filesystem::create_directories(config.out_dir);

  RunHooks hooks;
  if (options.write_outputs && config.write_samples) {
    hooks.on_round = [&config](int round, const DenseNet&, const Trajectory& traj) {
      if (traj.num_slices() == 0) return;
      auto out = open_out(config.out_dir / ("samples_" + std::to_string(round) + ".csv"));
      write_trajectory_csv(out, traj);
    };
  }

  RunOutcome o;
  o.config = config;
  if (!o.config.band) o.config.band = default_front_band(*problem);
  o.result = run_method(config.method, *problem, config.schedule, config.hmc, config.seed, hooks);
  if (options.evaluate) {
    const EvalGrid grid = eval_grid(*problem, config.eval, derive_seed(config.seed, "eval-grid"));
    o.errors = compute_errors(o.result.solution, *problem, grid);
  }
  if (o.result.trajectory.num_slices() > 0) o.front = front_concentration(o.result.trajectory, *problem, *o.config.band);

  o.row.problem = std::string(to_string(config.problem));
  o.row.method = std::string(to_string(config.method));
  o.row.rel_l2 = o.errors.rel_l2;
  o.row.l_inf = o.errors.l_inf;
  o.row.epochs = o.result.metrics.solution_steps;
  o.row.points_per_slice = interior_points_per_slice(config.method, config.schedule);
  o.row.peak_train_points = o.result.metrics.peak_train_points;
  o.row.wall_s = o.result.metrics.wall_s;

  if (options.write_outputs) write_outputs(o);
  return o;
}

std::vector<RunConfig> budget_matched_configs(const RunConfig& base, std::span<const Method> methods) {
  const auto problem = make_problem(base.problem, base.overrides);
  const int k_ext = extension_rounds(*problem, base.schedule);
  const auto budgets = match_budgets(base.schedule, k_ext, base.schedule.window);
  std::vector<RunConfig> out;
  for (Method m : methods) {
    const auto it = std::find_if(budgets.begin(), budgets.end(), [m](const MethodBudget& b) { return b.method == m; });
    if (it == budgets.end()) throw ConfigError("no budget for method " + std::string(to_string(m)));
    RunConfig c = base;
    c.method = m;
    c.schedule = it->schedule;
    c.out_dir = base.out_dir / std::string(to_string(m));
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<ComparisonRow> compare(std::span<const RunConfig> configs, const SolveOptions& options) {
  struct Budget {
    std::int64_t steps;
    Eigen::Index points;
    std::string method;
  };
  std::map<ProblemId, Budget> first;
  for (const auto& c : configs) {
    validate(c);
    const auto problem = make_problem(c.problem, c.overrides);
    const int k_ext = extension_rounds(*problem, c.schedule);
    const Budget b{planned_solution_steps(c.method, c.schedule, k_ext), interior_points_per_slice(c.method, c.schedule),
                   std::string(to_string(c.method))};
    const auto [it, inserted] = first.emplace(c.problem, b);
    if (!inserted && (it->second.steps != b.steps || it->second.points != b.points)) {
      throw ConfigError("compare refused: " + std::string(to_string(c.problem)) + " " + b.method + " plans " +
                        std::to_string(b.steps) + " steps and " + std::to_string(b.points) + " points per slice, " +
                        it->second.method + " plans " + std::to_string(it->second.steps) + " and " +
                        std::to_string(it->second.points));
    }
  }
  std::vector<std::pair<std::pair<ProblemId, Method>, ComparisonRow>> rows;
  for (const auto& c : configs) rows.push_back({{c.problem, c.method}, solve(c, options).row});
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    const auto ka = std::make_pair(to_string(a.first.first), a.first.second);
    const auto kb = std::make_pair(to_string(b.first.first), b.first.second);
    return ka < kb;
  });
  std::vector<ComparisonRow> out;
  for (auto& r : rows) out.push_back(std::move(r.second));
  return out;
}

}  // namespace pmsm
