#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pmsm/error.hpp"
#include "pmsm/harness/checks.hpp"
#include "pmsm/harness/config.hpp"
#include "pmsm/harness/run.hpp"

namespace {

using namespace pmsm;

// 0 ok, 1 a self-check failed, 2 usage or config, then one code per category.
int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::numeric: return 3;
    case ErrorCategory::domain: return 4;
    case ErrorCategory::diagnostics: return 5;
    case ErrorCategory::io: return 6;
  }
  return 1;
}

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method;
  std::string problem;
  std::vector<std::string> set;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--method", f.method, "pinn, msm, pmsm or wr_pmsm");
  cmd->add_option("--problem", f.problem, "burgers2d, parabolic2d, fokker_planck3d or burgers6d");
  cmd->add_option("--set,overrides", f.set, "Dotted overrides, e.g. schedule.epochs_final=100");
}

RunConfig resolve(const RunFlags& f) {
  std::vector<std::string> o = f.set;
  if (!f.problem.empty()) o.insert(o.begin(), "problem.id=\"" + f.problem + "\"");
  if (f.seed) o.push_back("seed=" + std::to_string(*f.seed));
  if (!f.out.empty()) o.push_back("out=\"" + f.out + "\"");
  if (!f.method.empty()) o.push_back("method=\"" + f.method + "\"");
  if (f.config.empty()) return load_config(nlohmann::json::object(), o);
  return load_config(std::filesystem::path(f.config), o);
}

void print_row(const ComparisonRow& r) {
  std::cout << r.problem << " " << r.method << " rel_l2=" << r.rel_l2 << " l_inf=" << r.l_inf
            << " epochs=" << r.epochs << " points_per_slice=" << r.points_per_slice
            << " peak_train_points=" << r.peak_train_points << " wall_s=" << r.wall_s << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-collocation PDE solvers with learned sample transport"};
  app.require_subcommand(1);

  RunFlags solve_flags, compare_flags, dump_flags;
  auto* solve_cmd = app.add_subcommand("solve", "Train and evaluate one configuration");
  add_run_flags(solve_cmd, solve_flags);

  auto* compare_cmd = app.add_subcommand("compare", "Run several methods under matched budgets");
  add_run_flags(compare_cmd, compare_flags);
  std::vector<std::string> methods{"pinn", "msm", "pmsm", "wr_pmsm"};
  compare_cmd->add_option("--methods", methods, "Methods to compare")->delimiter(',');

  auto* grad_cmd = app.add_subcommand("check-gradients", "Finite-difference checks of jets and loss gradients");
  std::uint64_t grad_seed = 0;
  int jet_cases = 1000, param_cases = 200;
  grad_cmd->add_option("--seed", grad_seed, "Seed");
  grad_cmd->add_option("--jet-cases", jet_cases, "Random (network, point) jet cases")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--param-cases", param_cases, "Parameter-gradient cases")->check(CLI::NonNegativeNumber);

  auto* hmc_cmd = app.add_subcommand("hmc-diag", "Sampler moment, front-mass and histogram checks");
  std::uint64_t hmc_seed = 0;
  hmc_cmd->add_option("--seed", hmc_seed, "Seed");

  auto* dump_cmd = app.add_subcommand("dump-samples", "Train and export the sample trajectory per round");
  add_run_flags(dump_cmd, dump_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*solve_cmd) {
      const RunOutcome o = solve(resolve(solve_flags));
      print_row(o.row);
      std::cout << "wrote " << o.config.out_dir.string() << "\n";
    } else if (*compare_cmd) {
      const RunConfig base = resolve(compare_flags);
      std::vector<Method> ms;
      for (const auto& m : methods) ms.push_back(method_from_string(m));
      const auto configs = budget_matched_configs(base, ms);
      const auto rows = compare(configs);
      std::filesystem::create_directories(base.out_dir);
      std::ofstream out(base.out_dir / "errors.csv");
      if (!out) throw IoError("cannot write " + (base.out_dir / "errors.csv").string());
      write_errors_csv(out, rows);
      write_errors_csv(std::cout, rows);
    } else if (*grad_cmd) {
      const GradientCheckReport r = check_gradients(grad_seed, jet_cases, param_cases);
      write_report(std::cout, r);
      return r.passed() ? 0 : 1;
    } else if (*hmc_cmd) {
      const HmcDiagReport r = hmc_diagnostics(hmc_seed);
      write_report(std::cout, r);
      return r.passed() ? 0 : 1;
    } else if (*dump_cmd) {
      RunConfig c = resolve(dump_flags);
      c.write_samples = true;
      const RunOutcome o = solve(c, SolveOptions{.evaluate = false, .write_outputs = true});
      std::cout << "wrote " << o.result.trajectory.num_slices() << " slices to " << c.out_dir.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.category()) << "]: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error[io]: " << e.what() << "\n";
    return exit_code(ErrorCategory::io);
  }
  return 0;
}
