#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmsm/harness/config.hpp"
#include "pmsm/harness/evaluation.hpp"
#include "pmsm/trainers/trainers.hpp"

namespace pmsm {

inline constexpr const char* kErrorsCsvHeader =
    "problem,method,rel_l2,l_inf,epochs,points_per_slice,peak_train_points,wall_s";

/// One row of errors.csv and of the comparison table.
struct ComparisonRow {
  std::string problem;
  std::string method;
  double rel_l2 = 0.0;
  double l_inf = 0.0;
  std::int64_t epochs = 0;
  Eigen::Index points_per_slice = 0;
  Eigen::Index peak_train_points = 0;
  double wall_s = 0.0;

  bool operator==(const ComparisonRow&) const = default;
};

void write_errors_csv(std::ostream& out, std::span<const ComparisonRow> rows);
/// Parses what write_errors_csv emits; ConfigError on a bad header or row.
std::vector<ComparisonRow> read_errors_csv(std::istream& in);

/// Header `t,rel_l2,l_inf,absolute`.
void write_per_slice_csv(std::ostream& out, const ErrorReport& report);

/// Config, seed and build identification for a run directory.
nlohmann::json run_manifest(const RunConfig& c);

struct SolveOptions {
  /// Compute errors on the evaluation grid.
  bool evaluate = true;
  /// Write the run directory (manifest, CSVs, checkpoints) to config.out_dir.
  bool write_outputs = true;
};

struct RunOutcome {
  RunConfig config;
  TrainResult result;
  ErrorReport errors;
  ComparisonRow row;
  /// front_concentration(trajectory, problem, config.band); empty for the baseline.
  std::vector<double> front;
};

/// Validates, trains with config.method and evaluates. The run directory gets
/// manifest.json, errors.csv, per_slice_errors.csv, front_concentration.csv,
/// loss_history.csv, rounds.csv, samples_<round>.csv, trajectory.csv and
/// checkpoints of the trained networks.
RunOutcome solve(const RunConfig& config, const SolveOptions& options = {});

/// Per-method copies of `base` whose schedules come from match_budgets, each
/// writing to out_dir/<method>.
std::vector<RunConfig> budget_matched_configs(const RunConfig& base, std::span<const Method> methods);

/// Runs every config and returns rows sorted by (problem, method). Refused
/// with ConfigError when rows of one problem would differ in planned solution
/// steps or interior points per slice.
std::vector<ComparisonRow> compare(std::span<const RunConfig> configs, const SolveOptions& options = {});

}  // namespace pmsm
