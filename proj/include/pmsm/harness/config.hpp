#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pmsm/problems/problem.hpp"
#include "pmsm/sampling/hmc.hpp"
#include "pmsm/trainers/schedule.hpp"

namespace pmsm {

struct EvalGridSpec {
  /// Tensor-grid points per axis for d <= 3; 0 picks 256 (d=1), 64 (d=2) or 32 (d=3).
  int per_axis = 0;
  /// Seeded uniform points per slice for d > 3.
  Eigen::Index random_points = 100000;
  double plot_interval = 0.1;
  /// Refuse grids with more points than this in total.
  Eigen::Index max_points = 4000000;
};

struct RunConfig {
  ProblemId problem = ProblemId::burgers2d;
  ProblemOverrides overrides;
  Method method = Method::pmsm;
  TrainSchedule schedule;
  HmcConfig hmc;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "runs/default";
  EvalGridSpec eval;
  /// Half-width of the front band for front_concentration. Unset means
  /// default_front_band(problem); solve() records the value it used.
  std::optional<double> band;
  /// Write samples_<round>.csv after every round.
  bool write_samples = true;
};

/// Builds a config from a JSON object. Missing keys keep their defaults; the
/// schedule starts from published_schedule(problem). Unknown keys, wrong types
/// and invalid values are ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

/// Sets `key=value` on a JSON object, creating intermediate objects for dotted
/// keys. The value is parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Reads a JSON config file, applies the overrides in order and validates.
/// A missing or unparsable file is a ConfigError.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
RunConfig load_config(const nlohmann::json& base, const std::vector<std::string>& overrides = {});

/// Checks the schedule, the sampler and the problem parameters together.
void validate(const RunConfig& c);

}  // namespace pmsm
