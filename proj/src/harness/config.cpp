#include "pmsm/harness/config.hpp"

#include <fstream>
#include <set>

#include "pmsm/error.hpp"

namespace pmsm {

namespace {

using nlohmann::json;

// Reads typed fields out of one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config: '" + where() + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: '" + name(key) + "' has the wrong type");
    }
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer()) throw ConfigError("config: '" + name(key) + "' must be an integer");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

  const json* object(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("config: unknown key '" + name(key.c_str()) + "'");
    }
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_schedule(const json& j, TrainSchedule& s) {
  Fields f(j, "schedule");
  f.get("dt", s.dt);
  f.get("nt_init", s.nt_init);
  f.get("epochs_pretrain", s.epochs_pretrain);
  f.get("epochs_per_round", s.epochs_per_round);
  f.get("epochs_velocity", s.epochs_velocity);
  f.get("epochs_final", s.epochs_final);
  f.get("n_adaptive", s.n_adaptive);
  f.get("n_uniform", s.n_uniform);
  f.get("n_initial", s.n_initial);
  f.get("n_boundary", s.n_boundary);
  f.get("lambda_0", s.lambda_0);
  f.get("lambda_b", s.lambda_b);
  f.get("lambda_n", s.lambda_n);
  f.get("learning_rate", s.learning_rate);
  f.get("velocity_learning_rate", s.velocity_learning_rate);
  f.get("msm_iterations", s.msm_iterations);
  f.get("window", s.window);
  f.get("minibatch", s.minibatch);
  f.get("train_velocity", s.train_velocity);
  f.get("log_every", s.log_every);
  f.get("threads", s.threads);
  f.finish();
}

json schedule_json(const TrainSchedule& s) {
  return {{"dt", s.dt},
          {"nt_init", s.nt_init},
          {"epochs_pretrain", s.epochs_pretrain},
          {"epochs_per_round", s.epochs_per_round},
          {"epochs_velocity", s.epochs_velocity},
          {"epochs_final", s.epochs_final},
          {"n_adaptive", s.n_adaptive},
          {"n_uniform", s.n_uniform},
          {"n_initial", s.n_initial},
          {"n_boundary", s.n_boundary},
          {"lambda_0", s.lambda_0},
          {"lambda_b", s.lambda_b},
          {"lambda_n", s.lambda_n},
          {"learning_rate", s.learning_rate},
          {"velocity_learning_rate", s.velocity_learning_rate},
          {"msm_iterations", s.msm_iterations},
          {"window", s.window},
          {"minibatch", s.minibatch},
          {"train_velocity", s.train_velocity},
          {"log_every", s.log_every},
          {"threads", s.threads}};
}

void read_hmc(const json& j, HmcConfig& h) {
  Fields f(j, "hmc");
  f.get("n_chains", h.n_chains);
  f.get("burn_in", h.burn_in);
  f.get("leapfrog_steps", h.leapfrog_steps);
  f.get("random_path_length", h.random_path_length);
  f.get("step_size", h.step_size);
  f.get("target_accept", h.target_accept);
  f.get("epsilon_floor", h.epsilon_floor);
  f.get("thin", h.thin);
  f.get("init_candidates", h.init_candidates);
  f.get("min_accept", h.min_accept);
  f.get("threads", h.threads);
  f.finish();
}

json hmc_json(const HmcConfig& h) {
  return {{"n_chains", h.n_chains},
          {"burn_in", h.burn_in},
          {"leapfrog_steps", h.leapfrog_steps},
          {"random_path_length", h.random_path_length},
          {"step_size", h.step_size},
          {"target_accept", h.target_accept},
          {"epsilon_floor", h.epsilon_floor},
          {"thin", h.thin},
          {"init_candidates", h.init_candidates},
          {"min_accept", h.min_accept},
          {"threads", h.threads}};
}

void read_eval(const json& j, EvalGridSpec& e) {
  Fields f(j, "eval");
  f.get("per_axis", e.per_axis);
  f.get("random_points", e.random_points);
  f.get("plot_interval", e.plot_interval);
  f.get("max_points", e.max_points);
  f.finish();
}

void read_problem(const json& j, RunConfig& c) {
  if (j.is_string()) {
    c.problem = problem_id_from_string(j.get<std::string>());
    return;
  }
  Fields f(j, "problem");
  std::string id(to_string(c.problem));
  f.get("id", id);
  c.problem = problem_id_from_string(id);
  f.get("overrides", c.overrides);
  f.finish();
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Fields f(j, "");
  if (const json* p = f.object("problem")) {
    try {
      read_problem(*p, c);
    } catch (const json::exception&) {
      throw ConfigError("config: 'problem' has the wrong type");
    }
  }
  c.schedule = published_schedule(c.problem);
  std::string method(to_string(c.method));
  f.get("method", method);
  c.method = method_from_string(method);
  f.get("seed", c.seed);
  std::string out = c.out_dir.string();
  f.get("out", out);
  c.out_dir = out;
  f.get("band", c.band);
  f.get("write_samples", c.write_samples);
  if (const json* s = f.object("schedule")) read_schedule(*s, c.schedule);
  if (const json* h = f.object("hmc")) read_hmc(*h, c.hmc);
  if (const json* e = f.object("eval")) read_eval(*e, c.eval);
  f.finish();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j = {{"problem", {{"id", std::string(to_string(c.problem))}, {"overrides", c.overrides}}},
            {"method", std::string(to_string(c.method))},
            {"seed", c.seed},
            {"out", c.out_dir.string()},
            {"write_samples", c.write_samples},
            {"schedule", schedule_json(c.schedule)},
            {"hmc", hmc_json(c.hmc)},
            {"eval",
             {{"per_axis", c.eval.per_axis},
              {"random_points", c.eval.random_points},
              {"plot_interval", c.eval.plot_interval},
              {"max_points", c.eval.max_points}}}};
  if (c.band) j["band"] = *c.band;
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("override '" + assignment + "' descends into a non-object");
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value = json::parse(text, nullptr, false);
  *node = value.is_discarded() ? json(text) : std::move(value);
}

RunConfig load_config(const json& base, const std::vector<std::string>& overrides) {
  json j = base.is_null() ? json::object() : base;
  if (j.is_object() && j.contains("problem") && j["problem"].is_string()) {
    j["problem"] = json{{"id", j["problem"]}};
  }
  for (const auto& o : overrides) apply_override(j, o);
  RunConfig c = config_from_json(j);
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + path.string() + "' is not valid JSON");
  return load_config(j, overrides);
}

void validate(const RunConfig& c) {
  validate(c.schedule);
  validate(c.hmc);
  const auto problem = make_problem(c.problem, c.overrides);
  extension_rounds(*problem, c.schedule);
  if (c.method == Method::wr_pmsm && c.schedule.window == 0) {
    throw ConfigError("wr_pmsm needs schedule.window > 0");
  }
  if (c.band && !(*c.band >= 0.0)) throw ConfigError("band must be non-negative");
  if (c.eval.per_axis < 0 || c.eval.random_points < 1 || !(c.eval.plot_interval > 0.0) || c.eval.max_points < 1) {
    throw ConfigError("invalid eval grid settings");
  }
}

}  // namespace pmsm
