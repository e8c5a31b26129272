#include "ltlshape/config.hpp"

#include "ltlshape/dfa.hpp"
#include "ltlshape/formula.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ltlshape {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void allow_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> keys) {
  if (!j.is_object())
    throw ConfigError(std::string(section) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw ConfigError("unknown key '" + it.key() + "' in " + std::string(section));
}

template <class T> T get(const json& j, std::string_view key, T fallback) {
  auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null())
    return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p))
    throw ConfigError(std::string(what) + " '" + p.string() + "' does not exist");
}

} // namespace

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : raw.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
  allow_keys(j, "config", {"name", "task", "env", "reward", "schedule", "learner", "oracle", "output", "sweep"});
  ExperimentConfig c;
  c.base_dir = base_dir;
  c.raw = j;
  c.raw.erase("sweep");
  c.name = get<std::string>(j, "name", "experiment");
  c.output = get<std::string>(j, "output", "out/" + c.name);
  if (j.contains("sweep")) {
    c.sweep = j["sweep"];
    if (!c.sweep.is_object())
      throw ConfigError("sweep must map keys to value lists");
    for (auto it = c.sweep.begin(); it != c.sweep.end(); ++it)
      if (!it->is_array() || it->empty())
        throw ConfigError("sweep key '" + it.key() + "' needs a non-empty list");
  }

  if (!j.contains("task"))
    throw ConfigError("config has no task");
  const json& t = j["task"];
  allow_keys(t, "task", {"formula", "ap", "dfa"});
  c.task.formula = get<std::string>(t, "formula", "");
  c.task.ap = get<std::vector<std::string>>(t, "ap", {});
  if (t.contains("dfa")) {
    c.task.dfa = resolve(base_dir, t["dfa"].get<std::string>());
    require_file(c.task.dfa, "automaton file");
  } else if (c.task.formula.empty() || c.task.ap.empty()) {
    throw ConfigError("task needs either 'dfa' or both 'formula' and 'ap'");
  }

  const json e = j.value("env", json::object());
  allow_keys(e, "env", {"name", "variant", "noise", "horizon", "map", "fifth_pickup", "simulator_only"});
  c.env.name = get<std::string>(e, "name", "flag_grid");
  if (c.env.name != "flag_grid" && c.env.name != "office_world" && c.env.name != "taxi_world")
    throw ConfigError("unknown environment '" + c.env.name + "'");
  auto variant = parse_variant(get<std::string>(e, "variant", "deterministic"));
  if (!variant)
    throw ConfigError("unknown variant '" + get<std::string>(e, "variant", "") + "'");
  c.env.variant = *variant;
  c.env.noise = get<double>(e, "noise", 0.1);
  if (!(c.env.noise >= 0.0 && c.env.noise < 1.0))
    throw ConfigError("noise must lie in [0, 1)");
  if (e.contains("horizon"))
    c.env.horizon = get<std::size_t>(e, "horizon", 0);
  if (c.env.name == "flag_grid") {
    if (!e.contains("map"))
      throw ConfigError("flag_grid needs a map file");
    c.env.map = resolve(base_dir, e["map"].get<std::string>());
    require_file(c.env.map, "map file");
  }
  if (e.contains("fifth_pickup")) {
    auto rc = get<std::vector<int>>(e, "fifth_pickup", {});
    if (rc.size() != 2)
      throw ConfigError("fifth_pickup must be [row, col]");
    c.env.fifth_pickup = Cell{rc[0], rc[1]};
  }
  c.env.simulator_only = get<bool>(e, "simulator_only", false);

  const json r = j.value("reward", json::object());
  allow_keys(r, "reward", {"kind", "eta0", "theta", "auto_theta"});
  auto kind = parse_reward_kind(get<std::string>(r, "kind", "adaptive_hybrid"));
  if (!kind)
    throw ConfigError("unknown reward kind '" + get<std::string>(r, "kind", "") + "'");
  c.reward.kind = *kind;
  c.reward.eta0 = get<double>(r, "eta0", 0.1);
  c.reward.theta = get<double>(r, "theta", 100.0);
  c.reward.auto_theta = get<bool>(r, "auto_theta", false);
  if (!(c.reward.eta0 >= 0.0 && c.reward.eta0 <= 1.0))
    throw ConfigError("eta0 must lie in [0, 1]");
  if (!c.reward.auto_theta && !(c.reward.theta > 1.0))
    throw ConfigError("theta must be greater than 1");

  const json s = j.value("schedule", json::object());
  allow_keys(s, "schedule", {"interval", "auto_interval", "lambda", "eval_rollouts"});
  if (s.contains("interval"))
    c.schedule.interval = get<std::size_t>(s, "interval", 1);
  c.schedule.auto_interval = get<bool>(s, "auto_interval", !s.contains("interval"));
  if (c.schedule.auto_interval)
    c.schedule.interval.reset();
  else if (c.schedule.interval && *c.schedule.interval == 0)
    throw ConfigError("schedule interval must be at least 1");
  c.schedule.lambda = get<double>(s, "lambda", 0.95);
  c.schedule.eval_rollouts = get<std::size_t>(s, "eval_rollouts", 20);
  if (!(c.schedule.lambda >= 0.0 && c.schedule.lambda <= 1.0))
    throw ConfigError("lambda must lie in [0, 1]");
  if (c.schedule.eval_rollouts == 0)
    throw ConfigError("eval_rollouts must be at least 1");

  const json l = j.value("learner", json::object());
  allow_keys(l, "learner", {"alpha", "epsilon", "epsilon_final", "gamma", "budget", "trials", "seed",
                            "reset_on_round", "q_init", "eval_every", "eval_episodes"});
  c.learner.q.alpha = get<double>(l, "alpha", 0.1);
  c.learner.q.epsilon = get<double>(l, "epsilon", 0.1);
  if (l.contains("epsilon_final"))
    c.learner.q.epsilon_final = get<double>(l, "epsilon_final", 0.0);
  c.learner.q.gamma = get<double>(l, "gamma", 0.9);
  c.learner.q.reset_on_round = get<bool>(l, "reset_on_round", false);
  c.learner.q.q_init = get<double>(l, "q_init", 0.0);
  c.learner.budget = get<std::size_t>(l, "budget", 10'000);
  c.learner.trials = get<std::size_t>(l, "trials", 10);
  c.learner.seed = get<std::uint64_t>(l, "seed", 1);
  c.learner.eval.every = get<std::size_t>(l, "eval_every", 100);
  c.learner.eval.episodes = get<std::size_t>(l, "eval_episodes", 5);
  if (!(c.learner.q.gamma > 0.0 && c.learner.q.gamma <= 1.0))
    throw ConfigError("gamma must lie in (0, 1]");
  if (c.learner.trials == 0)
    throw ConfigError("trials must be at least 1");
  if (!(c.learner.q.alpha > 0.0 && c.learner.q.alpha <= 1.0))
    throw ConfigError("alpha must lie in (0, 1]");
  if (!(c.learner.q.epsilon >= 0.0 && c.learner.q.epsilon <= 1.0))
    throw ConfigError("epsilon must lie in [0, 1]");

  const json o = j.value("oracle", json::object());
  allow_keys(o, "oracle", {"checks", "kinds", "round_cap", "expected", "tolerance"});
  c.oracle.checks = get<std::vector<std::string>>(o, "checks", {"best_progression", "theorem"});
  for (const auto& k : get<std::vector<std::string>>(o, "kinds", {"adaptive_progression", "adaptive_hybrid"})) {
    auto rk = parse_reward_kind(k);
    if (!rk || !is_adaptive(*rk))
      throw ConfigError("oracle kinds must be adaptive rewards, got '" + k + "'");
    c.oracle.kinds.push_back(*rk);
  }
  if (o.contains("round_cap"))
    c.oracle.round_cap = get<std::size_t>(o, "round_cap", 0);
  c.oracle.expected = o.value("expected", json::object());
  c.oracle.tolerance = get<double>(o, "tolerance", 0.01);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

std::vector<std::pair<std::string, ExperimentConfig>> expand_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep.is_null() || cfg.sweep.empty())
    return {{cfg.name, cfg}};
  std::vector<std::pair<std::string, json>> points{{"", cfg.raw}};
  for (auto it = cfg.sweep.begin(); it != cfg.sweep.end(); ++it) {
    std::string pointer = "/" + it.key();
    std::replace(pointer.begin(), pointer.end(), '.', '/');
    std::vector<std::pair<std::string, json>> grown;
    for (const auto& [label, base] : points)
      for (const auto& v : *it) {
        json j = base;
        j[json::json_pointer(pointer)] = v;
        std::string tag = it.key().substr(it.key().rfind('.') + 1) + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
        grown.emplace_back(label.empty() ? tag : label + "_" + tag, std::move(j));
      }
    points = std::move(grown);
  }
  std::vector<std::pair<std::string, ExperimentConfig>> out;
  for (auto& [label, j] : points) {
    j["name"] = cfg.name + "_" + label;
    ExperimentConfig c = parse_config(j, cfg.base_dir);
    c.output = cfg.output / label;
    out.emplace_back(label, std::move(c));
  }
  return out;
}

std::shared_ptr<const TaskModel> build_task(const ExperimentConfig& cfg) {
  if (!cfg.task.dfa.empty()) {
    std::ifstream in(cfg.task.dfa);
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_shared<const TaskModel>(dfa_from_json(ss.str()));
  }
  PropositionSet ap(cfg.task.ap);
  return std::make_shared<const TaskModel>(minimize(compile(parse(cfg.task.formula, ap), ap)));
}

std::unique_ptr<LabeledEnv> build_env(const ExperimentConfig& cfg) {
  const auto& e = cfg.env;
  std::unique_ptr<LabeledEnv> env;
  if (e.name == "flag_grid") {
    double noise = e.variant == Variant::Noisy ? e.noise : 0.0;
    env = std::make_unique<FlagGrid>(GridMap::load(e.map.string()), noise, e.horizon.value_or(25),
                                     e.map.stem().string());
  } else if (e.name == "office_world") {
    env = office_world(e.variant, e.noise, e.horizon.value_or(200));
  } else {
    env = std::make_unique<TaxiWorld>(e.variant, e.noise, e.horizon.value_or(200), e.fifth_pickup.value_or(Cell{3, 3}));
  }
  if (e.simulator_only)
    env = simulator_only(std::move(env));
  return env;
}

} // namespace ltlshape
