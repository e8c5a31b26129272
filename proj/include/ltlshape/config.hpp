#pragma once

#include "ltlshape/env.hpp"
#include "ltlshape/harness.hpp"
#include "ltlshape/reward.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltlshape {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TaskConfig {
  std::string formula;
  std::vector<std::string> ap;
  std::filesystem::path dfa; // alternative to formula + ap
};

struct EnvConfig {
  std::string name = "flag_grid"; // flag_grid | office_world | taxi_world
  Variant variant = Variant::Deterministic;
  double noise = 0.1;
  std::optional<std::size_t> horizon;
  std::filesystem::path map;
  std::optional<Cell> fifth_pickup;
  bool simulator_only = false;
};

struct RewardConfig {
  RewardKind kind = RewardKind::AdaptiveHybrid;
  double eta0 = 0.1;
  double theta = 100.0;
  bool auto_theta = false;
};

struct ScheduleConfig {
  std::optional<std::size_t> interval;
  bool auto_interval = false;
  double lambda = 0.95;
  std::size_t eval_rollouts = 20;
};

struct LearnerConfig {
  QConfig q;
  std::size_t budget = 10'000;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  EvalConfig eval;
};

struct OracleConfig {
  std::vector<std::string> checks;
  std::vector<RewardKind> kinds;
  std::optional<std::size_t> round_cap;
  nlohmann::json expected; // per-check expectations
  double tolerance = 0.01;
};

/// One experiment, fully resolved. Input paths are resolved against the
/// directory of the config file.
struct ExperimentConfig {
  std::string name;
  TaskConfig task;
  EnvConfig env;
  RewardConfig reward;
  ScheduleConfig schedule;
  LearnerConfig learner;
  OracleConfig oracle;
  std::filesystem::path output = "out";
  nlohmann::json sweep; // {"reward.theta": [..], ...}
  nlohmann::json raw;   // config as read, without the sweep block
  std::filesystem::path base_dir;

  /// FNV-1a over the canonical serialization of `raw`.
  std::string hash() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Cartesian product of the sweep block, each applied to the raw config.
/// Returns the config itself when there is no sweep.
std::vector<std::pair<std::string, ExperimentConfig>> expand_sweep(const ExperimentConfig& cfg);

std::shared_ptr<const TaskModel> build_task(const ExperimentConfig& cfg);
std::unique_ptr<LabeledEnv> build_env(const ExperimentConfig& cfg);

inline constexpr std::string_view kVersion = "0.3.0";

} // namespace ltlshape
