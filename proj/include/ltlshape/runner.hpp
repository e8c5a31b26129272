#pragma once

#include "ltlshape/config.hpp"
#include "ltlshape/harness.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ltlshape {

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  TrainingLog log;
  std::size_t final_round = 0;
};

struct Stat {
  double mean = 0.0;
  double ci95 = 0.0; // half-width, Student t over trials
  std::size_t n = 0;
};
Stat mean_ci(const std::vector<double>& xs);

/// Worker count from LTLSHAPE_WORKERS, else the hardware concurrency.
std::size_t worker_count();

/// Runs every trial of the experiment, at most `workers` at a time. Trial i
/// uses the i-th split of the master seed, so results do not depend on the
/// worker count.
std::vector<TrialOutcome> run_trials(const ExperimentConfig& cfg, std::size_t workers);

/// CSV with a provenance comment line, one row per evaluation record.
std::string metrics_csv(const ExperimentConfig& cfg, const std::vector<TrialOutcome>& trials);
nlohmann::ordered_json run_summary(const ExperimentConfig& cfg, const std::vector<TrialOutcome>& trials);
nlohmann::ordered_json round_audit(const std::vector<TrialOutcome>& trials);

/// Writes metrics.csv, rounds.json, summary.json and per-trial CSVs under
/// cfg.output; returns the summary.
nlohmann::ordered_json write_run(const ExperimentConfig& cfg, const std::vector<TrialOutcome>& trials);

/// Distance table and partition of a task, one line per state or set.
std::string task_report(const TaskModel& task);

/// Exact checks (best_progression, theorem, examples) on the configured
/// environment. Throws NotEnumerable for simulator-only environments.
nlohmann::ordered_json oracle_report(const ExperimentConfig& cfg);

} // namespace ltlshape
