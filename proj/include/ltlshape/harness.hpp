#pragma once

#include "ltlshape/env.hpp"
#include "ltlshape/reward.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ltlshape {

enum class Status { Running, Accepted, Trapped, Horizon, EnvDone };
std::string_view to_string(Status s);

struct ProductState {
  std::size_t env = 0;
  StateId q = 0;
  bool operator==(const ProductState&) const = default;
};

/// Status a product state would have at the given step count.
Status classify(const TaskModel& task, StateId q, bool env_done, std::size_t steps, std::size_t horizon);

/// The on-the-fly product of one environment with a task automaton.
/// Propositions are matched by name; task propositions the environment
/// never emits are always false.
class ProductSession {
public:
  ProductSession(LabeledEnv& env, std::shared_ptr<const TaskModel> task);

  struct Step {
    ProductState next;
    Letter label; // over the task's propositions
    double reward;
    Status status;
  };

  /// Starts an episode at <s0, delta(q0, L(s0))>.
  ProductState reset(std::uint64_t seed);
  /// Throws std::logic_error once the session has terminated.
  Step step(const RewardContext& ctx, std::size_t action);

  ProductState state() const { return state_; }
  Status status() const { return status_; }
  std::size_t steps() const { return steps_; }
  std::size_t horizon() const { return env_->horizon(); }
  const TaskModel& task() const { return *task_; }
  LabeledEnv& env() const { return *env_; }

private:
  LabeledEnv* env_;
  std::shared_ptr<const TaskModel> task_;
  LetterMap to_task_;
  ProductState state_;
  Status status_ = Status::Running;
  std::size_t steps_ = 0;
};

struct QConfig {
  double alpha = 0.1;
  double epsilon = 0.1;
  /// Linearly decayed to this value over the budget; defaults to no decay.
  std::optional<double> epsilon_final;
  double gamma = 0.9;
  bool reset_on_round = false;
  /// Value of entries never updated; positive values make exploration optimistic.
  double q_init = 0.0;
};

/// Tabular action values over product states; unseen entries hold the
/// table's initial value (0 by default).
class QTable {
public:
  explicit QTable(std::size_t actions, double init = 0.0) : actions_(actions), init_(init) {}

  std::size_t actions() const { return actions_; }
  double value(ProductState s, std::size_t a) const;
  double max_value(ProductState s) const;
  /// argmax with the lowest action index winning ties.
  std::size_t greedy(ProductState s) const;
  void update(ProductState s, std::size_t a, double target, double alpha);
  void clear() { table_.clear(); }
  void clear(double init) {
    table_.clear();
    init_ = init;
  }
  double init() const { return init_; }
  std::size_t size() const { return table_.size(); }

private:
  static std::uint64_t key(ProductState s) { return (std::uint64_t(s.env) << 20) ^ s.q; }
  std::size_t actions_;
  double init_;
  std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

struct AdaptiveSchedule {
  /// Episodes between success-rate checks; std::nullopt = budget / |partition|.
  std::optional<std::size_t> interval;
  double lambda = 0.95;
  std::size_t eval_rollouts = 20;
};

struct EvalConfig {
  std::size_t every = 100; // episodes between evaluations
  std::size_t episodes = 5;
};

struct EvalRecord {
  std::size_t step = 0;
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double norm_return = 0.0;
  std::size_t empirical_b = 0;
  std::size_t round = 0;
};

struct RoundRecord {
  std::size_t episode = 0;
  double success_rate = 0.0;
  std::size_t b = 0;
  double eta = 0.0;
  std::size_t round = 0;
};

struct TrainingLog {
  std::vector<EvalRecord> evals;
  std::vector<RoundRecord> rounds;
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::size_t accepted = 0;
};

struct EvalMetrics {
  double success_rate = 0.0;
  double norm_return = 0.0;
  std::size_t empirical_b = 0;
  std::size_t episodes = 0;
};

/// Chooses an action for a product state; the generator is available to
/// randomized policies.
using Policy = std::function<std::size_t(ProductState, std::mt19937_64&)>;
Policy greedy_policy(const QTable& q);
Policy uniform_policy(std::size_t actions);

/// Runs episodes under a fixed policy and reports success rate, normalized
/// sub-goal return and the lowest partition index reached.
EvalMetrics evaluate(LabeledEnv& env, std::shared_ptr<const TaskModel> task, const Policy& policy,
                     std::size_t episodes, std::uint64_t seed);

/// Lowest partition index reached over greedy rollouts.
std::size_t empirical_progression(LabeledEnv& env, std::shared_ptr<const TaskModel> task, const Policy& policy,
                                  std::size_t rollouts, std::uint64_t seed);

struct TrainResult {
  QTable q;
  TrainingLog log;
  RewardContext context;
};

/// Epsilon-greedy Q-learning over the product. After every schedule
/// interval the training success rate over the last interval is compared
/// with lambda; adaptive contexts then advance a round at the empirical
/// progression of the greedy policy.
TrainResult train(LabeledEnv& env, RewardContext ctx, const AdaptiveSchedule& sched, const QConfig& qcfg,
                  std::size_t budget, std::uint64_t seed, const EvalConfig& eval = {});

/// Replays an action sequence from reset(seed), returning each step.
std::vector<ProductSession::Step> replay(LabeledEnv& env, std::shared_ptr<const TaskModel> task,
                                         const RewardContext& ctx, std::uint64_t seed,
                                         const std::vector<std::size_t>& actions);

} // namespace ltlshape
