#pragma once

#include "ltlshape/task_metrics.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace ltlshape {

enum class RewardKind { Progression, Hybrid, AdaptiveProgression, AdaptiveHybrid, Naive };

std::string_view to_string(RewardKind k);
/// Accepts the snake_case names used in configs ("adaptive_hybrid", ...).
std::optional<RewardKind> parse_reward_kind(std::string_view s);
bool is_adaptive(RewardKind k);

/// DFA-level view of a product transition. Environment state and action
/// do not influence any reward function.
struct TransitionView {
  StateId from;
  StateId to;
};

/// Reward function state for one adaptive round. Immutable; advance_round
/// returns the next round's context.
class RewardContext {
public:
  /// Round-0 context. Throws std::invalid_argument unless eta0 is in [0,1]
  /// and theta > 1.
  RewardContext(RewardKind kind, std::shared_ptr<const TaskModel> task, double eta0 = 0.1, double theta = 100.0);

  RewardKind kind() const { return kind_; }
  std::size_t round() const { return current_.round; }
  double eta0() const { return eta0_; }
  /// eta_k = eta_0 / theta^k.
  double eta() const { return eta_; }
  double theta() const { return theta_; }
  const TaskModel& task() const { return *task_; }
  std::shared_ptr<const TaskModel> task_ptr() const { return task_; }
  const DistanceTable& base() const { return task_->base; }
  const DistanceTable& current() const { return current_; }

  double reward(TransitionView tv) const;
  double operator()(StateId q, StateId q2) const { return reward({q, q2}); }

  /// Round-k progression with the current table.
  double progression_k(StateId q, StateId q2) const;
  /// max{rho^0, rho^k}.
  double adaptive_progression(StateId q, StateId q2) const;

  /// Applies the distance update at partition index b and divides eta by
  /// theta. Throws std::logic_error for non-adaptive kinds.
  RewardContext advance_round(std::size_t b) const;

  /// Same distance tables and round, different reward function.
  RewardContext with_kind(RewardKind k) const;

private:
  RewardKind kind_;
  std::shared_ptr<const TaskModel> task_;
  double eta0_;
  double eta_;
  double theta_;
  DistanceTable current_;
};

/// Theta suggested by the progression-sum heuristic, floored at 2.
double default_theta(const TaskModel& task);

} // namespace ltlshape
