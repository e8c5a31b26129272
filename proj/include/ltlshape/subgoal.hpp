#pragma once

#include "ltlshape/task_metrics.hpp"

#include <memory>

namespace ltlshape {

/// Test-time metric reward: the sub-goals of an episode are the non-trap
/// partition sets ranked below the episode's initial DFA state. Entering a
/// set pays 1 for it and for every sub-goal above it not yet paid, so each
/// sub-goal pays at most once per episode.
class SubgoalRewarder {
public:
  explicit SubgoalRewarder(std::shared_ptr<const TaskModel> task);

  /// Number of sub-goals (maximum return) for an episode starting in q0.
  std::size_t subgoals(StateId q0) const;

  void reset(StateId q0);
  /// Reward for entering q.
  double enter(StateId q);
  double episode_return() const { return paid_; }
  std::size_t max_return() const { return max_; }

private:
  std::shared_ptr<const TaskModel> task_;
  std::vector<std::size_t> rank_; // sub-goal rank per state, 0 = accepting
  std::size_t best_ = 0;
  std::size_t max_ = 0;
  double paid_ = 0.0;
};

} // namespace ltlshape
