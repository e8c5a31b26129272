#include "ltlshape/subgoal.hpp"

#include <stdexcept>

namespace ltlshape {

SubgoalRewarder::SubgoalRewarder(std::shared_ptr<const TaskModel> task) : task_(std::move(task)) {
  if (!task_)
    throw std::invalid_argument("subgoal rewarder needs a task");
  const auto& p = task_->partition;
  // Rank = number of non-trap sets strictly below the state's set.
  std::vector<std::size_t> below(p.size() + 1, 0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    bool trap = !p.set(i).empty() && task_->analysis.is_trap(p.set(i).front());
    below[i + 1] = below[i] + (trap ? 0 : 1);
  }
  rank_.resize(task_->dfa.size());
  for (StateId q = 0; q < task_->dfa.size(); ++q)
    rank_[q] = below[p.index_of(q)];
}

std::size_t SubgoalRewarder::subgoals(StateId q0) const { return task_->analysis.is_trap(q0) ? 0 : rank_[q0]; }

void SubgoalRewarder::reset(StateId q0) {
  max_ = subgoals(q0);
  best_ = max_;
  paid_ = 0.0;
}

double SubgoalRewarder::enter(StateId q) {
  if (task_->analysis.is_trap(q) || rank_[q] >= best_)
    return 0.0;
  double r = static_cast<double>(best_ - rank_[q]);
  best_ = rank_[q];
  paid_ += r;
  return r;
}

} // namespace ltlshape
