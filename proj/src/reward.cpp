#include "ltlshape/reward.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace ltlshape {

namespace {
constexpr std::array<std::pair<RewardKind, std::string_view>, 5> kNames{{
    {RewardKind::Progression, "progression"},
    {RewardKind::Hybrid, "hybrid"},
    {RewardKind::AdaptiveProgression, "adaptive_progression"},
    {RewardKind::AdaptiveHybrid, "adaptive_hybrid"},
    {RewardKind::Naive, "naive"},
}};
} // namespace

std::string_view to_string(RewardKind k) {
  for (auto [kind, name] : kNames)
    if (kind == k)
      return name;
  return "unknown";
}

std::optional<RewardKind> parse_reward_kind(std::string_view s) {
  for (auto [kind, name] : kNames)
    if (name == s)
      return kind;
  return std::nullopt;
}

bool is_adaptive(RewardKind k) { return k == RewardKind::AdaptiveProgression || k == RewardKind::AdaptiveHybrid; }

RewardContext::RewardContext(RewardKind kind, std::shared_ptr<const TaskModel> task, double eta0, double theta)
    : kind_(kind), task_(std::move(task)), eta0_(eta0), eta_(eta0), theta_(theta) {
  if (!task_)
    throw std::invalid_argument("reward context needs a task");
  if (!(eta0 >= 0.0 && eta0 <= 1.0))
    throw std::invalid_argument("eta0 must lie in [0, 1]");
  if (!(theta > 1.0))
    throw std::invalid_argument("theta must be greater than 1");
  current_ = task_->base;
}

double RewardContext::progression_k(StateId q, StateId q2) const {
  return progression(current_, task_->analysis, q, q2);
}

double RewardContext::adaptive_progression(StateId q, StateId q2) const {
  return std::max(progression(task_->base, task_->analysis, q, q2), progression_k(q, q2));
}

double RewardContext::reward(TransitionView tv) const {
  const auto& base = task_->base;
  switch (kind_) {
  case RewardKind::Progression: return progression(base, task_->analysis, tv.from, tv.to);
  case RewardKind::Hybrid:
    if (tv.from == tv.to)
      return eta0_ * -base[tv.from];
    return (1.0 - eta0_) * progression(base, task_->analysis, tv.from, tv.to);
  case RewardKind::AdaptiveProgression: return adaptive_progression(tv.from, tv.to);
  case RewardKind::AdaptiveHybrid:
    if (tv.from == tv.to)
      return eta_ * -current_[tv.from];
    return (1.0 - eta_) * adaptive_progression(tv.from, tv.to);
  case RewardKind::Naive:
    return base[tv.from] > base[tv.to] && task_->analysis.reaches_accepting(tv.from) ? 1.0 : 0.0;
  }
  return 0.0;
}

RewardContext RewardContext::advance_round(std::size_t b) const {
  if (!is_adaptive(kind_))
    throw std::logic_error("advance_round on non-adaptive reward '" + std::string(to_string(kind_)) + "'");
  RewardContext next = *this;
  next.current_ = update_distances(current_, task_->partition, b, theta_);
  next.eta_ = eta_ / theta_;
  return next;
}

RewardContext RewardContext::with_kind(RewardKind k) const {
  RewardContext out = *this;
  out.kind_ = k;
  return out;
}

double default_theta(const TaskModel& task) { return std::max(2.0, task.progression_sum()); }

} // namespace ltlshape
