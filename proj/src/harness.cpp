#include "ltlshape/harness.hpp"

#include "ltlshape/seed.hpp"
#include "ltlshape/subgoal.hpp"

#include <algorithm>
#include <stdexcept>

namespace ltlshape {

std::string_view to_string(Status s) {
  switch (s) {
  case Status::Running: return "running";
  case Status::Accepted: return "accepted";
  case Status::Trapped: return "trapped";
  case Status::Horizon: return "horizon";
  case Status::EnvDone: return "env_done";
  }
  return "unknown";
}

Status classify(const TaskModel& task, StateId q, bool env_done, std::size_t steps, std::size_t horizon) {
  if (task.dfa.is_accepting(q))
    return Status::Accepted;
  if (task.analysis.is_trap(q))
    return Status::Trapped;
  if (env_done)
    return Status::EnvDone;
  if (steps >= horizon)
    return Status::Horizon;
  return Status::Running;
}

ProductSession::ProductSession(LabeledEnv& env, std::shared_ptr<const TaskModel> task)
    : env_(&env), task_(std::move(task)), to_task_(env.propositions(), task_->dfa.ap()) {}

ProductState ProductSession::reset(std::uint64_t seed) {
  auto r = env_->reset(seed);
  steps_ = 0;
  state_ = {r.state, task_->dfa.step(task_->dfa.initial(), to_task_(r.label))};
  status_ = classify(*task_, state_.q, r.done, steps_, env_->horizon());
  return state_;
}

ProductSession::Step ProductSession::step(const RewardContext& ctx, std::size_t action) {
  if (status_ != Status::Running)
    throw std::logic_error("step on a terminated session (" + std::string(to_string(status_)) + ")");
  auto r = env_->step(action);
  Letter l = to_task_(r.label);
  StateId q2 = task_->dfa.step(state_.q, l);
  double reward = ctx.reward({state_.q, q2});
  ++steps_;
  state_ = {r.state, q2};
  status_ = classify(*task_, q2, r.done, steps_, env_->horizon());
  return {state_, l, reward, status_};
}

double QTable::value(ProductState s, std::size_t a) const {
  auto it = table_.find(key(s));
  return it == table_.end() ? init_ : it->second[a];
}

double QTable::max_value(ProductState s) const {
  auto it = table_.find(key(s));
  return it == table_.end() ? init_ : *std::max_element(it->second.begin(), it->second.end());
}

std::size_t QTable::greedy(ProductState s) const {
  auto it = table_.find(key(s));
  if (it == table_.end())
    return 0;
  return static_cast<std::size_t>(std::max_element(it->second.begin(), it->second.end()) - it->second.begin());
}

void QTable::update(ProductState s, std::size_t a, double target, double alpha) {
  auto [it, fresh] = table_.try_emplace(key(s));
  if (fresh)
    it->second.assign(actions_, init_);
  it->second[a] += alpha * (target - it->second[a]);
}

Policy greedy_policy(const QTable& q) {
  return [&q](ProductState s, std::mt19937_64&) { return q.greedy(s); };
}

Policy uniform_policy(std::size_t actions) {
  return [actions](ProductState, std::mt19937_64& rng) {
    return std::uniform_int_distribution<std::size_t>(0, actions - 1)(rng);
  };
}

namespace {

bool is_terminal(Status s) { return s == Status::Accepted || s == Status::Trapped || s == Status::EnvDone; }

} // namespace

EvalMetrics evaluate(LabeledEnv& env, std::shared_ptr<const TaskModel> task, const Policy& policy,
                     std::size_t episodes, std::uint64_t seed) {
  EvalMetrics m;
  m.episodes = episodes;
  if (episodes == 0)
    return m;
  ProductSession sess(env, task);
  SubgoalRewarder rewarder(task);
  const RewardContext ctx(RewardKind::Progression, task);
  std::mt19937_64 rng(seed);
  std::size_t accepted = 0;
  double returns = 0.0, max_returns = 0.0;
  std::size_t best = task->partition.size();
  for (std::size_t e = 0; e < episodes; ++e) {
    ProductState s = sess.reset(split_seed(seed, e));
    rewarder.reset(s.q);
    best = std::min(best, task->partition.index_of(s.q));
    while (sess.status() == Status::Running) {
      auto st = sess.step(ctx, policy(s, rng));
      rewarder.enter(st.next.q);
      best = std::min(best, task->partition.index_of(st.next.q));
      s = st.next;
    }
    accepted += sess.status() == Status::Accepted;
    returns += rewarder.episode_return();
    max_returns += static_cast<double>(rewarder.max_return());
  }
  m.success_rate = static_cast<double>(accepted) / static_cast<double>(episodes);
  m.norm_return = max_returns > 0.0 ? returns / max_returns : m.success_rate;
  m.empirical_b = best;
  return m;
}

std::size_t empirical_progression(LabeledEnv& env, std::shared_ptr<const TaskModel> task, const Policy& policy,
                                  std::size_t rollouts, std::uint64_t seed) {
  return evaluate(env, std::move(task), policy, std::max<std::size_t>(rollouts, 1), seed).empirical_b;
}

TrainResult train(LabeledEnv& env, RewardContext ctx, const AdaptiveSchedule& sched, const QConfig& qcfg,
                  std::size_t budget, std::uint64_t seed, const EvalConfig& eval) {
  auto task = ctx.task_ptr();
  TrainResult out{QTable(env.action_count(), qcfg.q_init), {}, ctx};
  if (budget == 0)
    return out;
  if (sched.interval && *sched.interval == 0)
    throw std::invalid_argument("schedule interval must be at least 1");

  const std::size_t interval =
      sched.interval.value_or(std::max<std::size_t>(1, budget / std::max<std::size_t>(1, task->partition.size())));
  QTable& q = out.q;
  TrainingLog& log = out.log;
  ProductSession sess(env, task);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_action(0, env.action_count() - 1);
  auto policy = greedy_policy(q);
  std::size_t window_accepted = 0;

  for (std::size_t ep = 0; ep < budget; ++ep) {
    double eps = qcfg.epsilon;
    if (qcfg.epsilon_final && budget > 1)
      eps += (*qcfg.epsilon_final - qcfg.epsilon) * static_cast<double>(ep) / static_cast<double>(budget - 1);

    ProductState s = sess.reset(split_seed(seed, 3 * ep));
    while (sess.status() == Status::Running) {
      std::size_t a = unit(rng) < eps ? any_action(rng) : q.greedy(s);
      auto st = sess.step(out.context, a);
      double target = st.reward;
      if (!is_terminal(st.status))
        target += qcfg.gamma * q.max_value(st.next);
      q.update(s, a, target, qcfg.alpha);
      s = st.next;
      ++log.steps;
    }
    bool ok = sess.status() == Status::Accepted;
    log.accepted += ok;
    window_accepted += ok;
    log.episodes = ep + 1;

    if (eval.episodes > 0 && eval.every > 0 && ((ep + 1) % eval.every == 0 || ep + 1 == budget)) {
      auto m = evaluate(env, task, policy, eval.episodes, split_seed(seed, 3 * ep + 1));
      log.evals.push_back({log.steps, ep + 1, m.success_rate, m.norm_return, m.empirical_b, out.context.round()});
    }

    if ((ep + 1) % interval == 0) {
      double rate = static_cast<double>(window_accepted) / static_cast<double>(interval);
      window_accepted = 0;
      if (rate < sched.lambda && is_adaptive(out.context.kind())) {
        std::size_t b = empirical_progression(env, task, policy, sched.eval_rollouts, split_seed(seed, 3 * ep + 2));
        out.context = out.context.advance_round(b);
        log.rounds.push_back({ep + 1, rate, b, out.context.eta(), out.context.round()});
        if (qcfg.reset_on_round)
          q.clear(qcfg.q_init);
      }
    }
  }
  return out;
}

std::vector<ProductSession::Step> replay(LabeledEnv& env, std::shared_ptr<const TaskModel> task,
                                         const RewardContext& ctx, std::uint64_t seed,
                                         const std::vector<std::size_t>& actions) {
  ProductSession sess(env, std::move(task));
  sess.reset(seed);
  std::vector<ProductSession::Step> out;
  for (std::size_t a : actions) {
    if (sess.status() != Status::Running)
      break;
    out.push_back(sess.step(ctx, a));
  }
  return out;
}

} // namespace ltlshape
