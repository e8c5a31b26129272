#include "ltlshape/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace ltlshape {

namespace {

std::uint64_t product_key(ProductState ps) { return (std::uint64_t(ps.env) << 20) ^ ps.q; }

bool close(double a, double b) { return std::fabs(a - b) <= 1e-9 * (1.0 + std::max(std::fabs(a), std::fabs(b))); }

// Forward propagation of state occupancy under a policy. Returns the
// expected discounted return (when ctx is given) and the lowest partition
// index visited with positive probability.
std::pair<double, std::size_t> propagate(const EnumeratedProduct& p, const ProductPolicy& pi,
                                         const RewardContext* ctx) {
  const auto& part = p.task->partition;
  std::vector<double> mass(p.size(), 0.0), next(p.size(), 0.0);
  std::size_t best = part.size();
  for (auto o : p.initial) {
    mass[o.state] += o.prob;
    best = std::min(best, part.index_of(p.states[o.state].q));
  }
  double value = 0.0, discount = 1.0;
  std::vector<std::pair<std::size_t, double>> dist;
  for (std::size_t t = 0; t < p.horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < p.size(); ++s) {
      if (mass[s] <= 0.0 || p.terminal[s])
        continue;
      dist.clear();
      pi.distribution(t, s, dist);
      for (auto [a, pa] : dist) {
        if (pa <= 0.0)
          continue;
        for (auto o : p.outcomes(s, a)) {
          double m = mass[s] * pa * o.prob;
          if (ctx)
            value += discount * m * ctx->reward({p.states[s].q, p.states[o.state].q});
          next[o.state] += m;
          best = std::min(best, part.index_of(p.states[o.state].q));
        }
      }
    }
    mass.swap(next);
    discount *= p.gamma;
  }
  return {value, best};
}

} // namespace

std::optional<std::size_t> EnumeratedProduct::find(ProductState ps) const {
  auto it = std::find(states.begin(), states.end(), ps);
  if (it == states.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

EnumeratedProduct enumerate_product(const LabeledEnv& env, std::shared_ptr<const TaskModel> task, double gamma,
                                    std::size_t max_states) {
  if (!env.enumerable())
    throw NotEnumerable("environment '" + env.name() + "' cannot be enumerated");
  EnumeratedProduct p;
  p.task = task;
  p.actions = env.action_count();
  p.horizon = env.horizon();
  p.gamma = gamma;
  const Dfa& dfa = task->dfa;
  LetterMap to_task(env.propositions(), dfa.ap());

  std::unordered_map<std::uint64_t, std::size_t> index;
  std::deque<std::size_t> queue;
  auto intern = [&](ProductState ps, std::size_t depth) {
    auto [it, fresh] = index.try_emplace(product_key(ps), p.states.size());
    if (fresh) {
      if (p.states.size() >= max_states)
        throw std::length_error("product exceeds " + std::to_string(max_states) + " states");
      p.states.push_back(ps);
      p.depth.push_back(depth);
      p.terminal.push_back(classify(*task, ps.q, env.done(ps.env), 0, 1) != Status::Running);
      queue.push_back(it->second);
    }
    return it->second;
  };

  std::map<std::size_t, double> init;
  for (auto o : env.initial_distribution()) {
    ProductState ps{o.state, dfa.step(dfa.initial(), to_task(env.label(o.state)))};
    init[intern(ps, 0)] += o.prob;
  }
  for (auto [s, pr] : init)
    p.initial.push_back({s, pr});

  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    p.next.resize(p.states.size() * p.actions);
    if (p.terminal[s])
      continue;
    for (std::size_t a = 0; a < p.actions; ++a) {
      std::map<std::size_t, double> acc;
      ProductState cur = p.states[s];
      for (auto o : env.outcomes(cur.env, a)) {
        ProductState ps{o.state, dfa.step(cur.q, to_task(env.label(o.state)))};
        acc[intern(ps, p.depth[s] + 1)] += o.prob;
      }
      auto& out = p.next[s * p.actions + a];
      for (auto [t, pr] : acc)
        out.push_back({t, pr});
    }
  }
  p.next.resize(p.states.size() * p.actions);
  return p;
}

ProductPolicy ProductPolicy::staged(std::vector<std::vector<std::size_t>> action) {
  ProductPolicy p;
  p.kind_ = Kind::Staged;
  p.staged_ = std::move(action);
  return p;
}

ProductPolicy ProductPolicy::stationary(std::vector<std::size_t> action) { return staged({std::move(action)}); }

ProductPolicy ProductPolicy::stochastic(std::vector<std::vector<double>> probs) {
  ProductPolicy p;
  p.kind_ = Kind::Stochastic;
  p.probs_ = std::move(probs);
  return p;
}

ProductPolicy ProductPolicy::open_loop(std::vector<std::size_t> sequence, std::size_t fill) {
  ProductPolicy p;
  p.kind_ = Kind::OpenLoop;
  p.sequence_ = std::move(sequence);
  p.fill_ = fill;
  return p;
}

void ProductPolicy::distribution(std::size_t stage, std::size_t state,
                                 std::vector<std::pair<std::size_t, double>>& out) const {
  switch (kind_) {
  case Kind::Staged: {
    if (staged_.empty())
      throw std::domain_error("empty policy");
    const auto& row = staged_[std::min(stage, staged_.size() - 1)];
    if (state >= row.size() || row[state] == kUndefined)
      throw std::domain_error("policy undefined at state " + std::to_string(state));
    out.emplace_back(row[state], 1.0);
    return;
  }
  case Kind::Stochastic:
    if (state >= probs_.size())
      throw std::domain_error("policy undefined at state " + std::to_string(state));
    for (std::size_t a = 0; a < probs_[state].size(); ++a)
      out.emplace_back(a, probs_[state][a]);
    return;
  case Kind::OpenLoop:
    out.emplace_back(stage < sequence_.size() ? sequence_[stage] : fill_, 1.0);
    return;
  }
}

ViResult value_iteration(const EnumeratedProduct& p, const RewardContext& ctx) {
  const std::size_t n = p.size();
  std::vector<double> v(n, 0.0), prev(n, 0.0);
  std::vector<std::vector<std::size_t>> action(p.horizon, std::vector<std::size_t>(n, 0));
  for (std::size_t t = p.horizon; t-- > 0;) {
    prev.swap(v);
    for (std::size_t s = 0; s < n; ++s) {
      if (p.terminal[s]) {
        v[s] = 0.0;
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t a = 0; a < p.actions; ++a) {
        double q = 0.0;
        for (auto o : p.outcomes(s, a))
          q += o.prob * (ctx.reward({p.states[s].q, p.states[o.state].q}) + p.gamma * prev[o.state]);
        if (q > best) {
          best = q;
          arg = a;
        }
      }
      v[s] = best;
      action[t][s] = arg;
    }
  }
  if (p.horizon == 0)
    std::fill(v.begin(), v.end(), 0.0);
  ViResult r{ProductPolicy::staged(std::move(action)), 0.0, v};
  for (auto o : p.initial)
    r.value += o.prob * v[o.state];
  return r;
}

double policy_evaluation(const EnumeratedProduct& p, const ProductPolicy& pi, const RewardContext& ctx) {
  return propagate(p, pi, &ctx).first;
}

std::size_t policy_progression(const EnumeratedProduct& p, const ProductPolicy& pi) {
  return propagate(p, pi, nullptr).second;
}

std::size_t best_progression(const EnumeratedProduct& p) {
  std::size_t best = p.task->partition.size();
  for (std::size_t s = 0; s < p.size(); ++s)
    if (p.depth[s] <= p.horizon)
      best = std::min(best, p.task->partition.index_of(p.states[s].q));
  return best;
}

std::pair<ProductPolicy, double> max_reach_policy(const EnumeratedProduct& p, std::size_t b) {
  const std::size_t n = p.size();
  std::vector<char> target(n);
  for (std::size_t s = 0; s < n; ++s)
    target[s] = p.task->partition.index_of(p.states[s].q) < b;
  std::vector<double> w(n), prev(n);
  for (std::size_t s = 0; s < n; ++s)
    w[s] = target[s];
  std::vector<std::vector<std::size_t>> action(std::max<std::size_t>(p.horizon, 1), std::vector<std::size_t>(n, 0));
  for (std::size_t t = p.horizon; t-- > 0;) {
    prev.swap(w);
    for (std::size_t s = 0; s < n; ++s) {
      if (target[s] || p.terminal[s]) {
        w[s] = target[s];
        continue;
      }
      double best = -1.0;
      for (std::size_t a = 0; a < p.actions; ++a) {
        double q = 0.0;
        for (auto o : p.outcomes(s, a))
          q += o.prob * prev[o.state];
        if (q > best) {
          best = q;
          action[t][s] = a;
        }
      }
      w[s] = best;
    }
  }
  double prob = 0.0;
  for (auto o : p.initial)
    prob += o.prob * w[o.state];
  return {ProductPolicy::staged(std::move(action)), prob};
}

double trajectory_return(const SymbolicTrajectory& tr, const RewardContext& ctx, double gamma) {
  const TaskModel& task = ctx.task();
  auto ended = [&](StateId q) { return task.dfa.is_accepting(q) || task.analysis.is_trap(q); };
  if (tr.initial >= task.dfa.size())
    throw std::invalid_argument("trajectory starts in an unknown state");
  StateId q = tr.initial;
  std::size_t last = 0;
  for (const auto& e : tr.events) {
    if (e.step <= last || e.step > tr.length)
      throw std::invalid_argument("trajectory event steps must increase and stay within the length");
    if (e.from != q || e.to >= task.dfa.size() || e.from == e.to)
      throw std::invalid_argument("trajectory events do not chain at step " + std::to_string(e.step));
    if (task.analysis.count(e.from, e.to) == 0)
      throw std::invalid_argument("no automaton transition for the event at step " + std::to_string(e.step));
    q = e.to;
    last = e.step;
  }

  double total = 0.0, discount = 1.0;
  q = tr.initial;
  auto ev = tr.events.begin();
  for (std::size_t t = 1; t <= tr.length && !ended(q); ++t) {
    StateId q2 = q;
    if (ev != tr.events.end() && ev->step == t)
      q2 = (ev++)->to;
    total += discount * ctx.reward({q, q2});
    discount *= gamma;
    q = q2;
  }
  if (ev != tr.events.end())
    throw std::invalid_argument("trajectory continues after the episode has ended");
  return total;
}

TheoremReport theorem_check(const EnumeratedProduct& p, RewardKind kind, double theta, double eta0,
                            std::optional<std::size_t> round_cap) {
  if (!is_adaptive(kind))
    throw std::invalid_argument("theorem check needs an adaptive reward");
  TheoremReport rep;
  rep.kind = std::string(to_string(kind));
  rep.theta = theta;
  rep.eta0 = eta0;
  rep.b_star = best_progression(p);
  rep.round_cap = round_cap.value_or(2 * p.task->partition.size());

  RewardContext ctx(kind, p.task, eta0, theta);
  ViResult vi = value_iteration(p, ctx);
  for (;;) {
    TheoremIteration it{ctx.round(), policy_progression(p, vi.policy), vi.value, ctx.eta()};
    rep.final_b = it.b;
    if (it.b == rep.b_star) {
      rep.converged = true;
      rep.iterations.push_back(it);
      break;
    }
    if (ctx.round() >= rep.round_cap) {
      auto [reach, prob] = max_reach_policy(p, it.b);
      double sigma = std::max(0.0, vi.value - policy_evaluation(p, reach, ctx));
      if (prob > 0.0)
        rep.theta_lower_bound = sigma / (prob * std::pow(p.gamma, double(p.horizon) - 1.0));
      rep.iterations.push_back(it);
      break;
    }

    RewardContext next = ctx.advance_round(it.b);
    ViResult vi_next = value_iteration(p, next);
    std::size_t b_next = policy_progression(p, vi_next.policy);

    double old_under_next = policy_evaluation(p, vi.policy, next);
    if (vi_next.value > old_under_next && !close(vi_next.value, old_under_next) && !(b_next < it.b))
      it.lemma2_ok = false;

    // pi*_k never goes below B_{b_k}, so its progression return is unchanged.
    double before = policy_evaluation(p, vi.policy, ctx.with_kind(RewardKind::AdaptiveProgression));
    double after = policy_evaluation(p, vi.policy, next.with_kind(RewardKind::AdaptiveProgression));
    it.invariance_ok = close(before, after);

    rep.lemma2_ok = rep.lemma2_ok && it.lemma2_ok;
    rep.invariance_ok = rep.invariance_ok && it.invariance_ok;
    rep.iterations.push_back(it);
    ctx = std::move(next);
    vi = std::move(vi_next);
  }
  rep.rounds = ctx.round();
  return rep;
}

std::string TheoremReport::json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["theta"] = theta;
  j["eta0"] = eta0;
  j["b_star"] = b_star;
  j["final_b"] = final_b;
  j["rounds"] = rounds;
  j["round_cap"] = round_cap;
  j["converged"] = converged;
  j["lemma2_ok"] = lemma2_ok;
  j["invariance_ok"] = invariance_ok;
  j["theta_lower_bound"] = theta_lower_bound ? nlohmann::ordered_json(*theta_lower_bound) : nullptr;
  auto& its = j["iterations"] = nlohmann::ordered_json::array();
  for (const auto& it : iterations)
    its.push_back({{"round", it.round},
                   {"b", it.b},
                   {"value", it.value},
                   {"eta", it.eta},
                   {"lemma2_ok", it.lemma2_ok},
                   {"invariance_ok", it.invariance_ok}});
  return j.dump(2);
}

} // namespace ltlshape

namespace ltlshape {

std::vector<ExamplePolicy> example_policies(const FlagGrid& env, const TaskModel& task) {
  const GridMap& m = env.map();
  auto cons = example_map_constraints(m);
  Cell start = m.start(), blue_a = cons[0].to, yellow = cons[1].to, orange = cons[2].to, blue_b = cons[3].to;
  const Dfa& dfa = task.dfa;
  auto letter = [&](std::string_view p) {
    auto i = dfa.ap().index_of(p);
    if (!i)
      throw std::invalid_argument("task automaton lacks proposition '" + std::string(p) + "'");
    return Letter{1} << *i;
  };
  auto path = [&](Cell from, Cell to, std::vector<Cell> avoid) {
    auto a = shortest_path_actions(m, from, to, avoid);
    if (!a)
      throw std::invalid_argument("example map has no path for a scripted policy");
    return *a;
  };
  const std::size_t h = env.horizon();
  StateId q0 = dfa.initial();
  std::vector<ExamplePolicy> out;

  {
    auto a = path(start, blue_a, {yellow, orange, blue_b});
    std::size_t stay = 4;
    for (std::size_t k = 0; k < 4 && stay == 4; ++k)
      if (m.move(blue_a, static_cast<GridAction>(k)) == blue_a)
        stay = k;
    if (stay == 4)
      throw std::invalid_argument("blue flag has no blocked side to wait against");
    StateId q = dfa.step(q0, letter("b"));
    out.push_back({"pi1", a, stay, {q0, {{a.size(), q0, q}}, h}});
  }
  {
    auto a = path(start, orange, {yellow, blue_a, blue_b});
    auto b = path(orange, blue_b, {yellow, blue_a});
    StateId q1 = dfa.step(q0, letter("o"));
    StateId q2 = dfa.step(q1, letter("b"));
    std::vector<std::size_t> all = a;
    all.insert(all.end(), b.begin(), b.end());
    out.push_back({"pi2", all, 0, {q0, {{a.size(), q0, q1}, {all.size(), q1, q2}}, h}});
  }
  {
    auto a = path(start, yellow, {blue_a, orange, blue_b});
    StateId q = dfa.step(q0, letter("y"));
    out.push_back({"pi3", a, 0, {q0, {{a.size(), q0, q}}, h}});
  }
  return out;
}

} // namespace ltlshape
