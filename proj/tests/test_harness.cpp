#include "support/fixtures.hpp"

#include "ltlshape/harness.hpp"
#include "ltlshape/oracle.hpp"
#include "ltlshape/subgoal.hpp"

#include <doctest.h>

#include <random>

using namespace ltlshape;
using namespace testsupport;

namespace {

std::shared_ptr<const TaskModel> example_task() {
  PropositionSet ap = example_ap();
  return std::make_shared<const TaskModel>(minimize(compile(parse(kExampleFormula, ap), ap)));
}

/// Open-loop policy that plays a script and then repeats `fill`.
Policy scripted(std::vector<std::size_t> actions, std::size_t fill, std::shared_ptr<std::size_t> clock) {
  return [actions = std::move(actions), fill, clock](ProductState, std::mt19937_64&) {
    std::size_t t = (*clock)++;
    return t < actions.size() ? actions[t] : fill;
  };
}

} // namespace

TEST_CASE("status precedence") {
  auto task = fixture_task();
  CHECK(classify(*task, 4, true, 99, 25) == Status::Accepted);
  CHECK(classify(*task, 3, true, 99, 25) == Status::Trapped);
  CHECK(classify(*task, 0, true, 99, 25) == Status::EnvDone);
  CHECK(classify(*task, 0, false, 25, 25) == Status::Horizon);
  CHECK(classify(*task, 0, false, 24, 25) == Status::Running);
  CHECK(to_string(Status::Horizon) == "horizon");
}

TEST_CASE("the product tracks the automaton on environment labels") {
  auto task = fixture_task();
  FlagGrid env = example_grid(0.2);
  ProductSession sess(env, task);
  RewardContext ctx(RewardKind::Hybrid, task);
  LetterMap to_task(env.propositions(), task->dfa.ap());
  std::mt19937_64 rng(1);
  for (int e = 0; e < 300; ++e) {
    ProductState s = sess.reset(e);
    StateId q = task->dfa.step(task->dfa.initial(), to_task(env.label(env.state())));
    CHECK(s.q == q);
    while (sess.status() == Status::Running) {
      auto st = sess.step(ctx, rng() % 4);
      StateId q2 = task->dfa.step(q, to_task(env.label(env.state())));
      CHECK(st.label == to_task(env.label(env.state())));
      CHECK(st.next.q == q2);
      CHECK(st.next.env == env.state());
      CHECK(st.reward == ctx(q, q2));
      q = q2;
    }
    CHECK(sess.steps() <= 25);
    CHECK(sess.status() == classify(*task, q, env.done(env.state()), sess.steps(), 25));
  }
  CHECK_THROWS_AS(sess.step(ctx, 0), std::logic_error);
}

TEST_CASE("example scripts end the way the example describes") {
  auto task = fixture_task();
  FlagGrid env = example_grid();
  RewardContext ctx(RewardKind::Progression, task);
  auto pols = example_policies(env, *task);
  REQUIRE(pols.size() == 3);

  std::vector<std::size_t> a1 = pols[0].actions;
  a1.resize(40, pols[0].fill);
  auto r1 = replay(env, task, ctx, 0, a1);
  CHECK(r1.size() == 25);
  CHECK(r1.back().status == Status::Horizon);
  CHECK(r1[9].next.q == 2);

  auto r2 = replay(env, task, ctx, 0, pols[1].actions);
  CHECK(r2.size() == 20);
  CHECK(r2.back().status == Status::Accepted);

  auto r3 = replay(env, task, ctx, 0, pols[2].actions);
  CHECK(r3.size() == 5);
  CHECK(r3.back().status == Status::Trapped);
}

TEST_CASE("q-table basics") {
  QTable q(4);
  ProductState s{7, 1};
  CHECK(q.value(s, 2) == 0.0);
  CHECK(q.max_value(s) == 0.0);
  CHECK(q.greedy(s) == 0);
  q.update(s, 2, 1.0, 0.5);
  CHECK(q.value(s, 2) == 0.5);
  CHECK(q.greedy(s) == 2);
  q.update(s, 3, 1.0, 1.0);
  CHECK(q.greedy(s) == 3);
  q.update(s, 2, 1.0, 1.0);
  CHECK(q.greedy(s) == 2); // tie goes to the lower index
  CHECK(q.size() == 1);
  q.clear(5.0);
  CHECK(q.size() == 0);
  CHECK(q.value(s, 0) == 5.0);
  q.update(s, 1, 0.0, 0.5);
  CHECK(q.value(s, 1) == 2.5);
  CHECK(q.value(s, 0) == 5.0);
}

TEST_CASE("success and normalized return accounting") {
  auto task = fixture_task();
  FlagGrid env = example_grid();
  auto pols = example_policies(env, *task);
  auto clock = std::make_shared<std::size_t>(0);

  // One evaluation episode per call so every episode restarts the script.
  struct Expect {
    double success, norm;
    std::size_t b;
  };
  const Expect want[3] = {{0, 0.5, 1}, {1, 1, 0}, {0, 0, 2}};
  for (std::size_t i = 0; i < 3; ++i) {
    CAPTURE(pols[i].name);
    for (std::uint64_t e = 0; e < 3; ++e) {
      *clock = 0;
      auto m = evaluate(env, task, scripted(pols[i].actions, pols[i].fill, clock), 1, e);
      CHECK(m.episodes == 1);
      CHECK(m.success_rate == want[i].success);
      CHECK(m.norm_return == want[i].norm);
      CHECK(m.empirical_b == want[i].b);
    }
  }
  auto random = evaluate(env, task, uniform_policy(4), 50, 3);
  CHECK(random.episodes == 50);
  CHECK(random.success_rate <= 1.0);
  CHECK(evaluate(env, task, uniform_policy(4), 0, 3).episodes == 0);
}

TEST_CASE("subgoal rewarder") {
  auto task = fixture_task();
  SubgoalRewarder r(task);
  CHECK(r.subgoals(0) == 2);
  CHECK(r.subgoals(1) == 1);
  CHECK(r.subgoals(4) == 0);
  r.reset(0);
  CHECK(r.enter(0) == 0.0);
  CHECK(r.enter(2) == 1.0);
  CHECK(r.enter(2) == 0.0);
  CHECK(r.enter(4) == 1.0);
  CHECK(r.episode_return() == 2.0);
  r.reset(0);
  CHECK(r.enter(4) == 2.0);
  r.reset(0);
  CHECK(r.enter(3) == 0.0);
}

TEST_CASE("training bookkeeping") {
  auto task = example_task();
  FlagGrid env = example_grid();
  QConfig qc;
  SUBCASE("zero budget produces nothing") {
    auto r = train(env, RewardContext(RewardKind::AdaptiveHybrid, task), {}, qc, 0, 1);
    CHECK(r.log.episodes == 0);
    CHECK(r.log.steps == 0);
    CHECK(r.log.evals.empty());
    CHECK(r.log.rounds.empty());
    CHECK(r.q.size() == 0);
  }
  SUBCASE("non-adaptive rewards never advance a round") {
    auto r = train(env, RewardContext(RewardKind::Progression, task), {100, 0.95, 5}, qc, 1000, 1, {250, 2});
    CHECK(r.log.episodes == 1000);
    CHECK(r.log.rounds.empty());
    CHECK(r.context.round() == 0);
    CHECK(r.log.evals.size() == 4);
    CHECK(r.log.evals.back().episodes == 1000);
  }
  SUBCASE("adaptive rewards advance while success stays low") {
    auto r = train(env, RewardContext(RewardKind::AdaptiveProgression, task), {100, 0.95, 5}, qc, 500, 1, {100, 2});
    CHECK(r.log.rounds.size() == 5);
    CHECK(r.context.round() == 5);
    for (const auto& rr : r.log.rounds)
      CHECK(rr.b < task->partition.size());
  }
  SUBCASE("same seed, same log") {
    auto a = train(env, RewardContext(RewardKind::AdaptiveHybrid, task), {200, 0.95, 5}, qc, 600, 9, {100, 3});
    auto b = train(env, RewardContext(RewardKind::AdaptiveHybrid, task), {200, 0.95, 5}, qc, 600, 9, {100, 3});
    CHECK(a.log.steps == b.log.steps);
    CHECK(a.log.accepted == b.log.accepted);
    REQUIRE(a.log.evals.size() == b.log.evals.size());
    for (std::size_t i = 0; i < a.log.evals.size(); ++i)
      CHECK(a.log.evals[i].norm_return == b.log.evals[i].norm_return);
  }
  SUBCASE("interval zero is rejected") {
    CHECK_THROWS_AS(train(env, RewardContext(RewardKind::AdaptiveHybrid, task), {0}, qc, 10, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("propositions missing from the environment read as false") {
  PropositionSet ap({"o", "z"});
  auto task = std::make_shared<const TaskModel>(minimize(compile(parse("F z | F o", ap), ap)));
  FlagGrid env = example_grid();
  auto pols = example_policies(env, *fixture_task());
  auto steps = replay(env, task, RewardContext(RewardKind::Progression, task), 0, pols[1].actions);
  REQUIRE_FALSE(steps.empty());
  CHECK(steps.back().status == Status::Accepted);
  for (const auto& s : steps)
    CHECK((s.label & 0b10) == 0);
}
