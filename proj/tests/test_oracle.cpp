#include "support/fixtures.hpp"
#include "support/formula_gen.hpp"

#include "ltlshape/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ltlshape;
using namespace testsupport;

namespace {

/// Best discounted return over every open-loop action sequence, found by
/// replaying each one. Exact for deterministic environments.
double brute_force_best(LabeledEnv& env, std::shared_ptr<const TaskModel> task, const RewardContext& ctx,
                        double gamma) {
  const std::size_t h = env.horizon(), n = env.action_count();
  std::size_t total = 1;
  for (std::size_t i = 0; i < h; ++i)
    total *= n;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> seq(h);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (auto& a : seq) {
      a = c % n;
      c /= n;
    }
    double ret = 0.0, disc = 1.0;
    for (const auto& st : replay(env, task, ctx, 0, seq)) {
      ret += disc * st.reward;
      disc *= gamma;
    }
    best = std::max(best, ret);
  }
  return best;
}

/// Random small map with a start and consumable flags a and b.
GridMap random_map(std::mt19937_64& rng) {
  const char pool[] = {'.', '.', '.', '#', 'a', 'b', 'B'};
  std::string text;
  int start = int(rng() % 6);
  for (int i = 0; i < 6; ++i) {
    text += i == start ? 'A' : pool[rng() % sizeof(pool)];
    if (i % 3 == 2)
      text += '\n';
  }
  return GridMap::parse(text);
}

EnumeratedProduct example_product(double noise = 0.0, const std::string& map = "example3.map") {
  FlagGrid env(GridMap::load(data_path(map)), noise, 25);
  return enumerate_product(env, fixture_task(), 0.9);
}

} // namespace

TEST_CASE("value iteration matches brute force on small deterministic grids") {
  std::mt19937_64 rng(5);
  FormulaGenerator gen(17, 3);
  PropositionSet ap({"a", "b"});
  int checked = 0;
  while (checked < 30) {
    GridMap m = random_map(rng);
    Formula f = gen(2);
    auto task = std::make_shared<const TaskModel>(minimize(compile(f, ap)));
    if (task->dfa.size() < 2)
      continue;
    CAPTURE(m.str());
    CAPTURE(to_string(f, ap));
    FlagGrid env(m, 0.0, 5);
    for (RewardKind k : {RewardKind::Progression, RewardKind::Hybrid, RewardKind::Naive}) {
      RewardContext ctx(k, task, 0.1, 100);
      auto p = enumerate_product(env, task, 0.9);
      double vi = value_iteration(p, ctx).value;
      CHECK(vi == doctest::Approx(brute_force_best(env, task, ctx, 0.9)).epsilon(1e-12));
    }
    ++checked;
  }
}

TEST_CASE("value iteration dominates random policies") {
  for (double noise : {0.0, 0.2}) {
    auto p = example_product(noise);
    RewardContext ctx = RewardContext(RewardKind::AdaptiveHybrid, p.task, 0.1, 100).advance_round(1);
    auto vi = value_iteration(p, ctx);
    CHECK(policy_evaluation(p, vi.policy, ctx) == doctest::Approx(vi.value).epsilon(1e-12));
    std::mt19937_64 rng(42);
    for (int i = 0; i < 1000; ++i) {
      double v;
      if (i % 2 == 0) {
        std::vector<std::size_t> act(p.size());
        for (auto& a : act)
          a = rng() % p.actions;
        v = policy_evaluation(p, ProductPolicy::stationary(act), ctx);
      } else {
        std::vector<std::vector<double>> probs(p.size(), std::vector<double>(p.actions));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& row : probs) {
          double s = 0;
          for (auto& x : row)
            s += x = u(rng);
          for (auto& x : row)
            x /= s;
        }
        v = policy_evaluation(p, ProductPolicy::stochastic(probs), ctx);
      }
      CHECK(v <= vi.value + 1e-9);
    }
  }
}

TEST_CASE("enumerated products") {
  SUBCASE("a corridor has a handful of product states") {
    PropositionSet ap({"b"});
    auto task = std::make_shared<const TaskModel>(minimize(compile(parse("F b", ap), ap)));
    FlagGrid env(GridMap::parse("A.b\n"), 0.0, 6);
    auto p = enumerate_product(env, task, 0.9);
    CHECK(p.size() <= 6);
    CHECK(p.initial.size() == 1);
    auto vi = value_iteration(p, RewardContext(RewardKind::Progression, task));
    CHECK(vi.value == doctest::Approx(0.9));
  }
  SUBCASE("deterministic outcomes are point masses") {
    auto p = example_product();
    for (std::size_t s = 0; s < p.size(); ++s)
      for (std::size_t a = 0; a < p.actions; ++a) {
        if (p.terminal[s]) {
          CHECK(p.outcomes(s, a).empty());
          continue;
        }
        REQUIRE(p.outcomes(s, a).size() == 1);
        CHECK(p.outcomes(s, a)[0].prob == 1.0);
      }
    CHECK(p.find(p.states[0]) == std::size_t{0});
  }
  SUBCASE("noisy outcomes are distributions") {
    auto p = example_product(0.2);
    for (std::size_t s = 0; s < p.size(); ++s)
      for (std::size_t a = 0; a < p.actions && !p.terminal[s]; ++a) {
        double sum = 0;
        for (const auto& o : p.outcomes(s, a))
          sum += o.prob;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
  }
  SUBCASE("simulators are refused") {
    auto sim = simulator_only(std::make_unique<FlagGrid>(example_grid()));
    CHECK_THROWS_AS(enumerate_product(*sim, fixture_task(), 0.9), NotEnumerable);
  }
  SUBCASE("state cap") {
    CHECK_THROWS_AS(enumerate_product(example_grid(), fixture_task(), 0.9, 10), std::length_error);
  }
}

TEST_CASE("example returns") {
  auto p = example_product();
  FlagGrid env = example_grid();
  auto pols = example_policies(env, *p.task);
  REQUIRE(pols.size() == 3);
  struct Row {
    RewardKind kind;
    double v[3];
  };
  const Row rows[] = {
      {RewardKind::Progression, {0.39, 0.34, 0.0}},
      {RewardKind::Hybrid, {-1.15, -1.33, -0.69}},
      {RewardKind::AdaptiveProgression, {0.39, 13.85, 0.0}},
      {RewardKind::AdaptiveHybrid, {-0.52, 12.97, -0.35}},
  };
  for (const auto& row : rows) {
    RewardContext ctx(row.kind, p.task, 0.1, 100);
    if (is_adaptive(row.kind))
      ctx = ctx.advance_round(1);
    for (std::size_t i = 0; i < 3; ++i) {
      CAPTURE(to_string(row.kind));
      CAPTURE(pols[i].name);
      double tr = trajectory_return(pols[i].trajectory, ctx, 0.9);
      double pe = policy_evaluation(p, ProductPolicy::open_loop(pols[i].actions, pols[i].fill), ctx);
      CHECK(std::fabs(tr - pe) <= 1e-9);
      CHECK(std::fabs(tr - row.v[i]) <= 0.01);
    }
  }
  // Closed forms.
  RewardContext pg(RewardKind::Progression, p.task);
  CHECK(trajectory_return(pols[0].trajectory, pg, 0.9) == doctest::Approx(std::pow(0.9, 9)));
  CHECK(trajectory_return(pols[1].trajectory, pg, 0.9) ==
        doctest::Approx(std::pow(0.9, 15) + std::pow(0.9, 19)));

  std::size_t b[3];
  for (std::size_t i = 0; i < 3; ++i)
    b[i] = policy_progression(p, ProductPolicy::open_loop(pols[i].actions, pols[i].fill));
  CHECK(b[0] == 1);
  CHECK(b[1] == 0);
  CHECK(b[2] == 2);
}

TEST_CASE("malformed trajectories") {
  auto task = fixture_task();
  RewardContext ctx(RewardKind::Progression, task);
  SymbolicTrajectory bad{0, {{3, 0, 1}, {2, 1, 4}}, 10};
  CHECK_THROWS_AS(trajectory_return(bad, ctx, 0.9), std::invalid_argument);
  SymbolicTrajectory wrong_from{0, {{3, 1, 4}}, 10};
  CHECK_THROWS_AS(trajectory_return(wrong_from, ctx, 0.9), std::invalid_argument);
  SymbolicTrajectory late{0, {{11, 0, 1}}, 10};
  CHECK_THROWS_AS(trajectory_return(late, ctx, 0.9), std::invalid_argument);
}

TEST_CASE("best progression and reachability") {
  auto p = example_product();
  CHECK(best_progression(p) == 0);
  auto [pi, prob] = max_reach_policy(p, 1);
  CHECK(prob == doctest::Approx(1.0));
  CHECK(policy_progression(p, pi) == 0);

  auto no_orange = example_product(0.0, "example3_no_orange.map");
  CHECK(best_progression(no_orange) == 1);
  CHECK(max_reach_policy(no_orange, 1).second == 0.0);

  auto noisy = example_product(0.2);
  double noisy_prob = max_reach_policy(noisy, 1).second;
  CHECK(noisy_prob > 0.0);
  CHECK(noisy_prob <= 1.0);
}

TEST_CASE("adaptive loop reaches the best progression") {
  for (const char* map : {"example3.map", "example3_no_orange.map"}) {
    auto p = example_product(0.0, map);
    for (RewardKind k : {RewardKind::AdaptiveProgression, RewardKind::AdaptiveHybrid}) {
      CAPTURE(map);
      CAPTURE(to_string(k));
      auto rep = theorem_check(p, k, 100, 0.1);
      CHECK(rep.ok());
      CHECK(rep.final_b == rep.b_star);
      CHECK(rep.b_star == best_progression(p));
      CHECK(rep.rounds <= p.task->partition.size());
      for (std::size_t i = 1; i < rep.iterations.size(); ++i)
        CHECK(rep.iterations[i].b <= rep.iterations[i - 1].b);
      auto j = nlohmann::json::parse(rep.json());
      CHECK(j["b_star"] == rep.b_star);
    }
  }
  CHECK_THROWS(theorem_check(example_product(), RewardKind::Hybrid, 100, 0.1));
}
