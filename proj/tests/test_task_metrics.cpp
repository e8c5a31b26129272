#include "support/fixtures.hpp"
#include "support/formula_gen.hpp"

#include "ltlshape/task_metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace ltlshape;
using namespace testsupport;

namespace {

/// Floyd-Warshall over letter counts read straight from the table.
std::vector<double> reference_distances(const Dfa& d) {
  const std::size_t n = d.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, inf));
  for (StateId q = 0; q < n; ++q) {
    std::vector<int> count(n, 0);
    for (Letter l = 0; l < d.alphabet_size(); ++l)
      ++count[d.step(q, l)];
    w[q][q] = 0.0;
    for (StateId t = 0; t < n; ++t)
      if (t != q && count[t] > 0 && !d.is_accepting(q))
        w[q][t] = double(d.ap().size()) - std::log2(double(count[t]));
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        w[i][j] = std::min(w[i][j], w[i][k] + w[k][j]);
  std::vector<double> out(n, inf);
  for (StateId q = 0; q < n; ++q)
    for (StateId a = 0; a < n; ++a)
      if (d.is_accepting(a))
        out[q] = std::min(out[q], w[q][a]);
  for (auto& v : out)
    if (v == inf)
      v = double(d.ap().size() * n);
  return out;
}

} // namespace

TEST_CASE("fixture distances") {
  auto task = fixture_task();
  CHECK(task->base.values == std::vector<double>{2, 1, 1, 15, 0});
  CHECK(task->base.round == 0);
  CHECK(task->base.max() == 15);
  CHECK(difficulty(task->analysis, 0, 1) == 1.0);
  CHECK(difficulty(task->analysis, 0, 2) == 3.0);
  CHECK(difficulty(task->analysis, 1, 4) == 1.0);
  CHECK_THROWS_AS(difficulty(task->analysis, 0, 4), std::invalid_argument);
}

TEST_CASE("fixture partition") {
  auto task = fixture_task();
  const auto& p = task->partition;
  REQUIRE(p.size() == 4);
  CHECK(p.set(0) == std::vector<StateId>{4});
  CHECK(p.set(1) == std::vector<StateId>{1, 2});
  CHECK(p.set(2) == std::vector<StateId>{0});
  CHECK(p.set(3) == std::vector<StateId>{3});
  CHECK(p.index_of(0) == 2);
  CHECK(p.index_of(3) == 3);
}

TEST_CASE("fixture progression") {
  auto task = fixture_task();
  const auto& t = task->base;
  const auto& a = task->analysis;
  CHECK(progression(t, a, 0, 1) == 1.0);
  CHECK(progression(t, a, 0, 2) == 1.0);
  CHECK(progression(t, a, 1, 4) == 1.0);
  CHECK(progression(t, a, 0, 3) == 0.0);
  CHECK(progression(t, a, 0, 0) == 0.0);
  CHECK(progression(t, a, 0, 4) == 0.0); // no direct transition
  CHECK(task->progression_sum() == 4.0);
}

TEST_CASE("distance update rule") {
  auto task = fixture_task();
  auto d1 = update_distances(task->base, task->partition, 1, 100.0);
  CHECK(d1.values == std::vector<double>{102, 101, 101, 115, 0});
  CHECK(d1.round == 1);
  auto d2 = update_distances(d1, task->partition, 0, 100.0);
  CHECK(d2.values == std::vector<double>{202, 201, 201, 215, 100});
  auto same = update_distances(task->base, task->partition, 4, 100.0);
  CHECK(same.values == task->base.values);
  CHECK_THROWS_AS(update_distances(task->base, task->partition, 5, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(update_distances(task->base, task->partition, 1, 1.0), std::invalid_argument);
}

TEST_CASE("distances agree with an all-pairs reference on random tasks") {
  FormulaGenerator gen(99);
  PropositionSet ap({"a", "b", "c"});
  for (int i = 0; i < 200; ++i) {
    Formula f = gen(3);
    CAPTURE(to_string(f, ap));
    TaskModel task(minimize(compile(f, ap)));
    auto ref = reference_distances(task.dfa);
    for (StateId q = 0; q < task.dfa.size(); ++q)
      CHECK(task.base[q] == doctest::Approx(ref[q]).epsilon(1e-12));

    // Partition: accepting first, then strictly increasing distance.
    const auto& p = task.partition;
    for (StateId q : p.set(0))
      CHECK(task.dfa.is_accepting(q));
    for (std::size_t k = 2; k < p.size(); ++k)
      CHECK(task.base[p.set(k - 1).front()] < task.base[p.set(k).front()]);

    // Progression is non-negative and vanishes inside strongly connected parts.
    for (StateId q = 0; q < task.dfa.size(); ++q)
      for (auto [t, c] : task.analysis.successors(q)) {
        double r = progression(task.base, task.analysis, q, t);
        CHECK(r >= 0.0);
        if (task.analysis.reachable(t, q))
          CHECK(r == 0.0);
      }
  }
}
