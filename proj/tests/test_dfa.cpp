#include "support/fixtures.hpp"
#include "support/formula_gen.hpp"
#include "support/lasso_oracle.hpp"

#include "ltlshape/dfa.hpp"

#include <doctest.h>

#include <set>

using namespace ltlshape;
using namespace testsupport;

namespace {

StateId run(const Dfa& d, const std::vector<Letter>& w) {
  StateId q = d.initial();
  for (Letter l : w)
    q = d.step(q, l);
  return q;
}

/// Table-filling distinguishability over reachable states.
std::size_t equivalence_classes(const Dfa& d) {
  const std::size_t n = d.size();
  std::vector<std::vector<char>> diff(n, std::vector<char>(n, 0));
  for (StateId p = 0; p < n; ++p)
    for (StateId q = 0; q < n; ++q)
      diff[p][q] = d.is_accepting(p) != d.is_accepting(q);
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId p = 0; p < n; ++p)
      for (StateId q = 0; q < n; ++q)
        if (!diff[p][q])
          for (Letter l = 0; l < d.alphabet_size(); ++l)
            if (diff[d.step(p, l)][d.step(q, l)]) {
              diff[p][q] = 1;
              changed = true;
              break;
            }
  }
  std::vector<char> seen(n, 0);
  std::size_t classes = 0;
  for (StateId p = 0; p < n; ++p) {
    if (seen[p])
      continue;
    ++classes;
    for (StateId q = p; q < n; ++q)
      if (!diff[p][q])
        seen[q] = 1;
  }
  return classes;
}

} // namespace

TEST_CASE("compiled automata accept exactly the good prefixes") {
  FormulaGenerator gen(2024);
  std::mt19937_64 pick(3);
  for (int i = 0; i < 150; ++i) {
    std::size_t ap_size = std::uniform_int_distribution<std::size_t>(1, 3)(pick);
    std::vector<std::string> names{"a", "b", "c"};
    names.resize(ap_size);
    PropositionSet ap(names);
    Formula f = gen(ap_size);
    CAPTURE(to_string(f, ap));
    Dfa d = minimize(compile(f, ap));
    GoodPrefixOracle oracle(f, ap_size);
    std::size_t mismatches = 0;
    for_each_trace(ap_size, 5, [&](const std::vector<Letter>& w) {
      mismatches += d.is_accepting(run(d, w)) != oracle.good(w);
    });
    CHECK(mismatches == 0);
  }
}

TEST_CASE("minimization preserves the language and is minimal") {
  FormulaGenerator gen(77);
  PropositionSet ap({"a", "b"});
  for (int i = 0; i < 100; ++i) {
    Formula f = gen(2);
    CAPTURE(to_string(f, ap));
    Dfa raw = compile(f, ap);
    Dfa m = minimize(raw);
    std::size_t mismatches = 0;
    for_each_trace(2, 6, [&](const std::vector<Letter>& w) {
      mismatches += raw.is_accepting(run(raw, w)) != m.is_accepting(run(m, w));
    });
    CHECK(mismatches == 0);
    CHECK(m.size() <= raw.size());
    CHECK(equivalence_classes(m) == m.size());
    CHECK(minimize(m) == m);
  }
}

TEST_CASE("example task automaton") {
  PropositionSet ap = example_ap();
  Dfa d = minimize(compile(parse(kExampleFormula, ap), ap));
  CHECK(d.size() == 5);
  auto reach = reachable_states(d, singleton_letters(ap));
  CHECK(reach.size() == 5);
  CHECK(d.accepting_states().size() == 1);

  // Agrees with the hand-built fixture on words of single flags.
  Dfa fx = fixture_dfa();
  auto singles = singleton_letters(ap);
  std::size_t mismatches = 0;
  for_each_trace(2, 6, [&](const std::vector<Letter>& code) {
    std::vector<Letter> w;
    bool usable = true;
    for (Letter c : code) {
      usable = usable && c < singles.size();
      if (usable)
        w.push_back(singles[c]);
    }
    if (usable)
      mismatches += d.is_accepting(run(d, w)) != fx.is_accepting(run(fx, w));
  });
  CHECK(mismatches == 0);
}

TEST_CASE("small formulas give the expected automata") {
  PropositionSet ap({"a"});
  Dfa fa = minimize(compile(parse("F a", ap), ap));
  CHECK(fa.size() == 2);
  CHECK_FALSE(fa.is_accepting(fa.initial()));
  CHECK(fa.is_accepting(fa.step(fa.initial(), 1)));

  Dfa t = minimize(compile(parse("true", ap), ap));
  CHECK(t.size() == 1);
  CHECK(t.is_accepting(t.initial()));

  Dfa f = minimize(compile(parse("false", ap), ap));
  CHECK(f.size() == 1);
  CHECK_FALSE(f.is_accepting(f.initial()));

  // Valid formula: every continuation satisfies it, so the empty prefix is good.
  Dfa v = minimize(compile(parse("F a | F !a", ap), ap));
  CHECK(v.is_accepting(v.initial()));

  PropositionSet abc({"a", "b", "c"});
  Dfa xs = compile(parse("X X X a", abc), abc);
  CHECK(minimize(xs).size() == 6);
}

TEST_CASE("state limit") {
  PropositionSet ap({"a"});
  CHECK_THROWS_AS(compile(parse("X X X X X a", ap), ap, CompileOptions{3}), StateLimitExceeded);
}

TEST_CASE("JSON round trip and validation") {
  Dfa fx = fixture_dfa();
  CHECK(dfa_from_json(to_json(fx)) == fx);
  CHECK(fx.names().size() == 5);
  CHECK_THROWS_AS(dfa_from_json("{"), DfaFormatError);
  CHECK_THROWS_AS(dfa_from_json(R"({"ap":["a"],"states":1,"initial":0,"accepting":[],"edges":[{"from":0,"letters":[0],"to":0}]})"),
                  DfaFormatError);
  CHECK_THROWS_AS(
      dfa_from_json(
          R"({"ap":["a"],"states":1,"initial":0,"accepting":[],"edges":[{"from":0,"letters":[0,1],"to":0},{"from":0,"letters":[1],"to":0}]})"),
      DfaFormatError);
  CHECK_THROWS_AS(Dfa(PropositionSet({"a"}), 1, 0, {}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(Dfa(PropositionSet({"a"}), 1, 0, {}, {0, 1}), std::invalid_argument);
  CHECK(to_dot(fx).find("doublecircle") != std::string::npos);
}

TEST_CASE("analysis of the fixture") {
  Dfa fx = fixture_dfa();
  DfaAnalysis a(fx);
  CHECK(a.count(0, 0) == 1);
  CHECK(a.count(0, 1) == 4);
  CHECK(a.count(0, 2) == 1);
  CHECK(a.count(0, 3) == 2);
  CHECK(a.count(0, 4) == 0);
  CHECK(a.count(1, 4) == 4);
  CHECK(a.is_trap(3));
  CHECK_FALSE(a.is_trap(0));
  CHECK(a.reaches_accepting(0));
  CHECK(a.reachable(0, 4));
  CHECK_FALSE(a.reachable(1, 2));
  CHECK(a.reachable(2, 2));
  // Rows sum to the alphabet size.
  for (StateId q = 0; q < fx.size(); ++q) {
    std::uint32_t total = 0;
    for (auto [t, c] : a.successors(q))
      total += c;
    CHECK(total == fx.alphabet_size());
  }
}

TEST_CASE("letters and letter maps") {
  PropositionSet ap({"o", "b", "y"});
  CHECK(ap.letter({"o", "y"}) == 0b101);
  CHECK(ap.format(0b011) == "{o,b}");
  CHECK(ap.format(0) == "{}");
  CHECK_FALSE(ap.index_of("z").has_value());
  auto singles = singleton_letters(ap);
  CHECK(std::set<Letter>(singles.begin(), singles.end()) == std::set<Letter>{0, 1, 2, 4});
  PropositionSet env({"b", "x", "o"});
  LetterMap m(env, ap);
  CHECK(m(0b111) == 0b011);
  CHECK(m(0b010) == 0);
}
