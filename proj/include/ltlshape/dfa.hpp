#pragma once

#include "ltlshape/formula.hpp"
#include "ltlshape/letter.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ltlshape {

using StateId = std::uint32_t;

/// Deterministic finite automaton over the alphabet 2^AP with an explicit,
/// total transition table (one entry per state and letter).
class Dfa {
public:
  Dfa() = default;
  /// `table` holds states * 2^|AP| successors, row-major by state.
  /// Throws std::invalid_argument when the table is not total or refers to
  /// unknown states.
  Dfa(PropositionSet ap, std::size_t states, StateId initial, std::vector<StateId> accepting,
      std::vector<StateId> table, std::vector<std::string> names = {});

  const PropositionSet& ap() const { return ap_; }
  std::size_t size() const { return accepting_.size(); }
  std::size_t alphabet_size() const { return ap_.alphabet_size(); }
  StateId initial() const { return initial_; }
  bool is_accepting(StateId q) const { return accepting_.at(q); }
  std::vector<StateId> accepting_states() const;

  StateId step(StateId q, Letter l) const { return table_[std::size_t{q} * alphabet_size() + l]; }
  std::span<const StateId> row(StateId q) const {
    return {table_.data() + std::size_t{q} * alphabet_size(), alphabet_size()};
  }

  /// Optional per-state display names (residual formulas for compiled DFAs).
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const Dfa& o) const {
    return ap_ == o.ap_ && initial_ == o.initial_ && accepting_ == o.accepting_ && table_ == o.table_;
  }

private:
  PropositionSet ap_;
  StateId initial_ = 0;
  std::vector<bool> accepting_;
  std::vector<StateId> table_;
  std::vector<std::string> names_;
};

class StateLimitExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CompileOptions {
  std::size_t max_states = 10'000;
};

/// Builds the good-prefix automaton of a co-safe formula by exploring its
/// progression residuals. Residual `true` is the single accepting state
/// and `false` the trap. Residuals from which every continuation reaches
/// `true` are merged into the accepting state; residuals that cannot reach
/// it are merged into the trap.
Dfa compile(const Formula& f, const PropositionSet& ap, CompileOptions opts = {});

/// Language-preserving minimization (Hopcroft partition refinement).
/// Unreachable states are dropped and the result is numbered in
/// breadth-first order from the initial state, so minimize is a fixpoint.
Dfa minimize(const Dfa& d);

/// States reachable from the initial state using only the given letters.
std::vector<StateId> reachable_states(const Dfa& d, std::span<const Letter> letters);

/// Letters of the form {} and {p} for each proposition p.
std::vector<Letter> singleton_letters(const PropositionSet& ap);

/// Structural facts about a DFA's transition graph.
class DfaAnalysis {
public:
  explicit DfaAnalysis(const Dfa& d);

  std::size_t size() const { return succ_.size(); }
  std::size_t ap_size() const { return ap_size_; }
  std::size_t alphabet_size() const { return std::size_t{1} << ap_size_; }
  /// Distinct successors of q with the number of letters leading there.
  std::span<const std::pair<StateId, std::uint32_t>> successors(StateId q) const { return succ_.at(q); }
  /// |delta_{q,q'}|: number of letters moving q to q'.
  std::uint32_t count(StateId q, StateId q2) const;
  /// Reflexive-transitive reachability q ->* q'.
  bool reachable(StateId q, StateId q2) const { return reach_[q][q2]; }
  bool is_accepting(StateId q) const { return accepting_[q]; }
  bool reaches_accepting(StateId q) const { return reaches_accepting_[q]; }
  bool is_trap(StateId q) const { return !reaches_accepting_[q]; }

private:
  std::size_t ap_size_ = 0;
  std::vector<std::vector<std::pair<StateId, std::uint32_t>>> succ_;
  std::vector<std::vector<bool>> reach_;
  std::vector<bool> accepting_;
  std::vector<bool> reaches_accepting_;
};

class DfaFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Canonical JSON: {"ap": [...], "states": n, "initial": i, "accepting": [...],
/// "edges": [{"from": q, "letters": [...], "to": q'}]}. Edges are grouped by
/// (from, to) and sorted; letters ascending.
std::string to_json(const Dfa& d);
/// Inverse of to_json. Throws DfaFormatError on malformed input or when a
/// (state, letter) pair is missing or mapped twice.
Dfa dfa_from_json(std::string_view text);
/// Graphviz rendering; accepting states drawn as double circles.
std::string to_dot(const Dfa& d);

} // namespace ltlshape
