#include "ltlshape/dfa.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

namespace ltlshape {

using nlohmann::json;

Dfa::Dfa(PropositionSet ap, std::size_t states, StateId initial, std::vector<StateId> accepting,
         std::vector<StateId> table, std::vector<std::string> names)
    : ap_(std::move(ap)), initial_(initial), accepting_(states, false), table_(std::move(table)),
      names_(std::move(names)) {
  if (states == 0)
    throw std::invalid_argument("a DFA needs at least one state");
  if (initial >= states)
    throw std::invalid_argument("initial state out of range");
  if (table_.size() != states * ap_.alphabet_size())
    throw std::invalid_argument("transition table is not total");
  for (StateId t : table_)
    if (t >= states)
      throw std::invalid_argument("transition to unknown state " + std::to_string(t));
  for (StateId q : accepting) {
    if (q >= states)
      throw std::invalid_argument("accepting state out of range");
    accepting_[q] = true;
  }
  if (!names_.empty() && names_.size() != states)
    throw std::invalid_argument("state names must match the state count");
}

std::vector<StateId> Dfa::accepting_states() const {
  std::vector<StateId> out;
  for (StateId q = 0; q < size(); ++q)
    if (accepting_[q])
      out.push_back(q);
  return out;
}

// ---------------------------------------------------------------------------
// Compilation

namespace {

// Renumbers the states reachable from `initial` in BFS order (letters
// ascending). `succ(q, l)` gives successors in the old numbering.
template <typename Succ>
std::vector<StateId> bfs_order(std::size_t n, std::size_t alphabet, StateId initial, Succ succ) {
  constexpr StateId kUnseen = ~StateId{0};
  std::vector<StateId> order;
  std::vector<StateId> id(n, kUnseen);
  id[initial] = 0;
  order.push_back(initial);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (Letter l = 0; l < alphabet; ++l) {
      StateId t = succ(order[i], l);
      if (id[t] == kUnseen) {
        id[t] = static_cast<StateId>(order.size());
        order.push_back(t);
      }
    }
  }
  return order;
}

} // namespace

Dfa compile(const Formula& f, const PropositionSet& ap, CompileOptions opts) {
  const std::size_t alphabet = ap.alphabet_size();
  std::vector<Formula> residuals;
  std::unordered_map<std::string, StateId> ids;
  std::vector<StateId> table;

  auto intern = [&](const Formula& r) {
    auto [it, fresh] = ids.try_emplace(r.key(), static_cast<StateId>(residuals.size()));
    if (fresh) {
      if (residuals.size() >= opts.max_states)
        throw StateLimitExceeded("formula needs more than " + std::to_string(opts.max_states) + " automaton states");
      residuals.push_back(r);
    }
    return it->second;
  };

  intern(simplify(f));
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    Formula cur = residuals[i];
    for (Letter l = 0; l < alphabet; ++l)
      table.push_back(intern(progress(cur, l)));
  }
  const std::size_t n = residuals.size();
  auto succ = [&](StateId q, Letter l) { return table[std::size_t{q} * alphabet + l]; };

  // States with an infinite path that never reaches `true` (greatest
  // fixpoint). Everything else is universal: all continuations accept.
  std::vector<bool> avoids(n);
  for (std::size_t q = 0; q < n; ++q)
    avoids[q] = !residuals[q].is_true();
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId q = 0; q < n; ++q) {
      if (!avoids[q])
        continue;
      bool keep = false;
      for (Letter l = 0; l < alphabet && !keep; ++l)
        keep = avoids[succ(q, l)];
      if (!keep) {
        avoids[q] = false;
        changed = true;
      }
    }
  }

  // Backward reachability of the universal states.
  std::vector<std::vector<StateId>> preds(n);
  for (StateId q = 0; q < n; ++q)
    for (Letter l = 0; l < alphabet; ++l)
      preds[succ(q, l)].push_back(q);
  std::vector<bool> live(n, false);
  std::deque<StateId> work;
  for (StateId q = 0; q < n; ++q)
    if (!avoids[q]) {
      live[q] = true;
      work.push_back(q);
    }
  while (!work.empty()) {
    StateId q = work.front();
    work.pop_front();
    for (StateId p : preds[q])
      if (!live[p]) {
        live[p] = true;
        work.push_back(p);
      }
  }

  // Quotient: universal -> accept sink, dead -> trap sink.
  const StateId kAccept = static_cast<StateId>(n);
  const StateId kTrap = static_cast<StateId>(n + 1);
  auto cls = [&](StateId q) -> StateId {
    if (!avoids[q])
      return kAccept;
    if (!live[q])
      return kTrap;
    return q;
  };
  auto qsucc = [&](StateId q, Letter l) -> StateId {
    if (q == kAccept || q == kTrap)
      return q;
    return cls(succ(q, l));
  };
  auto order = bfs_order(n + 2, alphabet, cls(0), qsucc);

  std::vector<StateId> id(n + 2, 0);
  for (std::size_t i = 0; i < order.size(); ++i)
    id[order[i]] = static_cast<StateId>(i);
  std::vector<StateId> out_table;
  out_table.reserve(order.size() * alphabet);
  std::vector<StateId> accepting;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < order.size(); ++i) {
    StateId q = order[i];
    for (Letter l = 0; l < alphabet; ++l)
      out_table.push_back(id[qsucc(q, l)]);
    if (q == kAccept) {
      accepting.push_back(static_cast<StateId>(i));
      names.emplace_back("true");
    } else if (q == kTrap) {
      names.emplace_back("false");
    } else {
      names.push_back(to_string(residuals[q], ap));
    }
  }
  return Dfa(ap, order.size(), 0, std::move(accepting), std::move(out_table), std::move(names));
}

// ---------------------------------------------------------------------------
// Minimization

Dfa minimize(const Dfa& d) {
  const std::size_t alphabet = d.alphabet_size();
  // Restrict to reachable states first.
  auto order = bfs_order(d.size(), alphabet, d.initial(), [&](StateId q, Letter l) { return d.step(q, l); });
  const std::size_t n = order.size();
  std::vector<StateId> local(d.size(), 0);
  for (std::size_t i = 0; i < n; ++i)
    local[order[i]] = static_cast<StateId>(i);
  std::vector<StateId> delta(n * alphabet);
  for (std::size_t i = 0; i < n; ++i)
    for (Letter l = 0; l < alphabet; ++l)
      delta[i * alphabet + l] = local[d.step(order[i], l)];

  // Inverse transitions in CSR form, per letter.
  std::vector<std::size_t> inv_start((n + 1) * alphabet + 1, 0);
  std::vector<StateId> inv;
  {
    std::vector<std::size_t> cnt(n * alphabet, 0);
    for (std::size_t s = 0; s < n; ++s)
      for (Letter l = 0; l < alphabet; ++l)
        ++cnt[l * n + delta[s * alphabet + l]];
    inv_start.assign(n * alphabet + 1, 0);
    for (std::size_t i = 0; i < n * alphabet; ++i)
      inv_start[i + 1] = inv_start[i] + cnt[i];
    inv.resize(inv_start.back());
    std::vector<std::size_t> fill(inv_start.begin(), inv_start.end() - 1);
    for (std::size_t s = 0; s < n; ++s)
      for (Letter l = 0; l < alphabet; ++l)
        inv[fill[l * n + delta[s * alphabet + l]]++] = static_cast<StateId>(s);
  }

  std::vector<std::vector<StateId>> blocks;
  std::vector<std::size_t> block_of(n);
  {
    std::vector<StateId> acc, rej;
    for (std::size_t s = 0; s < n; ++s)
      (d.is_accepting(order[s]) ? acc : rej).push_back(static_cast<StateId>(s));
    for (auto* b : {&acc, &rej})
      if (!b->empty()) {
        for (StateId s : *b)
          block_of[s] = blocks.size();
        blocks.push_back(std::move(*b));
      }
  }

  std::deque<std::pair<std::size_t, Letter>> work;
  std::vector<std::vector<bool>> queued;
  auto enqueue = [&](std::size_t b, Letter l) {
    if (queued.size() <= b)
      queued.resize(b + 1, std::vector<bool>(alphabet, false));
    if (!queued[b][l]) {
      queued[b][l] = true;
      work.emplace_back(b, l);
    }
  };
  {
    std::size_t smallest = 0;
    for (std::size_t b = 1; b < blocks.size(); ++b)
      if (blocks[b].size() < blocks[smallest].size())
        smallest = b;
    for (Letter l = 0; l < alphabet; ++l)
      enqueue(smallest, l);
  }

  std::vector<char> marked(n, 0);
  std::map<std::size_t, std::vector<StateId>> touched;
  while (!work.empty()) {
    auto [splitter, l] = work.front();
    work.pop_front();
    queued[splitter][l] = false;

    touched.clear();
    for (StateId t : blocks[splitter])
      for (std::size_t k = inv_start[l * n + t]; k < inv_start[l * n + t + 1]; ++k) {
        StateId s = inv[k];
        if (!marked[s]) {
          marked[s] = 1;
          touched[block_of[s]].push_back(s);
        }
      }

    for (auto& [b, hit] : touched) {
      if (hit.size() < blocks[b].size()) {
        std::vector<StateId> rest;
        for (StateId s : blocks[b])
          if (!marked[s])
            rest.push_back(s);
        std::size_t nb = blocks.size();
        blocks[b] = std::move(rest);
        for (StateId s : hit)
          block_of[s] = nb;
        blocks.push_back(hit);
        for (Letter c = 0; c < alphabet; ++c) {
          bool was_queued = queued.size() > b && queued[b][c];
          if (was_queued || blocks[nb].size() <= blocks[b].size())
            enqueue(nb, c);
          else
            enqueue(b, c);
        }
      }
      for (StateId s : hit)
        marked[s] = 0;
    }
  }

  // Quotient renumbered breadth-first.
  auto qorder = bfs_order(blocks.size(), alphabet, static_cast<StateId>(block_of[0]), [&](StateId b, Letter l) {
    return static_cast<StateId>(block_of[delta[std::size_t{blocks[b].front()} * alphabet + l]]);
  });
  std::vector<StateId> bid(blocks.size());
  for (std::size_t i = 0; i < qorder.size(); ++i)
    bid[qorder[i]] = static_cast<StateId>(i);
  std::vector<StateId> table;
  std::vector<StateId> accepting;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < qorder.size(); ++i) {
    const auto& blk = blocks[qorder[i]];
    StateId rep = *std::min_element(blk.begin(), blk.end());
    for (Letter l = 0; l < alphabet; ++l)
      table.push_back(bid[block_of[delta[std::size_t{rep} * alphabet + l]]]);
    if (d.is_accepting(order[rep]))
      accepting.push_back(static_cast<StateId>(i));
    if (!d.names().empty())
      names.push_back(d.names()[order[rep]]);
  }
  return Dfa(d.ap(), qorder.size(), 0, std::move(accepting), std::move(table), std::move(names));
}

std::vector<StateId> reachable_states(const Dfa& d, std::span<const Letter> letters) {
  std::vector<bool> seen(d.size(), false);
  std::vector<StateId> out{d.initial()};
  seen[d.initial()] = true;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (Letter l : letters) {
      StateId t = d.step(out[i], l);
      if (!seen[t]) {
        seen[t] = true;
        out.push_back(t);
      }
    }
  return out;
}

std::vector<Letter> singleton_letters(const PropositionSet& ap) {
  std::vector<Letter> out{0};
  for (std::size_t i = 0; i < ap.size(); ++i)
    out.push_back(Letter{1} << i);
  return out;
}

// ---------------------------------------------------------------------------
// Analysis

DfaAnalysis::DfaAnalysis(const Dfa& d)
    : ap_size_(d.ap().size()), succ_(d.size()), reach_(d.size(), std::vector<bool>(d.size(), false)),
      accepting_(d.size()), reaches_accepting_(d.size(), false) {
  const std::size_t n = d.size();
  for (StateId q = 0; q < n; ++q) {
    accepting_[q] = d.is_accepting(q);
    std::map<StateId, std::uint32_t> counts;
    for (StateId t : d.row(q))
      ++counts[t];
    succ_[q].assign(counts.begin(), counts.end());
  }
  for (StateId q = 0; q < n; ++q) {
    std::vector<StateId> stack{q};
    reach_[q][q] = true;
    while (!stack.empty()) {
      StateId s = stack.back();
      stack.pop_back();
      for (auto [t, c] : succ_[s])
        if (!reach_[q][t]) {
          reach_[q][t] = true;
          stack.push_back(t);
        }
    }
  }
  for (StateId q = 0; q < n; ++q)
    for (StateId f = 0; f < n && !reaches_accepting_[q]; ++f)
      reaches_accepting_[q] = accepting_[f] && reach_[q][f];
}

std::uint32_t DfaAnalysis::count(StateId q, StateId q2) const {
  for (auto [t, c] : succ_.at(q))
    if (t == q2)
      return c;
  return 0;
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_json(const Dfa& d) {
  json j;
  j["ap"] = d.ap().names();
  j["states"] = d.size();
  j["initial"] = d.initial();
  j["accepting"] = d.accepting_states();
  json edges = json::array();
  for (StateId q = 0; q < d.size(); ++q) {
    std::map<StateId, std::vector<Letter>> by_target;
    for (Letter l = 0; l < d.alphabet_size(); ++l)
      by_target[d.step(q, l)].push_back(l);
    for (auto& [t, letters] : by_target)
      edges.push_back({{"from", q}, {"letters", letters}, {"to", t}});
  }
  j["edges"] = std::move(edges);
  if (!d.names().empty())
    j["names"] = d.names();
  return j.dump(2);
}

Dfa dfa_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DfaFormatError(std::string("malformed DFA document: ") + e.what());
  }
  try {
    PropositionSet ap(j.at("ap").get<std::vector<std::string>>());
    auto n = j.at("states").get<std::size_t>();
    auto initial = j.at("initial").get<StateId>();
    auto accepting = j.at("accepting").get<std::vector<StateId>>();
    const std::size_t alphabet = ap.alphabet_size();
    constexpr StateId kUnset = ~StateId{0};
    std::vector<StateId> table(n * alphabet, kUnset);
    for (const auto& e : j.at("edges")) {
      auto from = e.at("from").get<StateId>();
      auto to = e.at("to").get<StateId>();
      if (from >= n || to >= n)
        throw DfaFormatError("edge refers to unknown state");
      for (auto l : e.at("letters").get<std::vector<Letter>>()) {
        if (l >= alphabet)
          throw DfaFormatError("letter " + std::to_string(l) + " outside the alphabet");
        auto& slot = table[std::size_t{from} * alphabet + l];
        if (slot != kUnset)
          throw DfaFormatError("state " + std::to_string(from) + " maps letter " + std::to_string(l) + " twice");
        slot = to;
      }
    }
    for (std::size_t i = 0; i < table.size(); ++i)
      if (table[i] == kUnset)
        throw DfaFormatError("transition function is not total: state " + std::to_string(i / alphabet) +
                             " has no successor for letter " + std::to_string(i % alphabet));
    std::vector<std::string> names;
    if (j.contains("names"))
      names = j.at("names").get<std::vector<std::string>>();
    return Dfa(std::move(ap), n, initial, std::move(accepting), std::move(table), std::move(names));
  } catch (const json::exception& e) {
    throw DfaFormatError(std::string("malformed DFA document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DfaFormatError(e.what());
  }
}

std::string to_dot(const Dfa& d) {
  std::ostringstream os;
  os << "digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n";
  for (StateId q = 0; q < d.size(); ++q) {
    os << "  q" << q << " [shape=" << (d.is_accepting(q) ? "doublecircle" : "circle");
    os << ", label=\"q" << q << "\"";
    if (!d.names().empty()) {
      std::string tip;
      for (char c : d.names()[q])
        tip += c == '"' ? std::string("\\\"") : std::string(1, c);
      os << ", tooltip=\"" << tip << "\"";
    }
    os << "];\n";
  }
  os << "  __start -> q" << d.initial() << ";\n";
  for (StateId q = 0; q < d.size(); ++q) {
    std::map<StateId, std::vector<Letter>> by_target;
    for (Letter l = 0; l < d.alphabet_size(); ++l)
      by_target[d.step(q, l)].push_back(l);
    for (auto& [t, letters] : by_target) {
      os << "  q" << q << " -> q" << t << " [label=\"";
      for (std::size_t i = 0; i < letters.size(); ++i)
        os << (i ? " " : "") << d.ap().format(letters[i]);
      os << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

} // namespace ltlshape
