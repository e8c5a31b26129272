#pragma once

// Good-prefix semantics computed from scratch over ultimately periodic
// words. Nothing here uses progression or the automaton code.

#include "ltlshape/formula.hpp"

#include <map>
#include <set>
#include <vector>

namespace testsupport {

using ltlshape::Formula;
using ltlshape::FormulaKind;
using ltlshape::Letter;

/// A formula flattened into post-order; children always precede parents.
struct FlatFormula {
  struct Node {
    FormulaKind kind;
    std::size_t prop = 0;
    std::vector<std::size_t> kids;
  };
  std::vector<Node> nodes;
  std::size_t root() const { return nodes.size() - 1; }

  explicit FlatFormula(const Formula& f) { add(f); }

private:
  std::size_t add(const Formula& f) {
    Node n{f.kind(), 0, {}};
    if (f.kind() == FormulaKind::Atom || f.kind() == FormulaKind::NegAtom)
      n.prop = f.prop();
    for (const auto& c : f.children())
      n.kids.push_back(add(c));
    nodes.push_back(std::move(n));
    return nodes.size() - 1;
  }
};

using Vec = std::vector<char>;

/// Truth of every subformula at a position, given the letter there and the
/// truth vector one position later.
inline Vec step_back(const FlatFormula& f, Letter l, const Vec& later) {
  Vec v(f.nodes.size(), 0);
  for (std::size_t i = 0; i < f.nodes.size(); ++i) {
    const auto& n = f.nodes[i];
    switch (n.kind) {
    case FormulaKind::True: v[i] = 1; break;
    case FormulaKind::False: v[i] = 0; break;
    case FormulaKind::Atom: v[i] = (l >> n.prop) & 1u; break;
    case FormulaKind::NegAtom: v[i] = !((l >> n.prop) & 1u); break;
    case FormulaKind::And: {
      char all = 1;
      for (auto k : n.kids)
        all = all && v[k];
      v[i] = all;
      break;
    }
    case FormulaKind::Or: {
      char any = 0;
      for (auto k : n.kids)
        any = any || v[k];
      v[i] = any;
      break;
    }
    case FormulaKind::Next: v[i] = later[n.kids[0]]; break;
    case FormulaKind::Until: v[i] = v[n.kids[1]] || (v[n.kids[0]] && later[i]); break;
    case FormulaKind::Eventually: v[i] = v[n.kids[0]] || later[i]; break;
    }
  }
  return v;
}

/// Truth vector at position 0 of the word w[0..loop) (w[loop..n))^omega.
/// Eventualities take the least fixpoint: start from all-false and sweep
/// backwards until nothing changes.
inline Vec lasso_vector(const FlatFormula& f, const std::vector<Letter>& w, std::size_t loop) {
  const std::size_t n = w.size();
  std::vector<Vec> at(n, Vec(f.nodes.size(), 0));
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = n; i-- > 0;) {
      const Vec& later = at[i + 1 < n ? i + 1 : loop];
      Vec v = step_back(f, w[i], later);
      if (v != at[i]) {
        at[i] = std::move(v);
        changed = true;
      }
    }
  }
  return at[0];
}

/// Decides good prefixes: u is good iff every continuation satisfies the
/// formula. Continuations range over lassos x.y^omega with |x|+|y| <= bound.
class GoodPrefixOracle {
public:
  GoodPrefixOracle(const Formula& f, std::size_t ap_size, std::size_t bound = 4) : flat_(f), letters_(1u << ap_size) {
    std::set<Vec> seen;
    std::vector<Letter> w;
    for (std::size_t n = 1; n <= bound; ++n) {
      w.assign(n, 0);
      for (std::size_t code = 0; code < pow(letters_, n); ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i, c /= letters_)
          w[i] = static_cast<Letter>(c % letters_);
        for (std::size_t loop = 0; loop < n; ++loop)
          seen.insert(lasso_vector(flat_, w, loop));
      }
    }
    continuations_.assign(seen.begin(), seen.end());
    sets_.push_back(continuations_);
    index_[continuations_] = 0;
    table_.emplace_back(letters_, kUnknown);
  }

  std::size_t continuation_count() const { return continuations_.size(); }

  /// Verdict for a finite prefix.
  bool good(const std::vector<Letter>& u) {
    std::size_t id = 0;
    for (std::size_t i = u.size(); i-- > 0;)
      id = prepend(id, u[i]);
    return verdict(id);
  }

private:
  static constexpr std::size_t kUnknown = static_cast<std::size_t>(-1);

  static std::size_t pow(std::size_t b, std::size_t e) {
    std::size_t r = 1;
    while (e--)
      r *= b;
    return r;
  }

  std::size_t prepend(std::size_t id, Letter l) {
    if (table_[id][l] != kUnknown)
      return table_[id][l];
    std::set<Vec> next;
    for (const auto& v : sets_[id])
      next.insert(step_back(flat_, l, v));
    std::vector<Vec> key(next.begin(), next.end());
    auto [it, fresh] = index_.try_emplace(key, sets_.size());
    if (fresh) {
      sets_.push_back(key);
      table_.emplace_back(letters_, kUnknown);
    }
    table_[id][l] = it->second;
    return it->second;
  }

  bool verdict(std::size_t id) const {
    for (const auto& v : sets_[id])
      if (!v[flat_.root()])
        return false;
    return true;
  }

  FlatFormula flat_;
  std::size_t letters_;
  std::vector<Vec> continuations_;
  std::vector<std::vector<Vec>> sets_;
  std::map<std::vector<Vec>, std::size_t> index_;
  std::vector<std::vector<std::size_t>> table_;
};

/// Every word of length <= max_len over 2^ap_size letters, shortest first.
template <class Fn> void for_each_trace(std::size_t ap_size, std::size_t max_len, Fn&& fn) {
  const std::size_t letters = std::size_t{1} << ap_size;
  std::vector<Letter> w;
  for (std::size_t n = 0; n <= max_len; ++n) {
    w.assign(n, 0);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i)
      total *= letters;
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= letters)
        w[i] = static_cast<Letter>(c % letters);
      fn(w);
    }
  }
}

} // namespace testsupport
