#include "ltlshape/formula.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace ltlshape {

struct Formula::Node {
  FormulaKind kind;
  std::size_t prop = 0;
  std::vector<Formula> children;
  std::string key;
  bool temporal = false;
  std::size_t size = 1;
};

namespace {

const char* kind_tag(FormulaKind k) {
  switch (k) {
  case FormulaKind::And: return "&";
  case FormulaKind::Or: return "|";
  case FormulaKind::Next: return "X";
  case FormulaKind::Until: return "U";
  case FormulaKind::Eventually: return "F";
  default: return "?";
  }
}

bool is_temporal_kind(FormulaKind k) {
  return k == FormulaKind::Next || k == FormulaKind::Until || k == FormulaKind::Eventually;
}

} // namespace

Formula Formula::make(FormulaKind k, std::size_t prop, std::vector<Formula> children) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->prop = prop;
  n->children = std::move(children);
  switch (k) {
  case FormulaKind::True: n->key = "true"; break;
  case FormulaKind::False: n->key = "false"; break;
  case FormulaKind::Atom: n->key = "#" + std::to_string(prop); break;
  case FormulaKind::NegAtom: n->key = "!#" + std::to_string(prop); break;
  default: {
    std::size_t len = 3;
    for (const auto& c : n->children)
      len += c.key().size() + 1;
    n->key.reserve(len);
    n->key += kind_tag(k);
    n->key += '(';
    for (std::size_t i = 0; i < n->children.size(); ++i) {
      if (i)
        n->key += ',';
      n->key += n->children[i].key();
    }
    n->key += ')';
  }
  }
  n->temporal = is_temporal_kind(k);
  for (const auto& c : n->children) {
    n->temporal = n->temporal || c.temporal();
    n->size += c.size();
  }
  return Formula(std::move(n));
}

Formula Formula::truth() {
  static const Formula t = make(FormulaKind::True, 0, {});
  return t;
}
Formula Formula::falsity() {
  static const Formula f = make(FormulaKind::False, 0, {});
  return f;
}
Formula Formula::atom(std::size_t prop) { return make(FormulaKind::Atom, prop, {}); }
Formula Formula::neg_atom(std::size_t prop) { return make(FormulaKind::NegAtom, prop, {}); }

Formula Formula::conj(std::vector<Formula> children) {
  if (children.empty())
    return truth();
  if (children.size() == 1)
    return children.front();
  return make(FormulaKind::And, 0, std::move(children));
}

Formula Formula::disj(std::vector<Formula> children) {
  if (children.empty())
    return falsity();
  if (children.size() == 1)
    return children.front();
  return make(FormulaKind::Or, 0, std::move(children));
}

Formula Formula::next(Formula sub) { return make(FormulaKind::Next, 0, {std::move(sub)}); }
Formula Formula::until(Formula lhs, Formula rhs) {
  return make(FormulaKind::Until, 0, {std::move(lhs), std::move(rhs)});
}
Formula Formula::eventually(Formula sub) { return make(FormulaKind::Eventually, 0, {std::move(sub)}); }

FormulaKind Formula::kind() const { return node_->kind; }
std::size_t Formula::prop() const { return node_->prop; }
std::span<const Formula> Formula::children() const { return node_->children; }
const std::string& Formula::key() const { return node_->key; }
bool Formula::temporal() const { return node_->temporal; }
std::size_t Formula::size() const { return node_->size; }

// ---------------------------------------------------------------------------
// Parsing

ParseError::ParseError(std::size_t position, std::string message, std::vector<std::string> expected)
    : std::runtime_error([&] {
        std::string m = "at position " + std::to_string(position) + ": " + message;
        if (!expected.empty()) {
          m += " (expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i)
              m += i + 1 == expected.size() ? " or " : ", ";
            m += expected[i];
          }
          m += ")";
        }
        return m;
      }()),
      position_(position), expected_(std::move(expected)) {}

namespace {

enum class Tok { Ident, Not, And, Or, LParen, RParen, Next, Until, Eventually, True, False, End };

struct Token {
  Tok type;
  std::size_t pos;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    switch (c) {
    case '!': out.push_back({Tok::Not, start, "!"}); ++i; continue;
    case '&': out.push_back({Tok::And, start, "&"}); ++i; continue;
    case '|': out.push_back({Tok::Or, start, "|"}); ++i; continue;
    case '(': out.push_back({Tok::LParen, start, "("}); ++i; continue;
    case ')': out.push_back({Tok::RParen, start, ")"}); ++i; continue;
    default: break;
    }
    if (std::isalpha(c) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
        ++i;
      std::string word(s.substr(start, i - start));
      Tok t = Tok::Ident;
      if (word == "X")
        t = Tok::Next;
      else if (word == "U")
        t = Tok::Until;
      else if (word == "F")
        t = Tok::Eventually;
      else if (word == "true")
        t = Tok::True;
      else if (word == "false")
        t = Tok::False;
      out.push_back({t, start, std::move(word)});
      continue;
    }
    throw ParseError(start, std::string("unexpected character '") + static_cast<char>(c) + "'");
  }
  out.push_back({Tok::End, s.size(), ""});
  return out;
}

class Parser {
public:
  Parser(std::vector<Token> toks, const PropositionSet& props) : toks_(std::move(toks)), props_(props) {}

  Formula parse_all() {
    Formula f = parse_or();
    if (peek().type != Tok::End)
      throw ParseError(peek().pos, "unexpected '" + peek().text + "'", {"'&'", "'|'", "'U'", "end of input"});
    return f;
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (peek().type == Tok::Or) {
      take();
      lhs = Formula::disj({lhs, parse_and()});
    }
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_until();
    while (peek().type == Tok::And) {
      take();
      lhs = Formula::conj({lhs, parse_until()});
    }
    return lhs;
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (peek().type == Tok::Until) {
      take();
      return Formula::until(lhs, parse_until());
    }
    return lhs;
  }

  Formula parse_unary() {
    const Token& t = peek();
    switch (t.type) {
    case Tok::Not: {
      take();
      std::size_t at = t.pos;
      Formula sub = parse_unary();
      switch (sub.kind()) {
      case FormulaKind::Atom: return Formula::neg_atom(sub.prop());
      case FormulaKind::True: return Formula::falsity();
      case FormulaKind::False: return Formula::truth();
      default: throw ParseError(at, "negation may only be applied to an atomic proposition");
      }
    }
    case Tok::Next: take(); return Formula::next(parse_unary());
    case Tok::Eventually: take(); return Formula::eventually(parse_unary());
    default: return parse_primary();
    }
  }

  Formula parse_primary() {
    const Token& t = take();
    switch (t.type) {
    case Tok::LParen: {
      Formula f = parse_or();
      if (peek().type != Tok::RParen)
        throw ParseError(peek().pos, "unbalanced parenthesis", {"')'"});
      take();
      return f;
    }
    case Tok::True: return Formula::truth();
    case Tok::False: return Formula::falsity();
    case Tok::Ident: {
      auto i = props_.index_of(t.text);
      if (!i)
        throw ParseError(t.pos, "unknown atomic proposition '" + t.text + "'");
      return Formula::atom(*i);
    }
    default:
      throw ParseError(t.pos, t.type == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'",
                       {"proposition", "'!'", "'X'", "'F'", "'('", "'true'", "'false'"});
    }
  }

  std::vector<Token> toks_;
  const PropositionSet& props_;
  std::size_t pos_ = 0;
};

} // namespace

Formula parse(std::string_view text, const PropositionSet& props) {
  if (props.empty())
    throw std::invalid_argument("proposition set must not be empty");
  bool blank = std::all_of(text.begin(), text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  if (blank)
    throw ParseError(0, "empty formula", {"formula"});
  return Parser(tokenize(text), props).parse_all();
}

// ---------------------------------------------------------------------------
// Evaluation and simplification

bool evaluate_propositional(const Formula& f, Letter letter) {
  switch (f.kind()) {
  case FormulaKind::True: return true;
  case FormulaKind::False: return false;
  case FormulaKind::Atom: return (letter >> f.prop()) & 1u;
  case FormulaKind::NegAtom: return !((letter >> f.prop()) & 1u);
  case FormulaKind::And:
    for (const auto& c : f.children())
      if (!evaluate_propositional(c, letter))
        return false;
    return true;
  case FormulaKind::Or:
    for (const auto& c : f.children())
      if (evaluate_propositional(c, letter))
        return true;
    return false;
  default: throw std::logic_error("evaluate_propositional on a temporal formula");
  }
}

namespace {

void collect_props(const Formula& f, std::set<std::size_t>& out) {
  if (f.kind() == FormulaKind::Atom || f.kind() == FormulaKind::NegAtom)
    out.insert(f.prop());
  for (const auto& c : f.children())
    collect_props(c, out);
}

// Decides a temporal-free formula by enumerating assignments of the atoms it
// mentions; returns it unchanged when contingent.
Formula collapse_propositional(const Formula& f) {
  if (f.temporal() || f.is_true() || f.is_false())
    return f;
  std::set<std::size_t> used;
  collect_props(f, used);
  std::vector<std::size_t> atoms(used.begin(), used.end());
  bool any_true = false, any_false = false;
  for (std::size_t m = 0; m < (std::size_t{1} << atoms.size()); ++m) {
    Letter l = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (m & (std::size_t{1} << i))
        l |= Letter{1} << atoms[i];
    (evaluate_propositional(f, l) ? any_true : any_false) = true;
    if (any_true && any_false)
      return f;
  }
  return any_true ? Formula::truth() : Formula::falsity();
}

Formula simplify_junction(FormulaKind kind, std::span<const Formula> raw);

Formula simplify_once(const Formula& f) {
  switch (f.kind()) {
  case FormulaKind::True:
  case FormulaKind::False:
  case FormulaKind::Atom:
  case FormulaKind::NegAtom: return f;
  case FormulaKind::Next: {
    Formula c = simplify_once(f.child(0));
    if (c.is_true() || c.is_false())
      return c;
    return Formula::next(c);
  }
  case FormulaKind::Eventually: {
    Formula c = simplify_once(f.child(0));
    if (c.is_true() || c.is_false() || c.kind() == FormulaKind::Eventually)
      return c;
    return Formula::eventually(c);
  }
  case FormulaKind::Until: {
    Formula lhs = simplify_once(f.child(0));
    Formula rhs = simplify_once(f.child(1));
    if (rhs.is_true() || rhs.is_false())
      return rhs;
    if (lhs.is_false() || lhs == rhs)
      return rhs;
    if (lhs.is_true())
      return rhs.kind() == FormulaKind::Eventually ? rhs : Formula::eventually(rhs);
    return Formula::until(lhs, rhs);
  }
  case FormulaKind::And:
  case FormulaKind::Or: {
    std::vector<Formula> kids;
    kids.reserve(f.children().size());
    for (const auto& c : f.children())
      kids.push_back(simplify_once(c));
    return simplify_junction(f.kind(), kids);
  }
  }
  return f;
}

Formula simplify_junction(FormulaKind kind, std::span<const Formula> raw) {
  const bool is_and = kind == FormulaKind::And;
  const FormulaKind dual = is_and ? FormulaKind::Or : FormulaKind::And;

  // Flatten, fold constants, drop duplicates.
  std::vector<Formula> kids;
  std::unordered_set<std::string> seen;
  auto push = [&](const Formula& c) -> bool {
    if (c.is_true() || c.is_false()) {
      if (c.is_true() != is_and)
        return false; // absorbing element
      return true;    // identity element
    }
    if (seen.insert(c.key()).second)
      kids.push_back(c);
    return true;
  };
  for (const auto& c : raw) {
    if (c.kind() == kind) {
      for (const auto& g : c.children())
        if (!push(g))
          return is_and ? Formula::falsity() : Formula::truth();
    } else if (!push(c)) {
      return is_and ? Formula::falsity() : Formula::truth();
    }
  }

  // Complementary literals.
  for (const auto& c : kids) {
    if (c.kind() == FormulaKind::Atom && seen.count(Formula::neg_atom(c.prop()).key()))
      return is_and ? Formula::falsity() : Formula::truth();
  }

  // Absorption: x & (x | y) = x, x | (x & y) = x.
  std::vector<Formula> kept;
  for (const auto& c : kids) {
    bool absorbed = false;
    if (c.kind() == dual) {
      for (const auto& g : c.children()) {
        if (g.key() != c.key() && seen.count(g.key())) {
          absorbed = true;
          break;
        }
      }
    }
    if (!absorbed)
      kept.push_back(c);
  }

  std::sort(kept.begin(), kept.end(), [](const Formula& a, const Formula& b) { return a.key() < b.key(); });
  Formula out = is_and ? Formula::conj(std::move(kept)) : Formula::disj(std::move(kept));
  return collapse_propositional(out);
}

Formula progress_raw(const Formula& f, Letter l) {
  switch (f.kind()) {
  case FormulaKind::True:
  case FormulaKind::False: return f;
  case FormulaKind::Atom: return ((l >> f.prop()) & 1u) ? Formula::truth() : Formula::falsity();
  case FormulaKind::NegAtom: return ((l >> f.prop()) & 1u) ? Formula::falsity() : Formula::truth();
  case FormulaKind::And:
  case FormulaKind::Or: {
    std::vector<Formula> kids;
    kids.reserve(f.children().size());
    for (const auto& c : f.children())
      kids.push_back(progress_raw(c, l));
    return f.kind() == FormulaKind::And ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
  }
  case FormulaKind::Next: return f.child(0);
  case FormulaKind::Until:
    return Formula::disj({progress_raw(f.child(1), l), Formula::conj({progress_raw(f.child(0), l), f})});
  case FormulaKind::Eventually: return Formula::disj({progress_raw(f.child(0), l), f});
  }
  return f;
}

using Clause = std::vector<Formula>; // sorted by key, no duplicates

bool key_less(const Formula& a, const Formula& b) { return a.key() < b.key(); }

bool contradictory(const Clause& c) {
  for (const auto& x : c)
    if (x.kind() == FormulaKind::Atom &&
        std::binary_search(c.begin(), c.end(), Formula::neg_atom(x.prop()), key_less))
      return true;
  return false;
}

// Drops contradictory clauses and clauses subsumed by a smaller one.
std::vector<Clause> reduce(std::vector<Clause> cs) {
  std::erase_if(cs, contradictory);
  std::sort(cs.begin(), cs.end(), [](const Clause& a, const Clause& b) {
    if (a.size() != b.size())
      return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), key_less);
  });
  std::vector<Clause> out;
  for (auto& c : cs) {
    bool subsumed = false;
    for (const auto& d : out)
      if (std::includes(c.begin(), c.end(), d.begin(), d.end(), key_less)) {
        subsumed = true;
        break;
      }
    if (!subsumed)
      out.push_back(std::move(c));
  }
  return out;
}

// Clauses of the top-level and/or structure; every other node is an
// opaque element.
std::vector<Clause> clauses(const Formula& f) {
  switch (f.kind()) {
  case FormulaKind::True: return {Clause{}};
  case FormulaKind::False: return {};
  case FormulaKind::Or: {
    std::vector<Clause> out;
    for (const auto& c : f.children())
      for (auto& cl : clauses(c))
        out.push_back(std::move(cl));
    return reduce(std::move(out));
  }
  case FormulaKind::And: {
    std::vector<Clause> acc{Clause{}};
    for (const auto& c : f.children()) {
      std::vector<Clause> next;
      for (const auto& rhs : clauses(c))
        for (const auto& lhs : acc) {
          Clause merged;
          std::set_union(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(), std::back_inserter(merged), key_less);
          merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
          next.push_back(std::move(merged));
        }
      acc = reduce(std::move(next));
      if (acc.empty())
        break;
    }
    return acc;
  }
  default: return {Clause{f}};
  }
}

// Residuals reachable by progression are boolean combinations of finitely
// many subformulas; this form keeps their number finite.
Formula disjunctive_form(const Formula& f) {
  std::vector<Formula> terms;
  for (auto& c : clauses(f))
    terms.push_back(Formula::conj(std::move(c)));
  return simplify_once(Formula::disj(std::move(terms)));
}

} // namespace

Formula simplify(const Formula& f) {
  Formula cur = simplify_once(f);
  // Rules can expose new opportunities one level up (e.g. a collapsed
  // child enabling absorption); iterate to the fixpoint.
  for (int i = 0; i < 64; ++i) {
    Formula nxt = simplify_once(cur);
    if (nxt.key() == cur.key())
      return cur;
    cur = nxt;
  }
  return cur;
}

Formula progress(const Formula& f, Letter letter) {
  return simplify(disjunctive_form(simplify(progress_raw(f, letter))));
}

std::string to_string(const Formula& f, const PropositionSet& props) {
  auto name = [&](std::size_t i) { return i < props.size() ? props.name(i) : "p" + std::to_string(i); };
  switch (f.kind()) {
  case FormulaKind::True: return "true";
  case FormulaKind::False: return "false";
  case FormulaKind::Atom: return name(f.prop());
  case FormulaKind::NegAtom: return "!" + name(f.prop());
  case FormulaKind::And:
  case FormulaKind::Or: {
    std::string out = "(";
    const char* sep = f.kind() == FormulaKind::And ? " & " : " | ";
    for (std::size_t i = 0; i < f.children().size(); ++i) {
      if (i)
        out += sep;
      out += to_string(f.child(i), props);
    }
    return out + ")";
  }
  case FormulaKind::Next: return "X(" + to_string(f.child(0), props) + ")";
  case FormulaKind::Eventually: return "F(" + to_string(f.child(0), props) + ")";
  case FormulaKind::Until: return "(" + to_string(f.child(0), props) + " U " + to_string(f.child(1), props) + ")";
  }
  return {};
}

} // namespace ltlshape
