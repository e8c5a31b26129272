#pragma once

#include "ltlshape/letter.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ltlshape {

enum class FormulaKind : std::uint8_t {
  True,
  False,
  Atom,
  NegAtom,
  And,
  Or,
  Next,
  Until,
  Eventually,
};

/// Immutable co-safe LTL formula in negation normal form. Negation only
/// occurs directly on atoms. And/Or are n-ary.
///
/// Formulas share structure; copying is cheap. Each node carries a
/// canonical key (over proposition indices) that identifies it
/// structurally, so two formulas with equal keys are the same formula.
class Formula {
public:
  static Formula truth();
  static Formula falsity();
  static Formula atom(std::size_t prop);
  static Formula neg_atom(std::size_t prop);
  static Formula conj(std::vector<Formula> children);
  static Formula disj(std::vector<Formula> children);
  static Formula next(Formula sub);
  static Formula until(Formula lhs, Formula rhs);
  static Formula eventually(Formula sub);

  FormulaKind kind() const;
  /// Proposition index; only meaningful for Atom and NegAtom.
  std::size_t prop() const;
  std::span<const Formula> children() const;
  const Formula& child(std::size_t i) const { return children()[i]; }

  const std::string& key() const;
  /// True when a Next, Until or Eventually occurs anywhere in the formula.
  bool temporal() const;
  std::size_t size() const;

  bool is_true() const { return kind() == FormulaKind::True; }
  bool is_false() const { return kind() == FormulaKind::False; }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.node_ == b.node_ || a.key() == b.key();
  }

private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Formula make(FormulaKind k, std::size_t prop, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
};

/// Syntax error with the byte offset at which parsing failed.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t position, std::string message, std::vector<std::string> expected = {});

  std::size_t position() const { return position_; }
  const std::vector<std::string>& expected() const { return expected_; }

private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// Parses the ASCII surface syntax:
///
///   !a       negated atom          X f      next
///   f & g    conjunction           F f      eventually
///   f | g    disjunction           f U g    until (right associative)
///   true, false, parentheses
///
/// Precedence from tightest: `!`, then `X`/`F`, then `U`, `&`, `|`.
/// Negation applied to anything other than an atom is rejected. The
/// returned tree mirrors the input (no simplification, binary And/Or).
Formula parse(std::string_view text, const PropositionSet& props);

/// Residual formula after reading one letter, simplified and in
/// disjunctive normal form over its temporal subformulas.
Formula progress(const Formula& f, Letter letter);

/// Canonical simplification: constant folding, flattening, idempotence,
/// absorption and sorted children, plus truth-table collapse of
/// temporal-free subformulas to true/false. Idempotent.
Formula simplify(const Formula& f);

/// Truth value of a temporal-free formula under one letter.
bool evaluate_propositional(const Formula& f, Letter letter);

/// Human-readable rendering using proposition names; parse() accepts it.
std::string to_string(const Formula& f, const PropositionSet& props);

} // namespace ltlshape
