#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ltlshape {

/// A letter of the alphabet 2^AP, stored as a bitmask over an ordered
/// proposition list. Bit i is set when proposition i holds.
using Letter = std::uint32_t;

inline constexpr std::size_t kMaxPropositions = 16;

/// Ordered, duplicate-free list of atomic proposition names.
class PropositionSet {
public:
  PropositionSet() = default;
  explicit PropositionSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  std::optional<std::size_t> index_of(std::string_view name) const;

  /// Number of letters, 2^|AP|.
  std::size_t alphabet_size() const { return std::size_t{1} << names_.size(); }

  Letter letter(std::initializer_list<std::string_view> props) const;

  /// Renders a letter as "{o,b}"; the empty letter is "{}".
  std::string format(Letter l) const;

  bool operator==(const PropositionSet&) const = default;

private:
  std::vector<std::string> names_;
};

/// Re-expresses letters over one proposition list as letters over another,
/// matching propositions by name. Propositions absent from the target are
/// dropped.
class LetterMap {
public:
  LetterMap() = default;
  LetterMap(const PropositionSet& from, const PropositionSet& to);

  Letter operator()(Letter l) const;

private:
  std::vector<int> target_bit_;
};

inline bool is_singleton_or_empty(Letter l) { return (l & (l - 1)) == 0; }

} // namespace ltlshape
