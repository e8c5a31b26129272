#include "ltlshape/letter.hpp"

#include <stdexcept>
#include <unordered_set>

namespace ltlshape {

PropositionSet::PropositionSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > kMaxPropositions)
    throw std::invalid_argument("at most " + std::to_string(kMaxPropositions) +
                                " propositions are supported");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty())
      throw std::invalid_argument("empty proposition name");
    if (!seen.insert(n).second)
      throw std::invalid_argument("duplicate proposition '" + n + "'");
  }
}

std::optional<std::size_t> PropositionSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name)
      return i;
  return std::nullopt;
}

Letter PropositionSet::letter(std::initializer_list<std::string_view> props) const {
  Letter l = 0;
  for (auto p : props) {
    auto i = index_of(p);
    if (!i)
      throw std::invalid_argument("unknown proposition '" + std::string(p) + "'");
    l |= Letter{1} << *i;
  }
  return l;
}

std::string PropositionSet::format(Letter l) const {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (l & (Letter{1} << i)) {
      if (!first)
        out += ',';
      out += names_[i];
      first = false;
    }
  }
  out += '}';
  return out;
}

LetterMap::LetterMap(const PropositionSet& from, const PropositionSet& to) {
  target_bit_.reserve(from.size());
  for (const auto& n : from.names()) {
    auto i = to.index_of(n);
    target_bit_.push_back(i ? static_cast<int>(*i) : -1);
  }
}

Letter LetterMap::operator()(Letter l) const {
  Letter out = 0;
  for (std::size_t i = 0; i < target_bit_.size(); ++i)
    if ((l & (Letter{1} << i)) && target_bit_[i] >= 0)
      out |= Letter{1} << target_bit_[i];
  return out;
}

} // namespace ltlshape
