#pragma once

#include "ltlshape/dfa.hpp"

#include <cstddef>
#include <vector>

namespace ltlshape {

/// Distance-to-acceptance values for one adaptive round.
struct DistanceTable {
  std::size_t round = 0;
  std::vector<double> values;

  double operator[](StateId q) const { return values[q]; }
  double max() const;
  bool operator==(const DistanceTable&) const = default;
};

/// Ordered sets B_0, B_1, ... with B_0 the accepting states and the rest
/// grouped by ascending round-0 distance.
class Partition {
public:
  Partition() = default;
  explicit Partition(std::vector<std::vector<StateId>> sets);

  std::size_t size() const { return sets_.size(); }
  const std::vector<StateId>& set(std::size_t i) const { return sets_.at(i); }
  const std::vector<std::vector<StateId>>& sets() const { return sets_; }
  std::size_t index_of(StateId q) const { return index_.at(q); }

private:
  std::vector<std::vector<StateId>> sets_;
  std::vector<std::size_t> index_;
};

/// h(q,q') = |AP| - log2 |delta_{q,q'}|. Throws std::invalid_argument when
/// no letter moves q to q'.
double difficulty(const DfaAnalysis& a, StateId q, StateId q2);

/// Round-0 distances: shortest h-weighted path to an accepting state;
/// states that cannot reach acceptance get |AP| * |Q|.
DistanceTable distances(const Dfa& d, const DfaAnalysis& a);

Partition partition(const Dfa& d, const DistanceTable& base);

/// max{0, t(q) - t(q')} when q' is a successor of q and q is not reachable
/// from q'; 0 otherwise.
double progression(const DistanceTable& t, const DfaAnalysis& a, StateId q, StateId q2);

/// Next-round table: adds theta to every state in B_i with i >= b. Throws
/// std::invalid_argument unless theta > 1 and b <= |partition|.
DistanceTable update_distances(const DistanceTable& prev, const Partition& p, std::size_t b, double theta);

/// A DFA bundled with the facts every reward computation needs.
struct TaskModel {
  explicit TaskModel(Dfa d);

  Dfa dfa;
  DfaAnalysis analysis;
  DistanceTable base;
  Partition partition;

  /// Sum of round-0 progression values over all state pairs.
  double progression_sum() const;
};

} // namespace ltlshape
