#pragma once

#include "ltlshape/formula.hpp"

#include <random>

namespace testsupport {

/// Random co-safe formulas in negation normal form with nesting depth at
/// most `max_depth` over propositions 0..ap_size-1.
class FormulaGenerator {
public:
  FormulaGenerator(std::uint64_t seed, std::size_t max_depth = 4) : rng_(seed), max_depth_(max_depth) {}

  ltlshape::Formula operator()(std::size_t ap_size) { return make(ap_size, max_depth_); }

private:
  ltlshape::Formula leaf(std::size_t ap_size) {
    using ltlshape::Formula;
    std::uniform_int_distribution<std::size_t> prop(0, ap_size - 1);
    switch (std::uniform_int_distribution<int>(0, 9)(rng_)) {
    case 0: return Formula::truth();
    case 1: return Formula::falsity();
    case 2:
    case 3:
    case 4: return Formula::neg_atom(prop(rng_));
    default: return Formula::atom(prop(rng_));
    }
  }

  ltlshape::Formula make(std::size_t ap_size, std::size_t depth) {
    using ltlshape::Formula;
    if (depth == 0 || std::bernoulli_distribution(0.25)(rng_))
      return leaf(ap_size);
    switch (std::uniform_int_distribution<int>(0, 5)(rng_)) {
    case 0: return Formula::conj({make(ap_size, depth - 1), make(ap_size, depth - 1)});
    case 1: return Formula::disj({make(ap_size, depth - 1), make(ap_size, depth - 1)});
    case 2: return Formula::next(make(ap_size, depth - 1));
    case 3:
    case 4: return Formula::until(make(ap_size, depth - 1), make(ap_size, depth - 1));
    default: return Formula::eventually(make(ap_size, depth - 1));
    }
  }

  std::mt19937_64 rng_;
  std::size_t max_depth_;
};

} // namespace testsupport
