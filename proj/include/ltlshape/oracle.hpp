#pragma once

#include "ltlshape/env.hpp"
#include "ltlshape/harness.hpp"
#include "ltlshape/reward.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ltlshape {

/// Explicit product of an enumerable environment with a task automaton,
/// restricted to states reachable from the initial distribution.
struct EnumeratedProduct {
  std::shared_ptr<const TaskModel> task;
  std::vector<ProductState> states;
  std::vector<Outcome> initial;             // over indices into `states`
  std::vector<std::vector<Outcome>> next;   // [state * actions + action]
  std::vector<char> terminal;               // accepted, trapped or env done
  std::vector<std::size_t> depth;           // fewest steps from the initial support
  std::size_t actions = 0;
  std::size_t horizon = 0;
  double gamma = 0.9;

  std::size_t size() const { return states.size(); }
  const std::vector<Outcome>& outcomes(std::size_t s, std::size_t a) const { return next[s * actions + a]; }
  std::optional<std::size_t> find(ProductState ps) const;
};

/// Throws NotEnumerable for simulator-only environments and
/// std::length_error beyond max_states.
EnumeratedProduct enumerate_product(const LabeledEnv& env, std::shared_ptr<const TaskModel> task, double gamma,
                                    std::size_t max_states = 2'000'000);

/// A (possibly stage-dependent, possibly randomized) policy on an
/// enumerated product.
class ProductPolicy {
public:
  static constexpr std::size_t kUndefined = std::numeric_limits<std::size_t>::max();

  /// action[t][s]; stages beyond the table reuse the last one.
  static ProductPolicy staged(std::vector<std::vector<std::size_t>> action);
  static ProductPolicy stationary(std::vector<std::size_t> action);
  /// probs[s][a].
  static ProductPolicy stochastic(std::vector<std::vector<double>> probs);
  /// The same action in every state at stage t; `fill` after the sequence.
  static ProductPolicy open_loop(std::vector<std::size_t> sequence, std::size_t fill);

  /// Appends (action, probability) pairs; throws std::domain_error when
  /// the policy has no action for the state.
  void distribution(std::size_t stage, std::size_t state, std::vector<std::pair<std::size_t, double>>& out) const;

private:
  enum class Kind { Staged, Stochastic, OpenLoop } kind_ = Kind::Staged;
  std::vector<std::vector<std::size_t>> staged_;
  std::vector<std::vector<double>> probs_;
  std::vector<std::size_t> sequence_;
  std::size_t fill_ = 0;
};

struct ViResult {
  ProductPolicy policy;
  double value = 0.0;                       // expected return from the initial distribution
  std::vector<double> v0;                   // stage-0 value per state
};

/// Finite-horizon backward induction; ties go to the lowest action index.
ViResult value_iteration(const EnumeratedProduct& p, const RewardContext& ctx);

/// Exact expected return of a policy over the horizon.
double policy_evaluation(const EnumeratedProduct& p, const ProductPolicy& pi, const RewardContext& ctx);

/// b(pi): lowest partition index visited with positive probability.
std::size_t policy_progression(const EnumeratedProduct& p, const ProductPolicy& pi);

/// b*: lowest partition index reachable within the horizon under any choice
/// of actions.
std::size_t best_progression(const EnumeratedProduct& p);

/// Policy maximizing the probability of reaching a partition index below
/// `b` within the horizon, with that probability.
std::pair<ProductPolicy, double> max_reach_policy(const EnumeratedProduct& p, std::size_t b);

/// DFA-level description of a trajectory: the automaton moves only at the
/// listed steps (1-based) and self-loops otherwise.
struct SymbolicTrajectory {
  struct Event {
    std::size_t step;
    StateId from;
    StateId to;
  };
  StateId initial = 0;
  std::vector<Event> events;
  std::size_t length = 0;
};

/// sum_t gamma^t r_{t+1}, stopping at acceptance, trap, or length. Throws
/// std::invalid_argument on a malformed trajectory.
double trajectory_return(const SymbolicTrajectory& tr, const RewardContext& ctx, double gamma);

struct TheoremIteration {
  std::size_t round = 0;
  std::size_t b = 0;
  double value = 0.0;
  double eta = 0.0;
  bool lemma2_ok = true;
  bool invariance_ok = true;
};

struct TheoremReport {
  std::string kind;
  double theta = 0.0;
  double eta0 = 0.0;
  std::size_t b_star = 0;
  std::size_t final_b = 0;
  std::size_t rounds = 0;
  std::size_t round_cap = 0;
  bool converged = false;
  bool lemma2_ok = true;
  bool invariance_ok = true;
  /// sigma / (p * gamma^(H-1)) at the last iteration; absent when b* was reached.
  std::optional<double> theta_lower_bound;
  std::vector<TheoremIteration> iterations;

  bool ok() const { return converged && lemma2_ok && invariance_ok; }
  std::string json() const;
};

/// An open-loop action script on a flag grid with its DFA-level trajectory.
struct ExamplePolicy {
  std::string name;
  std::vector<std::size_t> actions;
  std::size_t fill = 0; // action repeated once the script runs out
  SymbolicTrajectory trajectory;
};

/// Scripts on the example map: pi1 collects the nearer blue flag and waits
/// there, pi2 collects orange then the blue flag behind it, pi3 walks
/// straight into the yellow hazard. Trajectories are derived from BFS path
/// lengths and the automaton's response to single-flag letters.
std::vector<ExamplePolicy> example_policies(const FlagGrid& env, const TaskModel& task);

/// Runs the adaptive loop with exact optimal policies until b(pi*_k) = b*.
/// Round cap defaults to 2 * |partition|.
TheoremReport theorem_check(const EnumeratedProduct& p, RewardKind kind, double theta, double eta0,
                            std::optional<std::size_t> round_cap = std::nullopt);

} // namespace ltlshape
