#pragma once

#include "ltlshape/letter.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ltlshape {

struct Outcome {
  std::size_t state;
  double prob;
};

struct StepResult {
  std::size_t state;
  Letter label;
  bool done;
};

/// Episodic environment whose states carry a label over its own
/// proposition set. Enumerable environments also expose their exact model
/// (initial distribution, per-action outcome distributions, labels).
class LabeledEnv {
public:
  virtual ~LabeledEnv() = default;

  virtual std::string name() const = 0;
  virtual const PropositionSet& propositions() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::size_t horizon() const = 0;

  /// Starts an episode; the generator is reseeded so identical seeds and
  /// actions reproduce identical trajectories.
  virtual StepResult reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::size_t action) = 0;
  virtual std::size_t state() const = 0;

  virtual bool enumerable() const { return true; }
  virtual std::size_t state_count() const = 0;
  virtual std::vector<Outcome> initial_distribution() const = 0;
  virtual std::vector<Outcome> outcomes(std::size_t state, std::size_t action) const = 0;
  virtual Letter label(std::size_t state) const = 0;
  virtual bool done(std::size_t state) const = 0;

  virtual std::unique_ptr<LabeledEnv> clone() const = 0;
};

/// Hides the exact model of another environment, leaving only sampling.
/// Stands in for simulators the oracle cannot enumerate.
std::unique_ptr<LabeledEnv> simulator_only(std::unique_ptr<LabeledEnv> env);

class NotEnumerable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Grid maps

/// 1-based grid coordinate, row first (g_{row,col}).
struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class GridAction : std::size_t { Up = 0, Down = 1, Left = 2, Right = 3 };

class MapError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// ASCII grid: '.' empty, '#' wall, 'A' start, lowercase letter = flag that
/// disappears once collected, uppercase letter (other than 'A') = flag
/// that stays. The letter names the proposition it emits.
class GridMap {
public:
  static GridMap parse(std::string_view text);
  static GridMap load(const std::string& path);

  int width() const { return width_; }
  int height() const { return height_; }
  Cell start() const { return start_; }
  bool inside(Cell c) const { return c.row >= 1 && c.row <= height_ && c.col >= 1 && c.col <= width_; }
  char at(Cell c) const { return cells_[index(c)]; }
  bool is_wall(Cell c) const { return at(c) == '#'; }
  /// Proposition name of a flag cell, if any.
  std::optional<char> flag(Cell c) const;
  bool is_consumable(Cell c) const;
  std::vector<Cell> find(char symbol) const;

  std::size_t index(Cell c) const { return std::size_t(c.row - 1) * width_ + (c.col - 1); }
  Cell cell(std::size_t index) const { return {int(index / width_) + 1, int(index % width_) + 1}; }
  std::size_t cell_count() const { return cells_.size(); }

  /// Cell reached by a move; walls and the boundary leave the agent in place.
  Cell move(Cell c, GridAction a) const;

  /// Returns a copy with one cell replaced.
  GridMap with(Cell c, char symbol) const;
  std::string str() const;

private:
  int width_ = 0;
  int height_ = 0;
  Cell start_;
  std::vector<char> cells_;
};

/// Breadth-first shortest path length avoiding the given cells (the target
/// itself is always allowed). std::nullopt when unreachable.
std::optional<int> bfs_distance(const GridMap& m, Cell from, Cell to, const std::vector<Cell>& avoid = {});
/// Action sequence realizing bfs_distance (lowest action index first on ties).
std::optional<std::vector<std::size_t>> shortest_path_actions(const GridMap& m, Cell from, Cell to,
                                                              const std::vector<Cell>& avoid = {});

struct MapConstraint {
  std::string label;
  Cell from;
  Cell to;
  std::vector<Cell> avoid;
  int required = 0;
};

struct MapCheck {
  MapConstraint constraint;
  std::optional<int> actual;
  bool pass = false;
};

struct MapReport {
  std::vector<MapCheck> checks;
  bool all_pass() const;
  std::string str() const;
};

MapReport verify_map(const GridMap& m, const std::vector<MapConstraint>& constraints);

/// The step-count constraints the bundled example map is authored to meet.
std::vector<MapConstraint> example_map_constraints(const GridMap& m);

// ---------------------------------------------------------------------------
// Grid environments

/// Gridworld emitting a flag's proposition on the step the agent stands on
/// it (consumable flags only until collected). With slip probability p the
/// chosen move is replaced by each perpendicular move with probability p/2.
class FlagGrid : public LabeledEnv {
public:
  FlagGrid(GridMap map, double noise = 0.0, std::size_t horizon = 25, std::string name = "flag_grid");

  const GridMap& map() const { return map_; }
  double noise() const { return noise_; }

  std::string name() const override { return name_; }
  const PropositionSet& propositions() const override { return props_; }
  std::size_t action_count() const override { return 4; }
  std::size_t horizon() const override { return horizon_; }
  StepResult reset(std::uint64_t seed) override;
  StepResult step(std::size_t action) override;
  std::size_t state() const override { return state_; }

  std::size_t state_count() const override { return map_.cell_count() << consumable_.size(); }
  std::vector<Outcome> initial_distribution() const override;
  std::vector<Outcome> outcomes(std::size_t state, std::size_t action) const override;
  Letter label(std::size_t state) const override;
  bool done(std::size_t) const override { return false; }
  std::unique_ptr<LabeledEnv> clone() const override { return std::make_unique<FlagGrid>(*this); }

  Cell cell_of(std::size_t state) const { return map_.cell(state >> consumable_.size()); }
  std::size_t collected_mask(std::size_t state) const { return state & ((std::size_t{1} << consumable_.size()) - 1); }
  std::size_t encode(Cell c, std::size_t mask) const { return (map_.index(c) << consumable_.size()) | mask; }

private:
  std::size_t transition(std::size_t state, GridAction a) const;

  GridMap map_;
  double noise_;
  std::size_t horizon_;
  std::string name_;
  PropositionSet props_;
  std::vector<Cell> consumable_;
  std::vector<int> consumable_bit_; // per cell index, -1 when not consumable
  std::size_t state_ = 0;
  std::mt19937_64 rng_;
};

enum class Variant { Deterministic, Noisy, Infeasible };
std::optional<Variant> parse_variant(std::string_view s);
std::string_view to_string(Variant v);

/// 12x9 office: coffee (c), mail (m), office (o), decorations (d).
/// The infeasible variant walls off the office.
GridMap office_map(Variant v);
std::unique_ptr<FlagGrid> office_world(Variant v, double noise = 0.1, std::size_t horizon = 200);
inline constexpr std::string_view kOfficeFormula =
    "(!d) U ((c & ((!d) U (m & ((!d) U o)))) | (m & ((!d) U (c & ((!d) U o)))))";

// ---------------------------------------------------------------------------
// Taxi

/// 5x5 taxi domain. Actions: north, south, west, east, pickup, dropoff.
/// Passengers wait at one of five pickup locations (the four corner stands
/// plus the centre) and travel to one of four destinations. Labels:
/// p = carrying the passenger away from the destination, g = carrying it at
/// the destination, f = delivered (episode ends).
class TaxiWorld : public LabeledEnv {
public:
  static constexpr std::size_t kPickup = 4;
  static constexpr std::size_t kDropoff = 5;

  TaxiWorld(Variant v, double noise = 0.1, std::size_t horizon = 200, Cell fifth_pickup = {3, 3});

  std::string name() const override { return "taxi_world"; }
  const PropositionSet& propositions() const override { return props_; }
  std::size_t action_count() const override { return 6; }
  std::size_t horizon() const override { return horizon_; }
  StepResult reset(std::uint64_t seed) override;
  StepResult step(std::size_t action) override;
  std::size_t state() const override { return state_; }

  std::size_t state_count() const override { return 25 * 7 * 4; }
  std::vector<Outcome> initial_distribution() const override;
  std::vector<Outcome> outcomes(std::size_t state, std::size_t action) const override;
  Letter label(std::size_t state) const override;
  bool done(std::size_t state) const override;
  std::unique_ptr<LabeledEnv> clone() const override { return std::make_unique<TaxiWorld>(*this); }

  struct Decoded {
    Cell taxi;
    std::size_t passenger; // 0..4 waiting at location, 5 in taxi, 6 delivered
    std::size_t destination;
  };
  Decoded decode(std::size_t state) const;
  std::size_t encode(const Decoded& d) const;
  /// Pickup locations; indices 0..3 double as destinations.
  const std::vector<Cell>& locations() const { return locations_; }
  const std::vector<std::size_t>& destinations() const { return destinations_; }
  const std::vector<std::size_t>& pickups() const { return pickups_; }
  bool blocked(Cell c, std::size_t move) const;

private:
  std::size_t apply(std::size_t state, std::size_t action) const;

  Variant variant_;
  double noise_;
  std::size_t horizon_;
  PropositionSet props_;
  std::vector<Cell> locations_;
  std::vector<std::size_t> destinations_;
  std::vector<std::size_t> pickups_;
  std::vector<std::pair<Cell, Cell>> walls_;
  std::vector<Cell> start_cells_;
  std::size_t state_ = 0;
  std::mt19937_64 rng_;
};

inline constexpr std::string_view kTaxiFormula = "F (p & F (g & F f))";

} // namespace ltlshape
