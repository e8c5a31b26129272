#include "ltlshape/env.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>

namespace ltlshape {

namespace {

class SimulatorOnly : public LabeledEnv {
public:
  explicit SimulatorOnly(std::unique_ptr<LabeledEnv> inner) : inner_(std::move(inner)) {}

  std::string name() const override { return inner_->name(); }
  const PropositionSet& propositions() const override { return inner_->propositions(); }
  std::size_t action_count() const override { return inner_->action_count(); }
  std::size_t horizon() const override { return inner_->horizon(); }
  StepResult reset(std::uint64_t seed) override { return inner_->reset(seed); }
  StepResult step(std::size_t action) override { return inner_->step(action); }
  std::size_t state() const override { return inner_->state(); }

  bool enumerable() const override { return false; }
  std::size_t state_count() const override { refuse(); }
  std::vector<Outcome> initial_distribution() const override { refuse(); }
  std::vector<Outcome> outcomes(std::size_t, std::size_t) const override { refuse(); }
  Letter label(std::size_t) const override { refuse(); }
  bool done(std::size_t) const override { refuse(); }
  std::unique_ptr<LabeledEnv> clone() const override { return std::make_unique<SimulatorOnly>(inner_->clone()); }

private:
  [[noreturn]] void refuse() const { throw NotEnumerable("environment '" + name() + "' is simulator-only"); }
  std::unique_ptr<LabeledEnv> inner_;
};

bool is_flag_symbol(char ch) { return std::isalpha(static_cast<unsigned char>(ch)) && ch != 'A'; }

constexpr GridAction kMoves[] = {GridAction::Up, GridAction::Down, GridAction::Left, GridAction::Right};

std::pair<GridAction, GridAction> perpendicular(GridAction a) {
  if (a == GridAction::Up || a == GridAction::Down)
    return {GridAction::Left, GridAction::Right};
  return {GridAction::Up, GridAction::Down};
}

} // namespace

std::unique_ptr<LabeledEnv> simulator_only(std::unique_ptr<LabeledEnv> env) {
  return std::make_unique<SimulatorOnly>(std::move(env));
}

GridMap GridMap::parse(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    rows.push_back(line);
  }
  if (rows.empty())
    throw MapError("empty map");

  GridMap m;
  m.height_ = static_cast<int>(rows.size());
  m.width_ = static_cast<int>(rows[0].size());
  bool have_start = false;
  for (int r = 0; r < m.height_; ++r) {
    if (static_cast<int>(rows[r].size()) != m.width_)
      throw MapError("row " + std::to_string(r + 1) + " has width " + std::to_string(rows[r].size()) + ", expected " +
                     std::to_string(m.width_));
    for (int c = 0; c < m.width_; ++c) {
      char ch = rows[r][c];
      if (ch == 'A') {
        if (have_start)
          throw MapError("more than one start cell");
        have_start = true;
        m.start_ = {r + 1, c + 1};
        ch = '.';
      } else if (ch != '.' && ch != '#' && !is_flag_symbol(ch)) {
        throw MapError(std::string("unexpected character '") + ch + "' at row " + std::to_string(r + 1) +
                       ", column " + std::to_string(c + 1));
      }
      m.cells_.push_back(ch);
    }
  }
  if (!have_start)
    throw MapError("map has no start cell 'A'");
  return m;
}

GridMap GridMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw MapError("cannot open map file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<char> GridMap::flag(Cell c) const {
  char ch = at(c);
  if (!is_flag_symbol(ch))
    return std::nullopt;
  return static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
}

bool GridMap::is_consumable(Cell c) const { return std::islower(static_cast<unsigned char>(at(c))) != 0; }

std::vector<Cell> GridMap::find(char symbol) const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i] == symbol)
      out.push_back(cell(i));
  return out;
}

Cell GridMap::move(Cell c, GridAction a) const {
  Cell n = c;
  switch (a) {
  case GridAction::Up: --n.row; break;
  case GridAction::Down: ++n.row; break;
  case GridAction::Left: --n.col; break;
  case GridAction::Right: ++n.col; break;
  }
  if (!inside(n) || is_wall(n))
    return c;
  return n;
}

GridMap GridMap::with(Cell c, char symbol) const {
  if (!inside(c))
    throw MapError("cell outside the map");
  GridMap out = *this;
  if (symbol == 'A') {
    out.start_ = c;
    symbol = '.';
  }
  out.cells_[index(c)] = symbol;
  return out;
}

std::string GridMap::str() const {
  std::string out;
  for (int r = 1; r <= height_; ++r) {
    for (int c = 1; c <= width_; ++c)
      out += (Cell{r, c} == start_) ? 'A' : at({r, c});
    out += '\n';
  }
  return out;
}

namespace {

// Parent-tracking BFS; returns per-cell predecessor action (or -1).
std::vector<int> bfs_tree(const GridMap& m, Cell from, Cell to, const std::vector<Cell>& avoid,
                          std::vector<int>& dist) {
  std::vector<char> blocked(m.cell_count(), 0);
  for (Cell c : avoid)
    if (m.inside(c) && c != to)
      blocked[m.index(c)] = 1;
  dist.assign(m.cell_count(), -1);
  std::vector<int> via(m.cell_count(), -1);
  if (!m.inside(from) || m.is_wall(from) || blocked[m.index(from)])
    return via;
  std::queue<Cell> q;
  dist[m.index(from)] = 0;
  q.push(from);
  while (!q.empty()) {
    Cell c = q.front();
    q.pop();
    if (c == to)
      break;
    for (GridAction a : kMoves) {
      Cell n = m.move(c, a);
      std::size_t ni = m.index(n);
      if (n == c || blocked[ni] || dist[ni] >= 0)
        continue;
      dist[ni] = dist[m.index(c)] + 1;
      via[ni] = static_cast<int>(a);
      q.push(n);
    }
  }
  return via;
}

Cell step_back(Cell c, GridAction a) {
  switch (a) {
  case GridAction::Up: return {c.row + 1, c.col};
  case GridAction::Down: return {c.row - 1, c.col};
  case GridAction::Left: return {c.row, c.col + 1};
  case GridAction::Right: return {c.row, c.col - 1};
  }
  return c;
}

} // namespace

std::optional<int> bfs_distance(const GridMap& m, Cell from, Cell to, const std::vector<Cell>& avoid) {
  std::vector<int> dist;
  bfs_tree(m, from, to, avoid, dist);
  if (!m.inside(to) || dist[m.index(to)] < 0)
    return std::nullopt;
  return dist[m.index(to)];
}

std::optional<std::vector<std::size_t>> shortest_path_actions(const GridMap& m, Cell from, Cell to,
                                                              const std::vector<Cell>& avoid) {
  std::vector<int> dist;
  auto via = bfs_tree(m, from, to, avoid, dist);
  if (!m.inside(to) || dist[m.index(to)] < 0)
    return std::nullopt;
  std::vector<std::size_t> actions;
  for (Cell c = to; c != from;) {
    auto a = static_cast<GridAction>(via[m.index(c)]);
    actions.push_back(static_cast<std::size_t>(a));
    c = step_back(c, a);
  }
  std::reverse(actions.begin(), actions.end());
  return actions;
}

bool MapReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const MapCheck& c) { return c.pass; });
}

std::string MapReport::str() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.pass ? "pass" : "FAIL") << "  " << c.constraint.label << ": required " << c.constraint.required
        << ", actual ";
    if (c.actual)
      out << *c.actual;
    else
      out << "unreachable";
    out << '\n';
  }
  return out.str();
}

MapReport verify_map(const GridMap& m, const std::vector<MapConstraint>& constraints) {
  MapReport report;
  for (const auto& c : constraints) {
    MapCheck check{c, bfs_distance(m, c.from, c.to, c.avoid), false};
    check.pass = check.actual && *check.actual == c.required;
    report.checks.push_back(std::move(check));
  }
  return report;
}

std::vector<MapConstraint> example_map_constraints(const GridMap& m) {
  auto blues = m.find('b');
  auto yellow = m.find('Y');
  auto orange = m.find('o');
  if (blues.size() != 2 || yellow.size() != 1 || orange.size() != 1)
    throw MapError("example map needs two 'b' flags, one 'o' flag and one 'Y' hazard");
  // Blue A is the one reachable without passing the orange flag.
  Cell blue_a = blues[0], blue_b = blues[1];
  if (!bfs_distance(m, m.start(), blue_a, orange) && bfs_distance(m, m.start(), blue_b, orange))
    std::swap(blue_a, blue_b);
  return {
      {"start to blue A", m.start(), blue_a, {}, 10},
      {"start to yellow", m.start(), yellow[0], {}, 5},
      {"start to orange avoiding yellow", m.start(), orange[0], yellow, 16},
      {"orange to blue B", orange[0], blue_b, {}, 4},
  };
}

// ---------------------------------------------------------------------------

FlagGrid::FlagGrid(GridMap map, double noise, std::size_t horizon, std::string name)
    : map_(std::move(map)), noise_(noise), horizon_(horizon), name_(std::move(name)) {
  if (!(noise >= 0.0 && noise < 1.0))
    throw std::invalid_argument("noise must lie in [0, 1)");
  std::vector<std::string> names;
  consumable_bit_.assign(map_.cell_count(), -1);
  for (std::size_t i = 0; i < map_.cell_count(); ++i) {
    Cell c = map_.cell(i);
    auto f = map_.flag(c);
    if (!f)
      continue;
    std::string n(1, *f);
    if (std::find(names.begin(), names.end(), n) == names.end())
      names.push_back(n);
    if (map_.is_consumable(c)) {
      consumable_bit_[i] = static_cast<int>(consumable_.size());
      consumable_.push_back(c);
    }
  }
  std::sort(names.begin(), names.end());
  if (consumable_.size() > 20)
    throw MapError("too many consumable flags");
  props_ = PropositionSet(names);
}

Letter FlagGrid::label(std::size_t state) const {
  Cell c = cell_of(state);
  auto f = map_.flag(c);
  if (!f)
    return 0;
  int bit = consumable_bit_[map_.index(c)];
  if (bit >= 0 && (collected_mask(state) >> bit & 1))
    return 0;
  return Letter{1} << *props_.index_of(std::string(1, *f));
}

std::size_t FlagGrid::transition(std::size_t state, GridAction a) const {
  Cell c = cell_of(state);
  std::size_t mask = collected_mask(state);
  int bit = consumable_bit_[map_.index(c)];
  if (bit >= 0)
    mask |= std::size_t{1} << bit;
  return encode(map_.move(c, a), mask);
}

std::vector<Outcome> FlagGrid::initial_distribution() const { return {{encode(map_.start(), 0), 1.0}}; }

std::vector<Outcome> FlagGrid::outcomes(std::size_t state, std::size_t action) const {
  if (action >= 4)
    throw std::out_of_range("grid action out of range");
  auto a = static_cast<GridAction>(action);
  auto [p1, p2] = perpendicular(a);
  std::map<std::size_t, double> acc;
  acc[transition(state, a)] += 1.0 - noise_;
  if (noise_ > 0.0) {
    acc[transition(state, p1)] += noise_ / 2;
    acc[transition(state, p2)] += noise_ / 2;
  }
  std::vector<Outcome> out;
  for (auto [s, p] : acc)
    out.push_back({s, p});
  return out;
}

StepResult FlagGrid::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = encode(map_.start(), 0);
  return {state_, label(state_), false};
}

StepResult FlagGrid::step(std::size_t action) {
  if (action >= 4)
    throw std::out_of_range("grid action out of range");
  auto a = static_cast<GridAction>(action);
  if (noise_ > 0.0) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    auto [p1, p2] = perpendicular(a);
    if (u < noise_ / 2)
      a = p1;
    else if (u < noise_)
      a = p2;
  }
  state_ = transition(state_, a);
  return {state_, label(state_), false};
}

std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "deterministic")
    return Variant::Deterministic;
  if (s == "noisy")
    return Variant::Noisy;
  if (s == "infeasible")
    return Variant::Infeasible;
  return std::nullopt;
}

std::string_view to_string(Variant v) {
  switch (v) {
  case Variant::Deterministic: return "deterministic";
  case Variant::Noisy: return "noisy";
  case Variant::Infeasible: return "infeasible";
  }
  return "unknown";
}

GridMap office_map(Variant v) {
  static constexpr std::string_view kOffice = "..C.#...#...\n"
                                              "....#.D.#...\n"
                                              ".D..........\n"
                                              "##.###.###.#\n"
                                              "....#...#...\n"
                                              ".D..#.A.#.D.\n"
                                              "........M...\n"
                                              "##.###.###.#\n"
                                              "O...#...#..C\n";
  GridMap m = GridMap::parse(kOffice);
  if (v == Variant::Infeasible)
    m = m.with({9, 2}, '#');
  return m;
}

std::unique_ptr<FlagGrid> office_world(Variant v, double noise, std::size_t horizon) {
  return std::make_unique<FlagGrid>(office_map(v), v == Variant::Noisy ? noise : 0.0, horizon,
                                    "office_world_" + std::string(to_string(v)));
}

} // namespace ltlshape
