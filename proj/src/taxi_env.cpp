#include "ltlshape/env.hpp"

#include <algorithm>
#include <map>

namespace ltlshape {

namespace {

constexpr std::size_t kInTaxi = 5;
constexpr std::size_t kDelivered = 6;

Cell moved(Cell c, std::size_t a) {
  switch (a) {
  case 0: return {c.row - 1, c.col};
  case 1: return {c.row + 1, c.col};
  case 2: return {c.row, c.col - 1};
  default: return {c.row, c.col + 1};
  }
}

std::pair<std::size_t, std::size_t> perpendicular(std::size_t a) { return a < 2 ? std::pair{2ul, 3ul} : std::pair{0ul, 1ul}; }

} // namespace

TaxiWorld::TaxiWorld(Variant v, double noise, std::size_t horizon, Cell fifth_pickup)
    : variant_(v), noise_(v == Variant::Noisy ? noise : 0.0), horizon_(horizon), props_({"f", "g", "p"}) {
  if (!(noise >= 0.0 && noise < 1.0))
    throw std::invalid_argument("noise must lie in [0, 1)");
  locations_ = {{1, 1}, {1, 5}, {5, 1}, {5, 4}, fifth_pickup};
  if (fifth_pickup.row < 1 || fifth_pickup.row > 5 || fifth_pickup.col < 1 || fifth_pickup.col > 5 ||
      std::count(locations_.begin(), locations_.end(), fifth_pickup) != 1)
    throw std::invalid_argument("fifth pickup location must be a free cell inside the grid");
  walls_ = {{{1, 2}, {1, 3}}, {{2, 2}, {2, 3}}, {{4, 1}, {4, 2}}, {{5, 1}, {5, 2}}, {{4, 3}, {4, 4}}, {{5, 3}, {5, 4}}};
  for (int r = 1; r <= 5; ++r)
    for (int c = 1; c <= 5; ++c)
      start_cells_.push_back({r, c});
  if (v == Variant::Infeasible) {
    walls_.push_back({{4, 4}, {5, 4}});
    walls_.push_back({{5, 4}, {5, 5}});
    destinations_ = {3};
    pickups_ = {0, 1, 2, 4};
    std::erase(start_cells_, locations_[3]);
  } else {
    destinations_ = {0, 1, 2, 3};
    pickups_ = {0, 1, 2, 3, 4};
  }
}

bool TaxiWorld::blocked(Cell c, std::size_t move) const {
  Cell n = moved(c, move);
  if (n.row < 1 || n.row > 5 || n.col < 1 || n.col > 5)
    return true;
  return std::any_of(walls_.begin(), walls_.end(), [&](const auto& w) {
    return (w.first == c && w.second == n) || (w.first == n && w.second == c);
  });
}

TaxiWorld::Decoded TaxiWorld::decode(std::size_t state) const {
  std::size_t dest = state % 4;
  std::size_t pass = (state / 4) % 7;
  std::size_t cell = state / 28;
  return {{int(cell / 5) + 1, int(cell % 5) + 1}, pass, dest};
}

std::size_t TaxiWorld::encode(const Decoded& d) const {
  std::size_t cell = std::size_t(d.taxi.row - 1) * 5 + std::size_t(d.taxi.col - 1);
  return (cell * 7 + d.passenger) * 4 + d.destination;
}

Letter TaxiWorld::label(std::size_t state) const {
  auto d = decode(state);
  if (d.passenger == kDelivered)
    return Letter{1} << 0;
  if (d.passenger == kInTaxi)
    return d.taxi == locations_[d.destination] ? Letter{1} << 1 : Letter{1} << 2;
  return 0;
}

bool TaxiWorld::done(std::size_t state) const { return decode(state).passenger == kDelivered; }

std::size_t TaxiWorld::apply(std::size_t state, std::size_t action) const {
  auto d = decode(state);
  if (d.passenger == kDelivered)
    return state;
  if (action < 4) {
    if (!blocked(d.taxi, action))
      d.taxi = moved(d.taxi, action);
  } else if (action == kPickup) {
    if (d.passenger < kInTaxi && d.taxi == locations_[d.passenger])
      d.passenger = kInTaxi;
  } else if (action == kDropoff) {
    if (d.passenger == kInTaxi && d.taxi == locations_[d.destination])
      d.passenger = kDelivered;
  } else {
    throw std::out_of_range("taxi action out of range");
  }
  return encode(d);
}

std::vector<Outcome> TaxiWorld::initial_distribution() const {
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t p : pickups_)
    for (std::size_t g : destinations_)
      if (p != g)
        tasks.emplace_back(p, g);
  double prob = 1.0 / double(tasks.size() * start_cells_.size());
  std::vector<Outcome> out;
  for (Cell c : start_cells_)
    for (auto [p, g] : tasks)
      out.push_back({encode({c, p, g}), prob});
  return out;
}

std::vector<Outcome> TaxiWorld::outcomes(std::size_t state, std::size_t action) const {
  if (action >= 6)
    throw std::out_of_range("taxi action out of range");
  if (action >= 4 || noise_ == 0.0)
    return {{apply(state, action), 1.0}};
  auto [p1, p2] = perpendicular(action);
  std::map<std::size_t, double> acc;
  acc[apply(state, action)] += 1.0 - noise_;
  acc[apply(state, p1)] += noise_ / 2;
  acc[apply(state, p2)] += noise_ / 2;
  std::vector<Outcome> out;
  for (auto [s, p] : acc)
    out.push_back({s, p});
  return out;
}

StepResult TaxiWorld::reset(std::uint64_t seed) {
  rng_.seed(seed);
  auto init = initial_distribution();
  state_ = init[std::uniform_int_distribution<std::size_t>(0, init.size() - 1)(rng_)].state;
  return {state_, label(state_), done(state_)};
}

StepResult TaxiWorld::step(std::size_t action) {
  if (action >= 6)
    throw std::out_of_range("taxi action out of range");
  std::size_t a = action;
  if (a < 4 && noise_ > 0.0) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    auto [p1, p2] = perpendicular(a);
    if (u < noise_ / 2)
      a = p1;
    else if (u < noise_)
      a = p2;
  }
  state_ = apply(state_, a);
  return {state_, label(state_), done(state_)};
}

} // namespace ltlshape
