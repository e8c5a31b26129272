#include "ltlshape/task_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace ltlshape {

double DistanceTable::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

Partition::Partition(std::vector<std::vector<StateId>> sets) : sets_(std::move(sets)) {
  std::size_t n = 0;
  for (const auto& s : sets_)
    for (StateId q : s)
      n = std::max<std::size_t>(n, q + 1);
  index_.assign(n, 0);
  for (std::size_t i = 0; i < sets_.size(); ++i)
    for (StateId q : sets_[i])
      index_[q] = i;
}

double difficulty(const DfaAnalysis& a, StateId q, StateId q2) {
  auto c = a.count(q, q2);
  if (c == 0)
    throw std::invalid_argument("difficulty is undefined without a transition");
  return static_cast<double>(a.ap_size()) - std::log2(static_cast<double>(c));
}

DistanceTable distances(const Dfa& d, const DfaAnalysis& a) {
  const std::size_t n = d.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kInf);

  // Dijkstra from the accepting set over reversed edges.
  std::vector<std::vector<std::pair<StateId, double>>> rev(n);
  for (StateId q = 0; q < n; ++q)
    for (auto [t, c] : a.successors(q))
      if (t != q)
        rev[t].emplace_back(q, difficulty(a, q, t));

  using Item = std::pair<double, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (StateId q = 0; q < n; ++q)
    if (d.is_accepting(q)) {
      dist[q] = 0.0;
      pq.emplace(0.0, q);
    }
  while (!pq.empty()) {
    auto [dq, q] = pq.top();
    pq.pop();
    if (dq > dist[q])
      continue;
    for (auto [p, w] : rev[q]) {
      if (d.is_accepting(p))
        continue;
      double cand = dist[q] + w;
      if (cand < dist[p]) {
        dist[p] = cand;
        pq.emplace(cand, p);
      }
    }
  }

  const double sentinel = static_cast<double>(d.ap().size() * n);
  for (auto& v : dist)
    if (v == kInf)
      v = sentinel;
  return {0, std::move(dist)};
}

Partition partition(const Dfa& d, const DistanceTable& base) {
  std::vector<std::vector<StateId>> sets(1);
  std::map<double, std::vector<StateId>> groups;
  for (StateId q = 0; q < d.size(); ++q) {
    if (d.is_accepting(q))
      sets[0].push_back(q);
    else
      groups[base[q]].push_back(q);
  }
  for (auto& [v, qs] : groups)
    sets.push_back(std::move(qs));
  return Partition(std::move(sets));
}

double progression(const DistanceTable& t, const DfaAnalysis& a, StateId q, StateId q2) {
  if (a.count(q, q2) == 0 || a.reachable(q2, q))
    return 0.0;
  return std::max(0.0, t[q] - t[q2]);
}

DistanceTable update_distances(const DistanceTable& prev, const Partition& p, std::size_t b, double theta) {
  if (!(theta > 1.0))
    throw std::invalid_argument("theta must be greater than 1");
  if (b > p.size())
    throw std::invalid_argument("partition index out of range");
  DistanceTable next{prev.round + 1, prev.values};
  for (std::size_t i = b; i < p.size(); ++i)
    for (StateId q : p.set(i))
      next.values[q] += theta;
  return next;
}

TaskModel::TaskModel(Dfa d)
    : dfa(std::move(d)), analysis(dfa), base(distances(dfa, analysis)), partition(ltlshape::partition(dfa, base)) {}

double TaskModel::progression_sum() const {
  double sum = 0.0;
  for (StateId q = 0; q < dfa.size(); ++q)
    for (auto [t, c] : analysis.successors(q))
      sum += progression(base, analysis, q, t);
  return sum;
}

} // namespace ltlshape
