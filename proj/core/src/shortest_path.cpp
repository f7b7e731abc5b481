#include "saltplan/shortest_path.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace saltplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative band inside which two path times count as equal.
constexpr double kTieTolerance = 1e-12;

bool ties(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max(std::abs(a), std::abs(b));
}

using QueueItem = std::pair<double, std::size_t>;
using MinQueue =
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

}  // namespace

ShortestPathTree ShortestPathTree::from_source(const RoadNetwork& network,
                                               std::size_t source) {
  ShortestPathTree t;
  t.network_ = &network;
  t.root_ = source;
  t.reverse_ = false;
  const std::size_t n = network.node_count();
  t.hours_.assign(n, kInf);
  t.km_.assign(n, kInf);
  t.via_.assign(n, kNoEdge);
  std::vector<bool> settled(n, false);

  auto edge_ids_to = [&](std::size_t node, std::vector<std::int64_t>& out) {
    out.clear();
    while (node != source) {
      auto e = t.via_[node];
      out.push_back(raw(network.edge(e).id));
      node = network.tail(e);
    }
    std::reverse(out.begin(), out.end());
  };
  std::vector<std::int64_t> lhs, rhs;

  t.hours_[source] = 0.0;
  t.km_[source] = 0.0;
  MinQueue queue;
  queue.push({0.0, source});
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (settled[u] || d != t.hours_[u]) continue;
    settled[u] = true;
    for (auto e : network.out_edges(u)) {
      std::size_t v = network.head(e);
      if (settled[v]) continue;
      double cand = d + network.travel_hours(e);
      bool take = false;
      if (t.via_[v] == kNoEdge && v != source) {
        take = true;
      } else if (ties(cand, t.hours_[v])) {
        edge_ids_to(u, lhs);
        lhs.push_back(raw(network.edge(e).id));
        edge_ids_to(v, rhs);
        take = std::lexicographical_compare(lhs.begin(), lhs.end(), rhs.begin(),
                                            rhs.end());
      } else {
        take = cand < t.hours_[v];
      }
      if (take) {
        t.hours_[v] = cand;
        t.km_[v] = t.km_[u] + network.edge(e).length_km;
        t.via_[v] = e;
        queue.push({cand, v});
      }
    }
  }
  return t;
}

ShortestPathTree ShortestPathTree::to_target(const RoadNetwork& network,
                                             std::size_t target) {
  ShortestPathTree t;
  t.network_ = &network;
  t.root_ = target;
  t.reverse_ = true;
  const std::size_t n = network.node_count();
  t.hours_.assign(n, kInf);
  t.km_.assign(n, kInf);
  t.via_.assign(n, kNoEdge);
  std::vector<bool> settled(n, false);

  t.hours_[target] = 0.0;
  t.km_[target] = 0.0;
  MinQueue queue;
  queue.push({0.0, target});
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (settled[u] || d != t.hours_[u]) continue;
    settled[u] = true;
    for (auto e : network.in_edges(u)) {
      std::size_t v = network.tail(e);
      if (settled[v]) continue;
      double cand = network.travel_hours(e) + d;
      bool take = false;
      if (t.via_[v] == kNoEdge && v != target) {
        take = true;
      } else if (ties(cand, t.hours_[v])) {
        // Paths differ in their first edge, so that decides the order.
        take = network.edge(e).id < network.edge(t.via_[v]).id;
      } else {
        take = cand < t.hours_[v];
      }
      if (take) {
        t.hours_[v] = cand;
        t.km_[v] = network.edge(e).length_km + t.km_[u];
        t.via_[v] = e;
        queue.push({cand, v});
      }
    }
  }
  return t;
}

std::vector<std::size_t> ShortestPathTree::path(std::size_t node) const {
  std::vector<std::size_t> out;
  if (!reachable(node)) {
    throw UnreachableError(fmt::format(
        "node {} is not connected to node {}", raw(network_->node(node).id),
        raw(network_->node(root_).id)));
  }
  if (!reverse_) {
    while (node != root_) {
      out.push_back(via_[node]);
      node = network_->tail(via_[node]);
    }
    std::reverse(out.begin(), out.end());
  } else {
    while (node != root_) {
      out.push_back(via_[node]);
      node = network_->head(via_[node]);
    }
  }
  return out;
}

TravelPath shortest_travel_time(const RoadNetwork& network, NodeId from,
                                NodeId to) {
  std::size_t s = network.node_index(from);
  std::size_t t = network.node_index(to);
  TravelPath result;
  if (s == t) return result;
  auto tree = ShortestPathTree::from_source(network, s);
  if (!tree.reachable(t)) {
    throw UnreachableError(
        fmt::format("node {} is unreachable from node {}", raw(to), raw(from)));
  }
  result.hours = tree.hours(t);
  result.km = tree.km(t);
  for (auto e : tree.path(t)) result.edges.push_back(network.edge(e).id);
  return result;
}

std::shared_ptr<const ShortestPathTree> PathCache::from(std::size_t source) {
  return lookup(forward_, source, false);
}

std::shared_ptr<const ShortestPathTree> PathCache::to(std::size_t target) {
  return lookup(reverse_, target, true);
}

std::shared_ptr<const ShortestPathTree> PathCache::lookup(Map& map,
                                                          std::size_t key,
                                                          bool reverse) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = map.find(key); it != map.end()) return it->second;
  }
  auto tree = std::make_shared<const ShortestPathTree>(
      reverse ? ShortestPathTree::to_target(*network_, key)
              : ShortestPathTree::from_source(*network_, key));
  std::lock_guard lock(mutex_);
  if (map.size() >= capacity_) map.clear();
  return map.emplace(key, std::move(tree)).first->second;
}

}  // namespace saltplan
