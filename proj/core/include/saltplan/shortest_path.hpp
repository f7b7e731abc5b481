#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "saltplan/network.hpp"

namespace saltplan {

/// Single-source (or single-target) shortest travel times with edge weight
/// length / speed_limit. Among time-optimal paths the one with the
/// lexicographically smallest edge-id sequence (in travel order) is kept.
class ShortestPathTree {
 public:
  static constexpr std::uint32_t kNoEdge = std::numeric_limits<std::uint32_t>::max();

  /// Paths from `source` to every node.
  static ShortestPathTree from_source(const RoadNetwork& network,
                                      std::size_t source);
  /// Paths from every node to `target`.
  static ShortestPathTree to_target(const RoadNetwork& network,
                                    std::size_t target);

  bool reachable(std::size_t node) const noexcept {
    return hours_[node] < std::numeric_limits<double>::infinity();
  }
  double hours(std::size_t node) const noexcept { return hours_[node]; }
  double km(std::size_t node) const noexcept { return km_[node]; }
  std::size_t root() const noexcept { return root_; }
  bool is_reverse() const noexcept { return reverse_; }

  /// Edge indices in travel order: root -> node for a source tree,
  /// node -> root for a target tree. Empty when node == root.
  std::vector<std::size_t> path(std::size_t node) const;

 private:
  ShortestPathTree() = default;

  std::size_t root_ = 0;
  bool reverse_ = false;
  std::vector<double> hours_;
  std::vector<double> km_;
  // For a source tree: the last edge into the node. For a target tree: the
  // first edge out of the node.
  std::vector<std::uint32_t> via_;
  const RoadNetwork* network_ = nullptr;
};

struct TravelPath {
  double hours = 0.0;
  double km = 0.0;
  std::vector<EdgeId> edges;
};

/// Throws UnreachableError when `to` cannot be reached from `from`.
TravelPath shortest_travel_time(const RoadNetwork& network, NodeId from,
                                NodeId to);

/// Thread-safe memo of shortest-path trees. Results never depend on whether
/// an entry was cached; the capacity only bounds memory.
class PathCache {
 public:
  explicit PathCache(const RoadNetwork& network, std::size_t capacity = 4096)
      : network_(&network), capacity_(capacity) {}

  std::shared_ptr<const ShortestPathTree> from(std::size_t source);
  std::shared_ptr<const ShortestPathTree> to(std::size_t target);

  const RoadNetwork& network() const noexcept { return *network_; }

 private:
  using Map = std::unordered_map<std::size_t, std::shared_ptr<const ShortestPathTree>>;
  std::shared_ptr<const ShortestPathTree> lookup(Map& map, std::size_t key,
                                                 bool reverse);

  const RoadNetwork* network_;
  std::size_t capacity_;
  std::mutex mutex_;
  Map forward_;
  Map reverse_;
};

}  // namespace saltplan
