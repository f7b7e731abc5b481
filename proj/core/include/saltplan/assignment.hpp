#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saltplan/fleet.hpp"
#include "saltplan/network.hpp"

namespace saltplan {

/// Static 2-d tree. Nearest-neighbour ties resolve to the lowest input index.
class KdTree {
 public:
  explicit KdTree(std::vector<Point> points);  // throws ValidationError if empty

  std::size_t nearest(Point query) const;
  std::size_t size() const noexcept { return points_.size(); }
  const Point& point(std::size_t index) const { return points_.at(index); }
  std::size_t depth() const noexcept { return depth_; }

 private:
  struct NodeRec {
    std::size_t point;  // index into points_
    int axis;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::vector<std::size_t>& order, std::size_t lo,
                     std::size_t hi, std::size_t level);
  void search(std::int32_t node, Point q, std::size_t& best,
              double& best_d2) const;

  std::vector<Point> points_;
  std::vector<NodeRec> nodes_;
  std::int32_t root_ = -1;
  std::size_t depth_ = 0;
};

/// Depot responsible for each treatment-required edge.
class Assignment {
 public:
  void set(EdgeId edge, DepotId depot) { map_[edge] = depot; }
  std::optional<DepotId> find(EdgeId edge) const;
  DepotId at(EdgeId edge) const;
  std::size_t size() const noexcept { return map_.size(); }
  const std::map<EdgeId, DepotId>& entries() const noexcept { return map_; }

  /// Edges per depot; every fleet depot appears, possibly with no edges.
  std::map<DepotId, std::vector<EdgeId>> by_depot(const FleetSpec& fleet) const;

  /// Total over the network's required edges, and only known depots.
  void validate(const RoadNetwork& network, const FleetSpec& fleet) const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::map<EdgeId, DepotId> map_;
};

/// Straight-line nearest depot to each required edge's midpoint.
Assignment nearest_depot_assignment(const RoadNetwork& network,
                                    std::span<const Depot> depots);

struct MinMax {
  double min = 0.0;
  double max = 0.0;
  double apply(double v) const noexcept {
    return max > min ? (v - min) / (max - min) : 0.0;
  }
};

struct FeatureNormalization {
  MinMax x, y, length, speed, lanes, depot_distance;
};

struct SegmentFeatures {
  EdgeId edge{};
  // [mid_x, mid_y, length, speed_limit, lanes, dist_depot_0, ...]
  std::vector<double> values;
};

struct FeatureSet {
  std::vector<SegmentFeatures> rows;  // ascending edge id
  FeatureNormalization norm;
  std::size_t dim = 0;
};

inline constexpr std::size_t kBaseFeatureCount = 5;

FeatureSet encode_features(const RoadNetwork& network,
                           std::span<const Depot> depots);

std::string format_assignment_csv(const Assignment& assignment);
Assignment parse_assignment_csv(const std::string& text);

}  // namespace saltplan
