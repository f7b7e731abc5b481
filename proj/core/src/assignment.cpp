#include "saltplan/assignment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "saltplan/io.hpp"

namespace saltplan {

// _____________________________________________________________________________
KdTree::KdTree(std::vector<Point> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("KdTree: empty point set");
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(order, 0, order.size(), 0);
}

std::int32_t KdTree::build(std::vector<std::size_t>& order, std::size_t lo,
                           std::size_t hi, std::size_t level) {
  if (lo >= hi) return -1;
  depth_ = std::max(depth_, level + 1);
  int axis = static_cast<int>(level % 2);
  std::size_t mid = lo + (hi - lo) / 2;
  auto key = [&](std::size_t i) {
    return axis == 0 ? points_[i].x : points_[i].y;
  };
  std::nth_element(order.begin() + lo, order.begin() + mid, order.begin() + hi,
                   [&](std::size_t a, std::size_t b) {
                     return key(a) < key(b) || (key(a) == key(b) && a < b);
                   });
  auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({order[mid], axis});
  std::int32_t left = build(order, lo, mid, level + 1);
  std::int32_t right = build(order, mid + 1, hi, level + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(std::int32_t node, Point q, std::size_t& best,
                    double& best_d2) const {
  if (node < 0) return;
  const auto& n = nodes_[node];
  const auto& p = points_[n.point];
  double dx = p.x - q.x, dy = p.y - q.y;
  double d2 = dx * dx + dy * dy;
  if (d2 < best_d2 || (d2 == best_d2 && n.point < best)) {
    best = n.point;
    best_d2 = d2;
  }
  double diff = n.axis == 0 ? q.x - p.x : q.y - p.y;
  std::int32_t near = diff < 0 ? n.left : n.right;
  std::int32_t far = diff < 0 ? n.right : n.left;
  search(near, q, best, best_d2);
  // `<=` so that equidistant points on the far side can still win the tie.
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

std::size_t KdTree::nearest(Point query) const {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, query, best, best_d2);
  return best;
}

// _____________________________________________________________________________
std::optional<DepotId> Assignment::find(EdgeId edge) const {
  auto it = map_.find(edge);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

DepotId Assignment::at(EdgeId edge) const {
  if (auto d = find(edge)) return *d;
  throw ValidationError(fmt::format("edge {} has no depot assignment", raw(edge)));
}

std::map<DepotId, std::vector<EdgeId>> Assignment::by_depot(
    const FleetSpec& fleet) const {
  std::map<DepotId, std::vector<EdgeId>> out;
  for (const auto& d : fleet.depots) out[d.id];
  for (const auto& [edge, depot] : map_) out[depot].push_back(edge);
  return out;
}

void Assignment::validate(const RoadNetwork& network, const FleetSpec& fleet) const {
  for (auto idx : network.required_edges()) {
    if (!map_.count(network.edge(idx).id)) {
      throw ValidationError(fmt::format("required edge {} is not assigned",
                                        raw(network.edge(idx).id)));
    }
  }
  for (const auto& [edge, depot] : map_) {
    auto idx = network.find_edge(edge);
    if (!idx || !network.edge(*idx).requires_treatment) {
      throw ValidationError(fmt::format(
          "assigned edge {} is not a treatment-required edge", raw(edge)));
    }
    fleet.depot_index(depot);
  }
}

Assignment nearest_depot_assignment(const RoadNetwork& network,
                                    std::span<const Depot> depots) {
  if (depots.empty()) throw ValidationError("nearest_depot_assignment: no depots");
  // Index order in the tree is depot-id order, so the tree's lowest-index tie
  // rule is the lowest-depot-id rule.
  std::vector<const Depot*> sorted;
  for (const auto& d : depots) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(),
            [](const Depot* a, const Depot* b) { return a->id < b->id; });
  std::vector<Point> points;
  for (const auto* d : sorted) points.push_back(network.node(network.node_index(d->node)).pos);
  KdTree tree(std::move(points));

  Assignment out;
  for (auto idx : network.required_edges()) {
    out.set(network.edge(idx).id, sorted[tree.nearest(network.midpoint(idx))]->id);
  }
  return out;
}

// _____________________________________________________________________________
namespace {

MinMax range_of(const std::vector<double>& values) {
  if (values.empty()) return {};
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

}  // namespace

FeatureSet encode_features(const RoadNetwork& network,
                           std::span<const Depot> depots) {
  std::vector<const Depot*> sorted;
  for (const auto& d : depots) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(),
            [](const Depot* a, const Depot* b) { return a->id < b->id; });
  std::vector<Point> depot_pos;
  for (const auto* d : sorted) depot_pos.push_back(network.node(network.node_index(d->node)).pos);

  const auto& req = network.required_edges();
  std::vector<double> xs, ys, lens, speeds, lanes, dists;
  std::vector<Point> mids;
  for (auto idx : req) {
    const auto& e = network.edge(idx);
    Point m = network.midpoint(idx);
    mids.push_back(m);
    xs.push_back(m.x);
    ys.push_back(m.y);
    lens.push_back(e.length_km);
    speeds.push_back(e.speed_limit);
    lanes.push_back(static_cast<double>(e.lanes));
    for (const auto& p : depot_pos) dists.push_back(std::hypot(m.x - p.x, m.y - p.y));
  }

  FeatureSet out;
  out.dim = kBaseFeatureCount + sorted.size();
  // Depot distances share one range so the policy can compare depots.
  out.norm = {range_of(xs),     range_of(ys),    range_of(lens),
              range_of(speeds), range_of(lanes), range_of(dists)};
  const auto& n = out.norm;
  const std::size_t k = sorted.size();
  for (std::size_t r = 0; r < req.size(); ++r) {
    SegmentFeatures f;
    f.edge = network.edge(req[r]).id;
    f.values.reserve(out.dim);
    f.values.push_back(n.x.apply(xs[r]));
    f.values.push_back(n.y.apply(ys[r]));
    f.values.push_back(n.length.apply(lens[r]));
    f.values.push_back(n.speed.apply(speeds[r]));
    f.values.push_back(n.lanes.apply(lanes[r]));
    for (std::size_t d = 0; d < k; ++d) {
      f.values.push_back(n.depot_distance.apply(dists[r * k + d]));
    }
    out.rows.push_back(std::move(f));
  }
  return out;
}

std::string format_assignment_csv(const Assignment& assignment) {
  std::string out = "edge_id,depot_id\n";
  for (const auto& [edge, depot] : assignment.entries()) {
    out += fmt::format("{},{}\n", raw(edge), raw(depot));
  }
  return out;
}

Assignment parse_assignment_csv(const std::string& text) {
  auto table = io::CsvTable::parse(text);
  auto c_edge = table.require_column("edge_id");
  auto c_depot = table.require_column("depot_id");
  Assignment out;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto where = fmt::format("assignment.csv line {}", table.line_of(r));
    out.set(EdgeId{io::parse_int(table.at(r, c_edge), where)},
            DepotId{io::parse_int(table.at(r, c_depot), where)});
  }
  return out;
}

}  // namespace saltplan
