#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "saltplan/fleet.hpp"
#include "saltplan/network.hpp"
#include "saltplan/routing.hpp"

namespace saltplan::test {

/// Small hand-built networks. Directed ids follow the 2s / 2s+1 convention.
struct Builder {
  std::vector<Node> nodes;
  std::vector<EdgeRecord> rows;
  SpeedUnit unit = SpeedUnit::kmh;

  Builder& node(std::int64_t id, double x = 0.0, double y = 0.0) {
    nodes.push_back({NodeId{id}, {x, y}});
    return *this;
  }
  Builder& road(std::int64_t row, std::int64_t from, std::int64_t to, double km,
                double speed, int lanes = 1, bool oneway = true, bool treat = false) {
    EdgeRecord r;
    r.row_id = row;
    r.from = NodeId{from};
    r.to = NodeId{to};
    r.length_km = km;
    r.speed = speed;
    r.lanes = lanes;
    r.oneway = oneway;
    r.treat = treat;
    rows.push_back(r);
    return *this;
  }
  RoadNetwork build() const {
    return RoadNetwork(nodes, expand_records(rows), InstanceHeader{"test", unit});
  }
};

inline EdgeId fwd(std::int64_t row) { return EdgeId{2 * row}; }
inline EdgeId rev(std::int64_t row) { return EdgeId{2 * row + 1}; }

inline FleetSpec one_depot(std::int64_t node, int max_vehicles = 12) {
  FleetSpec f;
  f.depots.push_back({DepotId{1}, NodeId{node}, max_vehicles});
  return f;
}

/// Plain Dijkstra over travel hours, independent of the library's tree.
inline std::vector<double> reference_hours(const RoadNetwork& net, std::size_t src) {
  const double inf = INFINITY;
  std::vector<double> d(net.node_count(), inf);
  std::vector<bool> done(net.node_count(), false);
  d[src] = 0.0;
  for (std::size_t it = 0; it < net.node_count(); ++it) {
    std::size_t u = net.node_count();
    for (std::size_t v = 0; v < net.node_count(); ++v) {
      if (!done[v] && d[v] < inf && (u == net.node_count() || d[v] < d[u])) u = v;
    }
    if (u == net.node_count()) break;
    done[u] = true;
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
      if (net.tail(e) != u) continue;
      double nd = d[u] + net.travel_hours(e);
      if (nd < d[net.head(e)]) d[net.head(e)] = nd;
    }
  }
  return d;
}

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace saltplan::test
