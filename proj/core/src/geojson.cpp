#include "saltplan/geojson.hpp"

#include <nlohmann/json.hpp>

namespace saltplan {

using json = nlohmann::ordered_json;

namespace {

json coordinate(Point p) { return json::array({p.x, p.y}); }

}  // namespace

std::string export_geojson(const Plan& plan, const RoadNetwork& network,
                           const FleetSpec& fleet) {
  json features = json::array();
  for (const auto& d : fleet.depots) {
    Point p = network.node(network.node_index(d.node)).pos;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", coordinate(p)}}},
                        {"properties",
                         {{"kind", "depot"},
                          {"depot_id", raw(d.id)},
                          {"node_id", raw(d.node)},
                          {"max_vehicles", d.max_vehicles}}}});
  }

  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const auto& route = plan.routes[r];
    auto cum = cumulative_metrics(route, network, fleet.vehicle);
    json coords = json::array();
    json segments = json::array();
    bool fallback = false;
    for (std::size_t i = 0; i < route.steps.size(); ++i) {
      const auto& step = route.steps[i];
      std::size_t e = network.edge_index(step.edge);
      Polyline line = network.edge(e).geometry;
      if (line.size() < 2) {
        fallback = true;
        line = {network.node(network.tail(e)).pos, network.node(network.head(e)).pos};
      }
      std::size_t start = coords.empty() ? 0 : coords.size() - 1;
      for (std::size_t k = 0; k < line.size(); ++k) {
        // Consecutive steps share their junction point.
        if (k == 0 && !coords.empty()) continue;
        coords.push_back(coordinate(line[k]));
      }
      segments.push_back({{"edge_id", raw(step.edge)},
                          {"mode", step.mode == StepMode::treat ? "treat" : "deadhead"},
                          {"start", start},
                          {"end", coords.size() - 1},
                          {"cum_km", cum[i].km},
                          {"cum_minutes", cum[i].minutes},
                          {"cum_kg_co2", cum[i].kg_co2}});
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties",
                         {{"kind", "route"},
                          {"route_id", r + 1},
                          {"depot_id", raw(route.depot)},
                          {"duration_min", route.duration_minutes},
                          {"distance_km", route.distance_km},
                          {"salt_lane_km", route.salt_used_lane_km},
                          {"kg_co2", route.emissions_kg},
                          {"geometry_fallback", fallback},
                          {"segments", segments}}}});
  }
  json fc = {{"type", "FeatureCollection"}, {"features", features}};
  return fc.dump() + "\n";
}

}  // namespace saltplan
