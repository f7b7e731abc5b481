#include "saltplan/fleet.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

namespace saltplan {

void VehicleClass::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      throw ValidationError(fmt::format("vehicle.{} must be > 0, got {}", name, v));
    }
  };
  positive(op_speed_cap, "op_speed_cap");
  positive(capacity_lane_km, "capacity_lane_km");
  positive(fuel_rate_l_per_km, "fuel_rate_l_per_km");
  positive(emission_factor_kg_per_l, "emission_factor");
  positive(max_route_minutes, "max_route_minutes");
  positive(max_route_km, "max_route_km");
  if (op_cost_per_km < 0.0 || weight_kg < 0.0) {
    throw ValidationError("vehicle.op_cost_per_km and weight_kg must be >= 0");
  }
}

void FleetSpec::validate() const {
  if (depots.empty()) throw ValidationError("fleet: at least one depot required");
  std::set<std::int64_t> ids;
  for (const auto& d : depots) {
    if (!ids.insert(raw(d.id)).second) {
      throw ValidationError(fmt::format("fleet: duplicate depot id {}", raw(d.id)));
    }
    if (d.max_vehicles < 1) {
      throw ValidationError(
          fmt::format("depot {}: max_vehicles must be >= 1", raw(d.id)));
    }
  }
  if (!std::is_sorted(depots.begin(), depots.end(),
                      [](const Depot& a, const Depot& b) { return a.id < b.id; })) {
    throw ValidationError("fleet: depots must be sorted by id");
  }
  vehicle.validate();
}

std::size_t FleetSpec::depot_index(DepotId id) const {
  auto it = std::lower_bound(
      depots.begin(), depots.end(), id,
      [](const Depot& d, DepotId key) { return d.id < key; });
  if (it == depots.end() || it->id != id) {
    throw ValidationError(fmt::format("unknown depot {}", raw(id)));
  }
  return static_cast<std::size_t>(it - depots.begin());
}

double effective_speed(const VehicleClass& vehicle, const RoadEdge& edge) noexcept {
  return std::min(edge.speed_limit, vehicle.op_speed_cap);
}

double salt_load(const RoadEdge& edge) {
  if (!edge.requires_treatment) {
    throw std::logic_error(fmt::format(
        "salt_load: edge {} does not require treatment", raw(edge.id)));
  }
  return edge.length_km * edge.lanes;
}

FleetSpec parse_fleet_json(const std::string& text) {
  FleetSpec fleet;
  try {
    auto j = nlohmann::json::parse(text);
    for (const auto& d : j.at("depots")) {
      fleet.depots.push_back({DepotId{d.at("id").get<std::int64_t>()},
                              NodeId{d.at("node").get<std::int64_t>()},
                              d.value("max_vehicles", 12)});
    }
    if (j.contains("vehicle")) {
      const auto& v = j.at("vehicle");
      auto& out = fleet.vehicle;
      out.op_speed_cap = v.value("op_speed_cap", out.op_speed_cap);
      out.capacity_lane_km = v.value("capacity_lane_km", out.capacity_lane_km);
      out.fuel_rate_l_per_km = v.value("fuel_rate_l_per_km", out.fuel_rate_l_per_km);
      out.emission_factor_kg_per_l =
          v.value("emission_factor", out.emission_factor_kg_per_l);
      out.max_route_minutes = v.value("max_route_minutes", out.max_route_minutes);
      out.max_route_km = v.value("max_route_km", out.max_route_km);
      out.op_cost_per_km = v.value("op_cost_per_km", out.op_cost_per_km);
      out.weight_kg = v.value("weight_kg", out.weight_kg);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("fleet.json: {}", e.what()));
  }
  std::sort(fleet.depots.begin(), fleet.depots.end(),
            [](const Depot& a, const Depot& b) { return a.id < b.id; });
  fleet.validate();
  return fleet;
}

std::string format_fleet_json(const FleetSpec& fleet) {
  nlohmann::ordered_json j;
  j["depots"] = nlohmann::ordered_json::array();
  for (const auto& d : fleet.depots) {
    nlohmann::ordered_json dj;
    dj["id"] = raw(d.id);
    dj["node"] = raw(d.node);
    dj["max_vehicles"] = d.max_vehicles;
    j["depots"].push_back(dj);
  }
  const auto& v = fleet.vehicle;
  auto& vj = j["vehicle"];
  vj["op_speed_cap"] = v.op_speed_cap;
  vj["capacity_lane_km"] = v.capacity_lane_km;
  vj["fuel_rate_l_per_km"] = v.fuel_rate_l_per_km;
  vj["emission_factor"] = v.emission_factor_kg_per_l;
  vj["max_route_minutes"] = v.max_route_minutes;
  vj["max_route_km"] = v.max_route_km;
  vj["op_cost_per_km"] = v.op_cost_per_km;
  vj["weight_kg"] = v.weight_kg;
  return j.dump(2) + "\n";
}

void require_depots_present(const RoadNetwork& network, const FleetSpec& fleet) {
  for (const auto& d : fleet.depots) {
    if (!network.find_node(d.node)) {
      throw DepotUnreachableError(
          d.id, fmt::format("depot {} (node {}) is not in the network",
                            raw(d.id), raw(d.node)));
    }
  }
}

}  // namespace saltplan
