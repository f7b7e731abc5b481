#pragma once

#include <string>
#include <vector>

#include "saltplan/network.hpp"

namespace saltplan {

struct Depot {
  DepotId id{};
  NodeId node{};
  int max_vehicles = 1;
};

/// Vehicle parameters. Speeds are in the instance speed unit.
struct VehicleClass {
  static constexpr double kDefaultOpSpeedCap = 50.0;
  static constexpr double kDefaultCapacityLaneKm = 166.0;
  static constexpr double kDefaultFuelRateLPerKm = 0.35;
  static constexpr double kDefaultEmissionFactorKgPerL = 2.51;  // diesel
  static constexpr double kDefaultMaxRouteMinutes = 120.0;
  static constexpr double kDefaultMaxRouteKm = 630.0;

  double op_speed_cap = kDefaultOpSpeedCap;
  double capacity_lane_km = kDefaultCapacityLaneKm;
  double fuel_rate_l_per_km = kDefaultFuelRateLPerKm;
  double emission_factor_kg_per_l = kDefaultEmissionFactorKgPerL;
  double max_route_minutes = kDefaultMaxRouteMinutes;
  double max_route_km = kDefaultMaxRouteKm;
  // Carried for reporting only; no objective or constraint reads them.
  double op_cost_per_km = 0.0;
  double weight_kg = 0.0;

  void validate() const;  // throws ValidationError
};

struct FleetSpec {
  std::vector<Depot> depots;  // sorted by id
  VehicleClass vehicle;

  void validate() const;
  /// Position of `id` in `depots` (throws ValidationError if absent).
  std::size_t depot_index(DepotId id) const;
  const Depot& depot(DepotId id) const { return depots[depot_index(id)]; }
};

/// Operating speed on an edge: min(speed limit, vehicle cap).
double effective_speed(const VehicleClass& vehicle, const RoadEdge& edge) noexcept;

/// Salt demand of a treated edge in lane-km. Throws std::logic_error when the
/// edge does not require treatment.
double salt_load(const RoadEdge& edge);

FleetSpec parse_fleet_json(const std::string& text);
std::string format_fleet_json(const FleetSpec& fleet);

/// Throws DepotUnreachableError for the first depot whose node is missing.
void require_depots_present(const RoadNetwork& network, const FleetSpec& fleet);

}  // namespace saltplan
