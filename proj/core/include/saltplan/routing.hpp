#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "saltplan/assignment.hpp"
#include "saltplan/fleet.hpp"
#include "saltplan/network.hpp"
#include "saltplan/shortest_path.hpp"

namespace saltplan {

enum class StepMode { treat, deadhead };

struct RouteStep {
  EdgeId edge{};
  StepMode mode = StepMode::deadhead;

  friend bool operator==(const RouteStep&, const RouteStep&) = default;
};

/// One vehicle, one salt load: leaves the depot node and returns to it.
struct Route {
  DepotId depot{};
  std::vector<RouteStep> steps;
  double duration_minutes = 0.0;
  double distance_km = 0.0;
  double salt_used_lane_km = 0.0;
  double emissions_kg = 0.0;
};

enum class ViolationRule {
  coverage_missing,
  coverage_duplicate,
  invalid_treatment,
  unknown_edge,
  unknown_depot,
  continuity,
  depot_start,
  depot_end,
  duration,
  distance,
  capacity,
  depot_capacity,
};

std::string to_string(ViolationRule rule);

struct Violation {
  ViolationRule rule{};
  bool hard = true;
  std::optional<std::size_t> route;
  std::optional<EdgeId> edge;
  std::optional<DepotId> depot;
  double quantity = 0.0;
  double limit = 0.0;
  double excess = 0.0;
  std::string message;
};

struct Plan {
  std::vector<Route> routes;
  double Z1_minutes = 0.0;
  double Z2_kg = 0.0;
  std::map<DepotId, int> vehicles_used;  // every fleet depot, possibly 0
  int total_vehicles = 0;                // NoV
  std::vector<Violation> violations;

  std::size_t hard_violation_count() const;
};

enum class DepotCapacityMode { soft, hard };
enum class Selection { nearest, farthest };

struct RouteMetrics {
  double minutes = 0.0;
  double km = 0.0;
  double salt_lane_km = 0.0;
  double kg_co2 = 0.0;
};

/// Step time: treated edges at the operating speed, everything else at the
/// speed limit.
double step_hours(const RoadNetwork& network, const VehicleClass& vehicle,
                  const RoadEdge& edge, StepMode mode);

/// Recomputes route totals from its steps. Unknown edges raise
/// ValidationError.
RouteMetrics measure_route(const Route& route, const RoadNetwork& network,
                           const VehicleClass& vehicle);

/// Per-step cumulative (km, minutes, kg CO2), same fold as measure_route.
std::vector<RouteMetrics> cumulative_metrics(const Route& route,
                                             const RoadNetwork& network,
                                             const VehicleClass& vehicle);

/// Makespan in minutes, recomputed from steps; 0 for an empty plan.
double evaluate_Z1(const Plan& plan, const RoadNetwork& network,
                   const VehicleClass& vehicle);
/// Total fleet emissions over every traversed kilometre.
double evaluate_Z2(const Plan& plan, const VehicleClass& vehicle);

/// Route-local rules: known edges, continuity, depot start/end, duration,
/// distance and salt capacity.
std::vector<Violation> check_route(const Route& route, std::size_t route_index,
                                   const RoadNetwork& network,
                                   const FleetSpec& fleet);

/// All rules. Returns an empty list iff the plan is fully feasible (with
/// depot over-use listed but flagged soft under DepotCapacityMode::soft).
std::vector<Violation> check_feasibility(
    const Plan& plan, const Assignment& assignment, const RoadNetwork& network,
    const FleetSpec& fleet,
    DepotCapacityMode depot_mode = DepotCapacityMode::soft);

/// Constructive routing for one depot. Throws UnroutableEdgeError when an
/// edge cannot be served even as a route's only task.
std::vector<Route> solve_depot(const RoadNetwork& network, const Depot& depot,
                               std::span<const EdgeId> assigned_edges,
                               const VehicleClass& vehicle,
                               Selection selection = Selection::nearest,
                               PathCache* cache = nullptr);

struct SolveOptions {
  Selection selection = Selection::nearest;
  DepotCapacityMode depot_mode = DepotCapacityMode::soft;
};

Plan solve_assignment(const RoadNetwork& network, const Assignment& assignment,
                      const FleetSpec& fleet, const SolveOptions& options = {},
                      PathCache* cache = nullptr);

/// Fills Z1, Z2, vehicle counts and violations from the routes.
void finalize_plan(Plan& plan, const Assignment& assignment,
                   const RoadNetwork& network, const FleetSpec& fleet,
                   DepotCapacityMode depot_mode);

}  // namespace saltplan
