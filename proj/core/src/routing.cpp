#include "saltplan/routing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace saltplan {

std::string to_string(ViolationRule rule) {
  switch (rule) {
    case ViolationRule::coverage_missing: return "coverage_missing";
    case ViolationRule::coverage_duplicate: return "coverage_duplicate";
    case ViolationRule::invalid_treatment: return "invalid_treatment";
    case ViolationRule::unknown_edge: return "unknown_edge";
    case ViolationRule::unknown_depot: return "unknown_depot";
    case ViolationRule::continuity: return "continuity";
    case ViolationRule::depot_start: return "depot_start";
    case ViolationRule::depot_end: return "depot_end";
    case ViolationRule::duration: return "duration";
    case ViolationRule::distance: return "distance";
    case ViolationRule::capacity: return "capacity";
    case ViolationRule::depot_capacity: return "depot_capacity";
  }
  return "unknown";
}

std::size_t Plan::hard_violation_count() const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [](const Violation& v) { return v.hard; }));
}

double step_hours(const RoadNetwork& network, const VehicleClass& vehicle,
                  const RoadEdge& edge, StepMode mode) {
  double speed = mode == StepMode::treat ? effective_speed(vehicle, edge)
                                         : edge.speed_limit;
  return network.hours_at(edge.length_km, speed);
}

std::vector<RouteMetrics> cumulative_metrics(const Route& route,
                                             const RoadNetwork& network,
                                             const VehicleClass& vehicle) {
  std::vector<RouteMetrics> out;
  out.reserve(route.steps.size());
  const double kg_per_km = vehicle.fuel_rate_l_per_km * vehicle.emission_factor_kg_per_l;
  double hours = 0.0, km = 0.0, salt = 0.0;
  for (const auto& s : route.steps) {
    const auto& e = network.edge_by_id(s.edge);
    hours += step_hours(network, vehicle, e, s.mode);
    km += e.length_km;
    if (s.mode == StepMode::treat) salt += e.length_km * e.lanes;
    out.push_back({hours * 60.0, km, salt, km * kg_per_km});
  }
  return out;
}

RouteMetrics measure_route(const Route& route, const RoadNetwork& network,
                           const VehicleClass& vehicle) {
  auto cum = cumulative_metrics(route, network, vehicle);
  return cum.empty() ? RouteMetrics{} : cum.back();
}

double evaluate_Z1(const Plan& plan, const RoadNetwork& network,
                   const VehicleClass& vehicle) {
  double z1 = 0.0;
  for (const auto& r : plan.routes) {
    z1 = std::max(z1, measure_route(r, network, vehicle).minutes);
  }
  return z1;
}

double evaluate_Z2(const Plan& plan, const VehicleClass& vehicle) {
  double z2 = 0.0;
  for (const auto& r : plan.routes) {
    z2 += r.distance_km * vehicle.fuel_rate_l_per_km * vehicle.emission_factor_kg_per_l;
  }
  return z2;
}

// _____________________________________________________________________________
namespace {

Violation make(ViolationRule rule, std::optional<std::size_t> route,
               std::string message) {
  Violation v;
  v.rule = rule;
  v.route = route;
  v.message = std::move(message);
  return v;
}

}  // namespace

std::vector<Violation> check_route(const Route& route, std::size_t route_index,
                                   const RoadNetwork& network,
                                   const FleetSpec& fleet) {
  std::vector<Violation> out;
  const auto& vehicle = fleet.vehicle;
  std::optional<std::size_t> depot_node;
  auto depot_it = std::find_if(fleet.depots.begin(), fleet.depots.end(),
                               [&](const Depot& d) { return d.id == route.depot; });
  if (depot_it == fleet.depots.end()) {
    auto v = make(ViolationRule::unknown_depot, route_index,
                  fmt::format("route {} belongs to unknown depot {}", route_index,
                              raw(route.depot)));
    v.depot = route.depot;
    out.push_back(std::move(v));
  } else {
    depot_node = network.find_node(depot_it->node);
  }

  std::vector<std::size_t> idx;
  idx.reserve(route.steps.size());
  for (const auto& s : route.steps) {
    auto e = network.find_edge(s.edge);
    if (!e) {
      auto v = make(ViolationRule::unknown_edge, route_index,
                    fmt::format("route {} uses unknown edge {}", route_index,
                                raw(s.edge)));
      v.edge = s.edge;
      out.push_back(std::move(v));
      return out;
    }
    idx.push_back(*e);
  }
  if (idx.empty()) return out;

  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (network.head(idx[i - 1]) != network.tail(idx[i])) {
      auto v = make(ViolationRule::continuity, route_index,
                    fmt::format("route {}: edge {} does not continue from edge {}",
                                route_index, raw(route.steps[i].edge),
                                raw(route.steps[i - 1].edge)));
      v.edge = route.steps[i].edge;
      out.push_back(std::move(v));
    }
  }
  if (depot_node) {
    if (network.tail(idx.front()) != *depot_node) {
      auto v = make(ViolationRule::depot_start, route_index,
                    fmt::format("route {} does not depart depot {}", route_index,
                                raw(route.depot)));
      v.depot = route.depot;
      v.edge = route.steps.front().edge;
      out.push_back(std::move(v));
    }
    if (network.head(idx.back()) != *depot_node) {
      auto v = make(ViolationRule::depot_end, route_index,
                    fmt::format("route {} does not return to depot {}", route_index,
                                raw(route.depot)));
      v.depot = route.depot;
      v.edge = route.steps.back().edge;
      out.push_back(std::move(v));
    }
  }

  auto m = measure_route(route, network, vehicle);
  auto limit = [&](ViolationRule rule, double quantity, double cap, const char* what) {
    if (quantity > cap) {
      auto v = make(rule, route_index,
                    fmt::format("route {}: {} {} exceeds limit {}", route_index,
                                what, quantity, cap));
      v.quantity = quantity;
      v.limit = cap;
      v.excess = quantity - cap;
      out.push_back(std::move(v));
    }
  };
  limit(ViolationRule::duration, m.minutes, vehicle.max_route_minutes, "duration (min)");
  limit(ViolationRule::distance, m.km, vehicle.max_route_km, "distance (km)");
  limit(ViolationRule::capacity, m.salt_lane_km, vehicle.capacity_lane_km,
        "salt (lane-km)");
  return out;
}

std::vector<Violation> check_feasibility(const Plan& plan,
                                         const Assignment& assignment,
                                         const RoadNetwork& network,
                                         const FleetSpec& fleet,
                                         DepotCapacityMode depot_mode) {
  std::vector<Violation> out;
  std::map<EdgeId, int> treated;
  std::map<DepotId, int> used;
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const auto& route = plan.routes[r];
    ++used[route.depot];
    auto local = check_route(route, r, network, fleet);
    out.insert(out.end(), std::make_move_iterator(local.begin()),
               std::make_move_iterator(local.end()));
    for (const auto& s : route.steps) {
      if (s.mode != StepMode::treat) continue;
      ++treated[s.edge];
      auto e = network.find_edge(s.edge);
      if (!e) continue;  // reported as unknown_edge
      auto owner = assignment.find(s.edge);
      if (!network.edge(*e).requires_treatment || !owner || *owner != route.depot) {
        auto v = make(ViolationRule::invalid_treatment, r,
                      fmt::format("route {} treats edge {} which is not assigned "
                                  "to depot {}",
                                  r, raw(s.edge), raw(route.depot)));
        v.edge = s.edge;
        v.depot = route.depot;
        out.push_back(std::move(v));
      }
    }
  }
  for (auto idx : network.required_edges()) {
    EdgeId id = network.edge(idx).id;
    int count = treated.count(id) ? treated[id] : 0;
    if (count == 0) {
      auto v = make(ViolationRule::coverage_missing, std::nullopt,
                    fmt::format("edge {} is never treated", raw(id)));
      v.edge = id;
      out.push_back(std::move(v));
    } else if (count > 1) {
      auto v = make(ViolationRule::coverage_duplicate, std::nullopt,
                    fmt::format("edge {} treated twice ({} times)", raw(id), count));
      v.edge = id;
      v.quantity = count;
      v.limit = 1;
      v.excess = count - 1;
      out.push_back(std::move(v));
    }
  }
  for (const auto& d : fleet.depots) {
    int n = used.count(d.id) ? used[d.id] : 0;
    if (n > d.max_vehicles) {
      auto v = make(ViolationRule::depot_capacity, std::nullopt,
                    fmt::format("depot {} uses {} vehicles, capacity {}", raw(d.id),
                                n, d.max_vehicles));
      v.hard = depot_mode == DepotCapacityMode::hard;
      v.depot = d.id;
      v.quantity = n;
      v.limit = d.max_vehicles;
      v.excess = n - d.max_vehicles;
      out.push_back(std::move(v));
    }
  }
  return out;
}

// _____________________________________________________________________________
namespace {

// Admission margin so that re-measured routes never exceed a limit through
// floating-point reassociation.
constexpr double kAdmissionSlack = 1e-9;

struct Task {
  std::size_t edge;  // network index
  EdgeId id;
  std::size_t tail, head;
  double treat_hours;
  double km;
  double load;
};

void append_path(Route& route, const RoadNetwork& network,
                 const std::vector<std::size_t>& path) {
  for (auto e : path) route.steps.push_back({network.edge(e).id, StepMode::deadhead});
}

}  // namespace

std::vector<Route> solve_depot(const RoadNetwork& network, const Depot& depot,
                               std::span<const EdgeId> assigned_edges,
                               const VehicleClass& vehicle, Selection selection,
                               PathCache* cache) {
  std::optional<PathCache> local_cache;
  if (!cache) cache = &local_cache.emplace(network);

  const std::size_t depot_node = network.node_index(depot.node);
  const double max_hours = vehicle.max_route_minutes / 60.0 * (1.0 - kAdmissionSlack);
  const double max_km = vehicle.max_route_km * (1.0 - kAdmissionSlack);
  const double max_salt = vehicle.capacity_lane_km * (1.0 - kAdmissionSlack);

  auto from_depot = cache->from(depot_node);
  auto to_depot = cache->to(depot_node);

  std::vector<Task> pending;
  pending.reserve(assigned_edges.size());
  for (auto id : assigned_edges) {
    std::size_t e = network.edge_index(id);
    const auto& edge = network.edge(e);
    Task t{e,
           id,
           network.tail(e),
           network.head(e),
           step_hours(network, vehicle, edge, StepMode::treat),
           edge.length_km,
           salt_load(edge)};
    bool ok = from_depot->reachable(t.tail) && to_depot->reachable(t.head) &&
              from_depot->hours(t.tail) + t.treat_hours + to_depot->hours(t.head) <=
                  max_hours &&
              from_depot->km(t.tail) + t.km + to_depot->km(t.head) <= max_km &&
              t.load <= max_salt;
    if (!ok) {
      throw UnroutableEdgeError(
          id, fmt::format("edge {} cannot be served from depot {} within the "
                          "route limits",
                          raw(id), raw(depot.id)));
    }
    pending.push_back(t);
  }
  std::sort(pending.begin(), pending.end(),
            [](const Task& a, const Task& b) { return a.id < b.id; });

  std::vector<Route> routes;
  while (!pending.empty()) {
    Route route;
    route.depot = depot.id;
    double hours = 0.0, km = 0.0, salt = 0.0;
    std::size_t current = depot_node;

    auto take = [&](std::size_t pos, const ShortestPathTree& tree) {
      const Task t = pending[pos];
      append_path(route, network, tree.path(t.tail));
      route.steps.push_back({t.id, StepMode::treat});
      hours += tree.hours(t.tail) + t.treat_hours;
      km += tree.km(t.tail) + t.km;
      salt += t.load;
      current = t.head;
      pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pos));
    };

    // Seed with the task farthest from the depot; ties go to the lowest id.
    std::size_t seed = 0;
    for (std::size_t i = 1; i < pending.size(); ++i) {
      if (from_depot->hours(pending[i].tail) > from_depot->hours(pending[seed].tail)) {
        seed = i;
      }
    }
    take(seed, *from_depot);

    while (!pending.empty()) {
      auto tree = cache->from(current);
      std::optional<std::size_t> pick;
      double pick_hours = 0.0;
      for (std::size_t i = 0; i < pending.size(); ++i) {
        const auto& t = pending[i];
        if (!tree->reachable(t.tail)) continue;
        double leg = tree->hours(t.tail);
        if (hours + leg + t.treat_hours + to_depot->hours(t.head) > max_hours) continue;
        if (km + tree->km(t.tail) + t.km + to_depot->km(t.head) > max_km) continue;
        if (salt + t.load > max_salt) continue;
        bool better = !pick || (selection == Selection::nearest ? leg < pick_hours
                                                                : leg > pick_hours);
        if (better) {
          pick = i;
          pick_hours = leg;
        }
      }
      if (!pick) break;
      take(*pick, *tree);
    }

    append_path(route, network, to_depot->path(current));
    auto m = measure_route(route, network, vehicle);
    route.duration_minutes = m.minutes;
    route.distance_km = m.km;
    route.salt_used_lane_km = m.salt_lane_km;
    route.emissions_kg = m.kg_co2;
    routes.push_back(std::move(route));
  }
  return routes;
}

void finalize_plan(Plan& plan, const Assignment& assignment,
                   const RoadNetwork& network, const FleetSpec& fleet,
                   DepotCapacityMode depot_mode) {
  plan.vehicles_used.clear();
  for (const auto& d : fleet.depots) plan.vehicles_used[d.id] = 0;
  for (const auto& r : plan.routes) ++plan.vehicles_used[r.depot];
  plan.total_vehicles = static_cast<int>(plan.routes.size());
  plan.Z1_minutes = evaluate_Z1(plan, network, fleet.vehicle);
  plan.Z2_kg = evaluate_Z2(plan, fleet.vehicle);
  plan.violations = check_feasibility(plan, assignment, network, fleet, depot_mode);
}

Plan solve_assignment(const RoadNetwork& network, const Assignment& assignment,
                      const FleetSpec& fleet, const SolveOptions& options,
                      PathCache* cache) {
  std::optional<PathCache> local_cache;
  if (!cache) cache = &local_cache.emplace(network);
  Plan plan;
  for (const auto& [depot_id, edges] : assignment.by_depot(fleet)) {
    if (edges.empty()) continue;
    auto routes = solve_depot(network, fleet.depot(depot_id), edges, fleet.vehicle,
                              options.selection, cache);
    for (auto& r : routes) plan.routes.push_back(std::move(r));
  }
  finalize_plan(plan, assignment, network, fleet, options.depot_mode);
  return plan;
}

}  // namespace saltplan
