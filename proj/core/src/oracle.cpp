#include "saltplan/oracle.hpp"

#include <fmt/format.h>

#include <limits>
#include <unordered_map>

namespace saltplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AllPairs {
  std::size_t n = 0;
  std::vector<double> hours, km;

  double h(std::size_t a, std::size_t b) const { return hours[a * n + b]; }
  double k(std::size_t a, std::size_t b) const { return km[a * n + b]; }
};

// Floyd-Warshall on deadhead time; km follows the time-optimal path.
AllPairs floyd_warshall(const RoadNetwork& net) {
  AllPairs ap;
  ap.n = net.node_count();
  ap.hours.assign(ap.n * ap.n, kInf);
  ap.km.assign(ap.n * ap.n, kInf);
  for (std::size_t v = 0; v < ap.n; ++v) {
    ap.hours[v * ap.n + v] = 0.0;
    ap.km[v * ap.n + v] = 0.0;
  }
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    std::size_t i = net.tail(e) * ap.n + net.head(e);
    double t = net.travel_hours(e);
    if (t < ap.hours[i]) {
      ap.hours[i] = t;
      ap.km[i] = net.edge(e).length_km;
    }
  }
  for (std::size_t m = 0; m < ap.n; ++m) {
    for (std::size_t a = 0; a < ap.n; ++a) {
      double am = ap.hours[a * ap.n + m];
      if (am == kInf) continue;
      for (std::size_t b = 0; b < ap.n; ++b) {
        double via = am + ap.hours[m * ap.n + b];
        if (via < ap.hours[a * ap.n + b]) {
          ap.hours[a * ap.n + b] = via;
          ap.km[a * ap.n + b] = ap.km[a * ap.n + m] + ap.km[m * ap.n + b];
        }
      }
    }
  }
  return ap;
}

struct Candidate {
  bool own_ok = false;
  bool checker_ok = false;
  Route route;
};

struct Search {
  const RoadNetwork& net;
  const Depot& depot;
  const VehicleClass& vehicle;
  const FleetSpec& fleet;
  const Assignment& assignment;
  const OracleOptions& options;
  AllPairs ap;
  std::vector<std::size_t> tasks;  // edge indices
  std::unordered_map<std::uint64_t, Candidate> memo;
  std::vector<std::vector<std::size_t>> routes;  // positions into tasks
  OracleResult* result;

  struct Found {
    double z1, z2;
    std::vector<std::uint64_t> keys;
  };
  std::vector<Found> feasible;

  static std::uint64_t key_of(const std::vector<std::size_t>& seq) {
    std::uint64_t k = 0;
    for (auto t : seq) k = k * 16 + t + 1;
    return k;
  }

  const Candidate& candidate(const std::vector<std::size_t>& seq) {
    auto key = key_of(seq);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    Candidate c;
    const std::size_t d = net.node_index(depot.node);
    double hours = 0.0, km = 0.0, salt = 0.0;
    std::size_t at = d;
    c.route.depot = depot.id;
    for (auto pos : seq) {
      std::size_t e = tasks[pos];
      const auto& edge = net.edge(e);
      hours += ap.h(at, net.tail(e)) +
               net.hours_at(edge.length_km, std::min(edge.speed_limit, vehicle.op_speed_cap));
      km += ap.k(at, net.tail(e)) + edge.length_km;
      salt += edge.length_km * edge.lanes;
      if (at != net.tail(e)) {
        auto leg = shortest_travel_time(net, net.node(at).id, net.node(net.tail(e)).id);
        for (auto s : leg.edges) c.route.steps.push_back({s, StepMode::deadhead});
      }
      c.route.steps.push_back({edge.id, StepMode::treat});
      at = net.head(e);
    }
    hours += ap.h(at, d);
    km += ap.k(at, d);
    if (at != d) {
      auto leg = shortest_travel_time(net, net.node(at).id, depot.node);
      for (auto s : leg.edges) c.route.steps.push_back({s, StepMode::deadhead});
    }
    c.own_ok = hours * 60.0 <= vehicle.max_route_minutes && km <= vehicle.max_route_km &&
               salt <= vehicle.capacity_lane_km;
    auto m = measure_route(c.route, net, vehicle);
    c.route.duration_minutes = m.minutes;
    c.route.distance_km = m.km;
    c.route.salt_used_lane_km = m.salt_lane_km;
    c.route.emissions_kg = m.kg_co2;
    c.checker_ok = check_route(c.route, 0, net, fleet).empty();
    ++result->routes_enumerated;
    if (c.own_ok != c.checker_ok) {
      ++result->route_disagreements;
      if (result->first_disagreement.empty()) {
        result->first_disagreement = fmt::format(
            "route of {} tasks: oracle says {}, checker says {}", seq.size(),
            c.own_ok ? "feasible" : "infeasible", c.checker_ok ? "feasible" : "infeasible");
      }
    }
    return memo.emplace(key, std::move(c)).first->second;
  }

  void leaf() {
    ++result->plans_enumerated;
    bool own_ok = true;
    std::vector<std::uint64_t> keys;
    Plan plan;
    for (const auto& seq : routes) {
      const auto& c = candidate(seq);
      own_ok = own_ok && c.own_ok;
      keys.push_back(key_of(seq));
      plan.routes.push_back(c.route);
    }
    if (options.check_all_plans || own_ok) {
      plan.violations = check_feasibility(plan, assignment, net, fleet);
      bool checker_ok = plan.hard_violation_count() == 0;
      if (checker_ok != own_ok) {
        ++result->plan_disagreements;
        if (result->first_disagreement.empty()) {
          result->first_disagreement =
              fmt::format("plan of {} routes: oracle says {}, checker says {}",
                          routes.size(), own_ok ? "feasible" : "infeasible",
                          checker_ok ? "feasible" : "infeasible");
        }
      }
    }
    if (!own_ok) return;
    ++result->feasible_plans;
    feasible.push_back({evaluate_Z1(plan, net, vehicle), evaluate_Z2(plan, vehicle),
                        std::move(keys)});
  }

  // Each task either opens a new route or is inserted at any position of an
  // existing one; this visits every set of ordered routes exactly once.
  void place(std::size_t next) {
    if (next == tasks.size()) {
      leaf();
      return;
    }
    for (std::size_t r = 0; r < routes.size(); ++r) {
      for (std::size_t p = 0; p <= routes[r].size(); ++p) {
        routes[r].insert(routes[r].begin() + static_cast<std::ptrdiff_t>(p), next);
        place(next + 1);
        routes[r].erase(routes[r].begin() + static_cast<std::ptrdiff_t>(p));
      }
    }
    routes.push_back({next});
    place(next + 1);
    routes.pop_back();
  }

  std::vector<Route> routes_of(const std::vector<std::uint64_t>& keys) const {
    std::vector<Route> out;
    for (auto k : keys) out.push_back(memo.at(k).route);
    return out;
  }
};

}  // namespace

OracleResult brute_force_oracle(const RoadNetwork& network, const Depot& depot,
                                const VehicleClass& vehicle,
                                const OracleOptions& options) {
  const auto& req = network.required_edges();
  if (req.size() > kOracleMaxEdges) {
    throw ValidationError(fmt::format("oracle supports at most {} required edges, got {}",
                                      kOracleMaxEdges, req.size()));
  }
  network.node_index(depot.node);
  FleetSpec fleet;
  Depot unlimited = depot;
  unlimited.max_vehicles = static_cast<int>(kOracleMaxEdges);
  fleet.depots = {unlimited};
  fleet.vehicle = vehicle;
  Assignment assignment;
  for (auto e : req) assignment.set(network.edge(e).id, depot.id);

  OracleResult result;
  Search search{network, depot, vehicle, fleet, assignment, options,
                floyd_warshall(network), {req.begin(), req.end()}, {}, {}, &result, {}};
  if (req.empty()) {
    result.feasible = true;
    result.plans_enumerated = result.feasible_plans = 1;
    return result;
  }
  search.place(0);
  if (search.feasible.empty()) return result;

  const Search::Found* lex = &search.feasible.front();
  for (const auto& f : search.feasible) {
    if (f.z1 < lex->z1 || (f.z1 == lex->z1 && f.z2 < lex->z2)) lex = &f;
  }
  result.feasible = true;
  result.Z1_minutes = lex->z1;
  result.Z2_kg = lex->z2;
  result.routes = search.routes_of(lex->keys);

  auto score = [&](const Search::Found& f) {
    double s = 0.0;
    s += lex->z1 > 0 ? f.z1 / lex->z1 : 0.0;
    s += lex->z2 > 0 ? f.z2 / lex->z2 : 0.0;
    return s;
  };
  const Search::Found* scal = lex;
  for (const auto& f : search.feasible) {
    if (score(f) < score(*scal)) scal = &f;
  }
  result.scalar_Z1_minutes = scal->z1;
  result.scalar_Z2_kg = scal->z2;
  result.scalar_routes = search.routes_of(scal->keys);
  return result;
}

}  // namespace saltplan
