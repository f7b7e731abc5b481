#include "saltplan/generator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "saltplan/assignment.hpp"
#include "saltplan/shortest_path.hpp"

namespace saltplan {

void GeneratorConfig::validate() const {
  auto fraction = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw GenerationError(fmt::format("{} must lie in [0, 1], got {}", what, v));
    }
  };
  fraction(oneway_fraction, "oneway_fraction");
  fraction(treated_fraction, "treated_fraction");
  fraction(keep_fraction, "keep_fraction");
  fraction(shortcut_fraction, "shortcut_fraction");
  fraction(subdivide_fraction, "subdivide_fraction");
  if (depot_count < 1) throw GenerationError("at least one depot is required");
  if (nodes < 4) {
    throw GenerationError(
        fmt::format("{} nodes cannot form a connected road grid (need >= 4)", nodes));
  }
  if (speed_tiers.empty() || speed_tiers.size() != speed_weights.size()) {
    throw GenerationError("speed tiers and weights must be non-empty and aligned");
  }
  for (double s : speed_tiers) {
    if (!(s > 0)) throw GenerationError("speed tiers must be positive");
  }
  if (lane_weights.empty()) throw GenerationError("lane weights must be non-empty");
  if (!(extent > 0)) throw GenerationError("extent must be positive");
  if (max_vehicles < 1) throw GenerationError("max_vehicles must be >= 1");
}

std::string GeneratorConfig::canonical() const {
  return fmt::format(
      "seed={};nodes={};oneway={};tiers={};speed_w={};lane_w={};treated={};"
      "depots={};extent={};maxveh={};keep={};shortcut={};subdivide={};"
      "corridors={};unit={};name={}",
      seed, nodes, oneway_fraction, fmt::join(speed_tiers, "|"),
      fmt::join(speed_weights, "|"), fmt::join(lane_weights, "|"), treated_fraction,
      depot_count, extent, max_vehicles, keep_fraction, shortcut_fraction,
      subdivide_fraction, corridors, to_string(speed_unit), name);
}

namespace {

struct Row {
  std::size_t a, b;  // node indices
  double speed;
  int lanes;
  bool oneway;
  bool treat;
  Polyline geometry;
};

// Single-task feasibility of a required edge from a depot node.
bool serviceable(const RoadNetwork& net, std::size_t edge, const ShortestPathTree& from,
                 const ShortestPathTree& to, const VehicleClass& vehicle) {
  std::size_t t = net.tail(edge), h = net.head(edge);
  if (!from.reachable(t) || !to.reachable(h)) return false;
  const auto& e = net.edge(edge);
  double hours = from.hours(t) +
                 net.hours_at(e.length_km, effective_speed(vehicle, e)) + to.hours(h);
  double km = from.km(t) + e.length_km + to.km(h);
  return hours * 60.0 <= vehicle.max_route_minutes * (1.0 - 1e-6) &&
         km <= vehicle.max_route_km * (1.0 - 1e-6) &&
         e.length_km * e.lanes <= vehicle.capacity_lane_km * (1.0 - 1e-6);
}

RoadNetwork build(const std::vector<Point>& pos, const std::vector<Row>& rows,
                  const InstanceHeader& header) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    nodes.push_back({NodeId{static_cast<std::int64_t>(i + 1)}, pos[i]});
  }
  std::vector<EdgeRecord> records;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto& r = rows[s];
    EdgeRecord rec;
    rec.row_id = static_cast<std::int64_t>(s);
    rec.from = NodeId{static_cast<std::int64_t>(r.a + 1)};
    rec.to = NodeId{static_cast<std::int64_t>(r.b + 1)};
    rec.length_km = polyline_length(r.geometry) / 1000.0;
    rec.speed = r.speed;
    rec.lanes = r.lanes;
    rec.oneway = r.oneway;
    rec.treat = r.treat;
    rec.geometry = r.geometry;
    records.push_back(std::move(rec));
  }
  return RoadNetwork(std::move(nodes), expand_records(records), header);
}

}  // namespace

GeneratedInstance generate_instance(const GeneratorConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto chance = [&](double p) { return unit(rng) < p; };
  std::discrete_distribution<std::size_t> speed_pick(config.speed_weights.begin(),
                                                     config.speed_weights.end());
  std::discrete_distribution<std::size_t> lane_pick(config.lane_weights.begin(),
                                                    config.lane_weights.end());

  const std::size_t side = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(config.nodes)))));
  const double spacing = config.extent / static_cast<double>(side);
  std::vector<Point> pos;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      double jx = (unit(rng) - 0.5) * 0.5 * spacing;
      double jy = (unit(rng) - 0.5) * 0.5 * spacing;
      pos.push_back({(static_cast<double>(c) + 0.5) * spacing + jx,
                     (static_cast<double>(r) + 0.5) * spacing + jy});
    }
  }
  auto at = [&](std::size_t r, std::size_t c) { return r * side + c; };

  std::vector<bool> fast_line(side, false);
  if (side >= 4) {
    for (std::size_t k = 1; k <= config.corridors; ++k) {
      fast_line[k * side / (config.corridors + 1)] = true;
    }
  }

  std::vector<Row> rows;
  auto add = [&](std::size_t a, std::size_t b, bool fast) {
    Row row;
    row.a = a;
    row.b = b;
    if (fast) {
      row.speed = *std::max_element(config.speed_tiers.begin(), config.speed_tiers.end());
      row.lanes = chance(0.5) ? 2 : 3;
      row.treat = chance(std::min(1.0, 10.0 * config.treated_fraction));
    } else {
      row.speed = config.speed_tiers[speed_pick(rng)];
      row.lanes = static_cast<int>(lane_pick(rng)) + 1;
      row.treat = chance(config.treated_fraction);
    }
    row.oneway = chance(config.oneway_fraction);
    if (row.oneway && chance(0.5)) std::swap(row.a, row.b);
    Point p = pos[row.a], q = pos[row.b];
    double bend = (unit(rng) - 0.5) * 0.1;
    Point mid{(p.x + q.x) / 2 - (q.y - p.y) * bend, (p.y + q.y) / 2 + (q.x - p.x) * bend};
    if (chance(config.subdivide_fraction)) {
      pos.push_back(mid);
      std::size_t m = pos.size() - 1;
      Row first = row, second = row;
      first.b = m;
      first.geometry = {p, mid};
      second.a = m;
      second.geometry = {mid, q};
      rows.push_back(std::move(first));
      rows.push_back(std::move(second));
    } else {
      row.geometry = {p, mid, q};
      rows.push_back(std::move(row));
    }
  };

  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      if (c + 1 < side && (fast_line[r] || chance(config.keep_fraction))) {
        add(at(r, c), at(r, c + 1), fast_line[r]);
      }
      if (r + 1 < side && (fast_line[c] || chance(config.keep_fraction))) {
        add(at(r, c), at(r + 1, c), fast_line[c]);
      }
      if (r + 1 < side && c + 1 < side && chance(config.shortcut_fraction)) {
        if (chance(0.5)) {
          add(at(r, c), at(r + 1, c + 1), false);
        } else {
          add(at(r, c + 1), at(r + 1, c), false);
        }
      }
    }
  }
  if (rows.empty()) throw GenerationError("generated grid has no links");

  InstanceHeader header{config.name, config.speed_unit};
  RoadNetwork raw_net = build(pos, rows, header);

  // Depots: evenly spaced on a circle, snapped to distinct SCC nodes.
  auto scc = largest_scc(raw_net);
  if (scc.node_count() < config.depot_count) {
    throw GenerationError("largest strongly connected component is too small");
  }
  const double cx = config.extent / 2, cy = config.extent / 2;
  const double radius = 0.28 * config.extent;
  const double phase = unit(rng) * 2 * std::numbers::pi;
  GeneratedInstance out;
  std::vector<bool> taken(scc.node_count(), false);
  for (std::size_t k = 0; k < config.depot_count; ++k) {
    double angle = phase + 2 * std::numbers::pi * static_cast<double>(k) /
                               static_cast<double>(config.depot_count);
    Point target{cx + radius * std::cos(angle), cy + radius * std::sin(angle)};
    std::size_t best = scc.node_count();
    double best_d = 0;
    for (std::size_t v = 0; v < scc.node_count(); ++v) {
      if (taken[v]) continue;
      const auto& p = scc.node(v).pos;
      double d = std::hypot(p.x - target.x, p.y - target.y);
      if (best == scc.node_count() || d < best_d) {
        best = v;
        best_d = d;
      }
    }
    taken[best] = true;
    out.fleet.depots.push_back({DepotId{static_cast<std::int64_t>(k + 1)},
                                scc.node(best).id, config.max_vehicles});
  }

  // Untreat rows that their nearest depot cannot serve even alone.
  auto nearest = nearest_depot_assignment(scc, out.fleet.depots);
  PathCache cache(scc);
  std::vector<bool> untreat(rows.size(), false);
  for (auto e : scc.required_edges()) {
    const auto& edge = scc.edge(e);
    const auto& depot = out.fleet.depot(nearest.at(edge.id));
    std::size_t dn = scc.node_index(depot.node);
    if (!serviceable(scc, e, *cache.from(dn), *cache.to(dn), out.fleet.vehicle)) {
      untreat[static_cast<std::size_t>(raw(edge.id) / 2)] = true;
    }
  }
  bool changed = false;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (untreat[s] && rows[s].treat) {
      rows[s].treat = false;
      changed = true;
    }
  }
  out.network = changed ? build(pos, rows, header) : std::move(raw_net);
  out.fleet.validate();
  return out;
}

// _____________________________________________________________________________
GeneratedInstance generate_micro_instance(const MicroConfig& config) {
  if (config.min_required < 1 || config.max_required < config.min_required) {
    throw GenerationError("micro instance: invalid required-edge range");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto pick = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  const std::size_t n = 5 + pick(5);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({NodeId{static_cast<std::int64_t>(i + 1)},
                     {uniform(0, 10000), uniform(0, 10000)}});
  }
  std::vector<EdgeRecord> records;
  auto add = [&](std::size_t a, std::size_t b, bool oneway) {
    EdgeRecord r;
    r.row_id = static_cast<std::int64_t>(records.size());
    r.from = nodes[a].id;
    r.to = nodes[b].id;
    const auto &p = nodes[a].pos, &q = nodes[b].pos;
    r.length_km = std::max(0.2, std::hypot(p.x - q.x, p.y - q.y) / 1000.0 * uniform(1.0, 1.3));
    r.speed = uniform(20, 90);
    r.lanes = 1 + static_cast<int>(pick(3));
    r.oneway = oneway;
    records.push_back(r);
  };
  for (std::size_t i = 0; i < n; ++i) add(i, (i + 1) % n, false);
  const std::size_t chords = 2 + pick(4);
  for (std::size_t k = 0; k < chords; ++k) {
    std::size_t a = pick(n), b = pick(n);
    if (a == b) continue;
    add(a, b, unit(rng) < 0.5);
  }

  // Required rows until the directed count lands in range.
  const std::size_t target =
      config.min_required + pick(config.max_required - config.min_required + 1);
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t count = 0;
  for (auto s : order) {
    std::size_t size = records[s].oneway ? 1 : 2;
    if (count + size > target) continue;
    records[s].treat = true;
    count += size;
    if (count == target) break;
  }
  while (count < config.min_required) {
    std::size_t a = pick(n), b = (a + 1 + pick(n - 1)) % n;
    add(a, b, true);
    records.back().treat = true;
    ++count;
  }

  GeneratedInstance out;
  out.network = RoadNetwork(nodes, expand_records(records), {"micro", SpeedUnit::kmh});
  const auto& net = out.network;
  Depot depot{DepotId{1}, nodes[pick(n)].id, 8};
  out.fleet.depots = {depot};

  // Limits relative to the hardest single task so every edge is servable
  // alone but combinations compete.
  auto& v = out.fleet.vehicle;
  std::size_t dn = net.node_index(depot.node);
  auto from = ShortestPathTree::from_source(net, dn);
  auto to = ShortestPathTree::to_target(net, dn);
  double max_hours = 0, max_km = 0, max_load = 0;
  for (auto e : net.required_edges()) {
    const auto& edge = net.edge(e);
    max_hours = std::max(max_hours, from.hours(net.tail(e)) +
                                        net.hours_at(edge.length_km, effective_speed(v, edge)) +
                                        to.hours(net.head(e)));
    max_km = std::max(max_km, from.km(net.tail(e)) + edge.length_km + to.km(net.head(e)));
    max_load = std::max(max_load, salt_load(edge));
  }
  v.max_route_minutes = max_hours * 60.0 * uniform(1.1, 1.5);
  v.max_route_km = max_km * uniform(1.1, 3.0);
  v.capacity_lane_km = max_load * uniform(1.1, 3.0);
  out.fleet.validate();
  return out;
}

}  // namespace saltplan
