#include "saltplan/artifacts.hpp"

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "saltplan/io.hpp"

namespace saltplan {

namespace fs = std::filesystem;

std::string route_file_name(std::size_t route_id) {
  return fmt::format("route_{:03}.csv", route_id);
}

std::string format_route_csv(const Route& route, std::size_t route_id,
                             const RoadNetwork& network, const VehicleClass& vehicle) {
  auto cum = cumulative_metrics(route, network, vehicle);
  std::string out =
      "route_id,depot_id,seq,edge_id,mode,cum_km,cum_min,cum_kg_co2,from,to,length_km,"
      "cum_salt_lane_km\n";
  auto f = io::format_double;
  for (std::size_t i = 0; i < route.steps.size(); ++i) {
    const auto& s = route.steps[i];
    const auto& e = network.edge_by_id(s.edge);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", route_id, raw(route.depot),
                       i + 1, raw(s.edge), s.mode == StepMode::treat ? "treat" : "deadhead",
                       f(cum[i].km), f(cum[i].minutes), f(cum[i].kg_co2), raw(e.from),
                       raw(e.to), f(e.length_km), f(cum[i].salt_lane_km));
  }
  return out;
}

namespace {

nlohmann::ordered_json violation_json(const Violation& v) {
  nlohmann::ordered_json j;
  j["rule"] = to_string(v.rule);
  j["hard"] = v.hard;
  if (v.route) j["route"] = *v.route + 1;
  if (v.edge) j["edge_id"] = raw(*v.edge);
  if (v.depot) j["depot_id"] = raw(*v.depot);
  j["quantity"] = v.quantity;
  j["limit"] = v.limit;
  j["excess"] = v.excess;
  j["message"] = v.message;
  return j;
}

nlohmann::ordered_json range_json(const MinMax& m) {
  return {{"min", m.min}, {"max", m.max}};
}

}  // namespace

std::string format_plan_json(const Plan& plan, const RunMetadata& meta) {
  nlohmann::ordered_json j;
  j["seed"] = meta.seed;
  j["config_hash"] = meta.config_hash;
  j["iterations"] = meta.iterations;
  j["best_iteration"] = meta.best_iteration;
  j["Z1_min"] = plan.Z1_minutes;
  j["Z2_kg"] = plan.Z2_kg;
  j["NoV"] = plan.total_vehicles;
  auto per_depot = nlohmann::ordered_json::object();
  for (const auto& [d, n] : plan.vehicles_used) per_depot[std::to_string(raw(d))] = n;
  j["NoV_per_depot"] = per_depot;
  j["hard_violations"] = plan.hard_violation_count();
  auto routes = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const auto& route = plan.routes[r];
    routes.push_back({{"route_id", r + 1},
                      {"depot_id", raw(route.depot)},
                      {"file", "routes/" + route_file_name(r + 1)},
                      {"steps", route.steps.size()},
                      {"duration_min", route.duration_minutes},
                      {"distance_km", route.distance_km},
                      {"salt_lane_km", route.salt_used_lane_km},
                      {"kg_co2", route.emissions_kg}});
  }
  j["routes"] = routes;
  auto violations = nlohmann::ordered_json::array();
  for (const auto& v : plan.violations) violations.push_back(violation_json(v));
  j["violations"] = violations;
  if (meta.normalization) {
    const auto& n = *meta.normalization;
    j["feature_normalization"] = {{"x", range_json(n.x)},
                                  {"y", range_json(n.y)},
                                  {"length", range_json(n.length)},
                                  {"speed", range_json(n.speed)},
                                  {"lanes", range_json(n.lanes)},
                                  {"depot_distance", range_json(n.depot_distance)}};
  }
  return j.dump(2) + "\n";
}

void write_plan_artifacts(const fs::path& dir, const Assignment& assignment,
                          const Plan& plan, const RoadNetwork& network,
                          const FleetSpec& fleet, const RunMetadata& meta) {
  fs::create_directories(dir / "routes");
  for (const auto& entry : fs::directory_iterator(dir / "routes")) {
    auto name = entry.path().filename().string();
    if (name.rfind("route_", 0) == 0 && entry.path().extension() == ".csv") {
      fs::remove(entry.path());
    }
  }
  io::write_file_atomic(dir / "assignment.csv", format_assignment_csv(assignment));
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    io::write_file_atomic(dir / "routes" / route_file_name(r + 1),
                          format_route_csv(plan.routes[r], r + 1, network, fleet.vehicle));
  }
  io::write_file_atomic(dir / "plan.json", format_plan_json(plan, meta));
}

LoadedPlan load_plan_artifacts(const fs::path& dir) {
  LoadedPlan out;
  out.assignment = parse_assignment_csv(io::read_file(dir / "assignment.csv"));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(dir / "plan.json"));
    out.persisted_Z1_minutes = j.at("Z1_min").get<double>();
    out.persisted_Z2_kg = j.at("Z2_kg").get<double>();
    out.persisted_vehicles = j.at("NoV").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("plan.json: {}", e.what()));
  }
  for (const auto& r : j.at("routes")) {
    std::string file = r.at("file").get<std::string>();
    auto table = io::CsvTable::parse(io::read_file(dir / file));
    auto c_depot = table.require_column("depot_id");
    auto c_edge = table.require_column("edge_id");
    auto c_mode = table.require_column("mode");
    Route route;
    route.depot = DepotId{r.at("depot_id").get<std::int64_t>()};
    for (std::size_t i = 0; i < table.rows(); ++i) {
      auto where = fmt::format("{} line {}", file, table.line_of(i));
      if (DepotId{io::parse_int(table.at(i, c_depot), where)} != route.depot) {
        throw SchemaError(fmt::format("{}: depot differs from plan.json", where));
      }
      auto mode = table.at(i, c_mode);
      if (mode != "treat" && mode != "deadhead") {
        throw SchemaError(fmt::format("{}: unknown mode '{}'", where, mode));
      }
      route.steps.push_back({EdgeId{io::parse_int(table.at(i, c_edge), where)},
                             mode == "treat" ? StepMode::treat : StepMode::deadhead});
    }
    out.plan.routes.push_back(std::move(route));
  }
  return out;
}

}  // namespace saltplan
