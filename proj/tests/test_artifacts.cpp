#include <doctest.h>

#include <filesystem>
#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "saltplan/artifacts.hpp"
#include "saltplan/generator.hpp"
#include "saltplan/geojson.hpp"
#include "saltplan/io.hpp"
#include "saltplan/preprocess.hpp"
#include "saltplan/training.hpp"

using namespace saltplan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Solved {
  RoadNetwork network;
  FleetSpec fleet;
  Assignment assignment;
  Plan plan;
};

Solved solved(std::uint64_t seed) {
  GeneratorConfig g;
  g.seed = seed;
  g.nodes = 100;
  auto inst = generate_instance(g);
  Solved s{preprocess_instance(inst.network, inst.fleet), inst.fleet, {}, {}};
  s.assignment = nearest_depot_assignment(s.network, s.fleet.depots);
  s.plan = solve_assignment(s.network, s.assignment, s.fleet);
  return s;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("saltplan-test-" + name);
  fs::remove_all(dir);
  return dir;
}

double segment_length(const json& coords, std::size_t start, std::size_t end) {
  double sum = 0.0;
  for (std::size_t k = start; k < end; ++k) {
    double dx = coords[k + 1][0].get<double>() - coords[k][0].get<double>();
    double dy = coords[k + 1][1].get<double>() - coords[k][1].get<double>();
    sum += std::hypot(dx, dy);
  }
  return sum;
}

}  // namespace

TEST_SUITE("artifacts") {

TEST_CASE("plan artifacts re-evaluate to the persisted metrics") {
  auto s = solved(3);
  auto dir = scratch("roundtrip");
  RunMetadata meta;
  meta.seed = 3;
  meta.config_hash = "abc";
  write_plan_artifacts(dir, s.assignment, s.plan, s.network, s.fleet, meta);
  auto loaded = load_plan_artifacts(dir);
  CHECK(loaded.assignment == s.assignment);
  REQUIRE(loaded.plan.routes.size() == s.plan.routes.size());
  Plan again = loaded.plan;
  for (auto& r : again.routes) {
    auto m = measure_route(r, s.network, s.fleet.vehicle);
    r.duration_minutes = m.minutes;
    r.distance_km = m.km;
    r.salt_used_lane_km = m.salt_lane_km;
    r.emissions_kg = m.kg_co2;
  }
  CHECK(evaluate_Z1(again, s.network, s.fleet.vehicle) == loaded.persisted_Z1_minutes);
  CHECK(evaluate_Z2(again, s.fleet.vehicle) == loaded.persisted_Z2_kg);
  finalize_plan(again, loaded.assignment, s.network, s.fleet, DepotCapacityMode::soft);
  CHECK(again.Z1_minutes == s.plan.Z1_minutes);
  CHECK(again.Z2_kg == s.plan.Z2_kg);
  CHECK(again.total_vehicles == loaded.persisted_vehicles);
  CHECK(again.hard_violation_count() == 0);
  for (std::size_t i = 0; i < again.routes.size(); ++i) {
    CHECK(again.routes[i].steps == s.plan.routes[i].steps);
  }
}

TEST_CASE("route csv columns and running totals") {
  auto s = solved(4);
  REQUIRE_FALSE(s.plan.routes.empty());
  const auto& r = s.plan.routes[0];
  auto table = io::CsvTable::parse(format_route_csv(r, 1, s.network, s.fleet.vehicle));
  const std::vector<std::string> head{"route_id", "depot_id", "seq",      "edge_id",
                                      "mode",     "cum_km",   "cum_min",  "cum_kg_co2"};
  for (std::size_t i = 0; i < head.size(); ++i) CHECK(table.header()[i] == head[i]);
  CHECK(table.rows() == r.steps.size());
  auto last = table.rows() - 1;
  CHECK(io::parse_double(table.at(last, 5), "km") == r.distance_km);
  CHECK(io::parse_double(table.at(last, 6), "min") == r.duration_minutes);
  CHECK(io::parse_double(table.at(last, 7), "kg") == r.emissions_kg);
  CHECK(route_file_name(1) == "route_001.csv");
}

TEST_CASE("stale route files are removed on rewrite") {
  auto s = solved(5);
  auto dir = scratch("stale");
  write_plan_artifacts(dir, s.assignment, s.plan, s.network, s.fleet, {});
  io::write_file_atomic(dir / "routes" / "route_999.csv", "junk");
  write_plan_artifacts(dir, s.assignment, s.plan, s.network, s.fleet, {});
  CHECK_FALSE(fs::exists(dir / "routes" / "route_999.csv"));
}

TEST_CASE("corrupt plan files raise schema errors") {
  auto dir = scratch("corrupt");
  fs::create_directories(dir);
  io::write_file_atomic(dir / "plan.json", "{ not json");
  io::write_file_atomic(dir / "assignment.csv", "edge_id,depot_id\n");
  CHECK_THROWS_AS(load_plan_artifacts(dir), SchemaError);
}

TEST_CASE("empty plan exports depot points only") {
  auto s = solved(2);
  auto doc = json::parse(export_geojson(Plan{}, s.network, s.fleet));
  CHECK(doc["type"] == "FeatureCollection");
  CHECK(doc["features"].size() == s.fleet.depots.size());
  for (const auto& f : doc["features"]) CHECK(f["geometry"]["type"] == "Point");
}

TEST_CASE("a three-edge route is one line string in traversal order") {
  test::Builder b;
  b.node(0, 0, 0).node(1, 1000, 0).node(2, 1000, 1000);
  b.road(0, 0, 1, 1, 50, 1, true, true).road(1, 1, 2, 1, 50, 1, true, false);
  b.road(2, 2, 0, std::sqrt(2.0), 50, 1, true, false);
  auto net = b.build();
  auto fleet = test::one_depot(0);
  Plan p;
  p.routes.push_back({DepotId{1},
                      {{test::fwd(0), StepMode::treat},
                       {test::fwd(1), StepMode::deadhead},
                       {test::fwd(2), StepMode::deadhead}}});
  auto doc = json::parse(export_geojson(p, net, fleet));
  REQUIRE(doc["features"].size() == 2);
  const auto& line = doc["features"][1];
  CHECK(line["geometry"]["type"] == "LineString");
  CHECK(line["geometry"]["coordinates"].size() == 4);
  CHECK(line["properties"]["geometry_fallback"] == true);
  const auto& segs = line["properties"]["segments"];
  REQUIRE(segs.size() == 3);
  CHECK(segs[0]["edge_id"] == 0);
  CHECK(segs[1]["edge_id"] == 2);
  CHECK(segs[2]["edge_id"] == 4);
  CHECK(segs[0]["mode"] == "treat");
  CHECK(segs[2]["end"] == 3);
}

TEST_CASE("segment geometry re-sums to the plan distance") {
  for (std::uint64_t seed : {2, 6}) {
    auto s = solved(seed);
    auto doc = json::parse(export_geojson(s.plan, s.network, s.fleet));
    std::size_t r = 0;
    for (const auto& f : doc["features"]) {
      if (f["properties"]["kind"] != "route") continue;
      const auto& coords = f["geometry"]["coordinates"];
      double metres = 0.0;
      for (const auto& seg : f["properties"]["segments"]) {
        metres += segment_length(coords, seg["start"], seg["end"]);
      }
      CHECK(f["properties"]["geometry_fallback"] == false);
      CHECK(test::rel_close(metres / 1000.0, s.plan.routes[r].distance_km, 1e-6));
      ++r;
    }
    CHECK(r == s.plan.routes.size());
  }
}

}  // TEST_SUITE
