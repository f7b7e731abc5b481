#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "commands.hpp"
#include "helpers.hpp"
#include "saltplan/io.hpp"

using namespace saltplan;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("saltplan-cli-" + name);
  fs::remove_all(dir);
  return dir;
}

struct Captured {
  int code;
  std::string err;
};

Captured run(std::vector<std::string> args) {
  std::ostringstream err;
  auto* old = std::cerr.rdbuf(err.rdbuf());
  int code = cli::run(args);
  std::cerr.rdbuf(old);
  return {code, err.str()};
}

std::string slurp(const fs::path& p) { return io::read_file(p); }

void write_instance(const fs::path& dir, const RoadNetwork& net, const FleetSpec& fleet) {
  fs::create_directories(dir);
  io::write_file_atomic(dir / "nodes.csv", format_nodes_csv(net));
  io::write_file_atomic(dir / "edges.csv", format_edges_csv(net));
  io::write_file_atomic(dir / "fleet.json", format_fleet_json(fleet));
}

const fs::path& generated() {
  static const fs::path dir = [] {
    auto d = scratch("instance");
    REQUIRE(run({"generate", "--seed", "4", "--nodes", "100", "--out", (d / "raw").string()})
                .code == cli::kOk);
    REQUIRE(run({"preprocess", "--in", (d / "raw").string(), "--out", (d / "pre").string()})
                .code == cli::kOk);
    return d / "pre";
  }();
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ten iterations log eleven rows") {
  auto out = scratch("ten");
  auto r = run({"plan", "--instance", generated().string(), "--iterations", "10", "--seed",
                "7", "--out", out.string()});
  CHECK(r.code == cli::kOk);
  auto log = io::CsvTable::parse(slurp(out / "training_log.csv"));
  CHECK(log.rows() == 11);
  CHECK(fs::exists(out / "assignment.csv"));
  CHECK(fs::exists(out / "plan.json"));
  CHECK(fs::exists(out / "model.json"));
  CHECK(fs::exists(out / "routes" / "route_001.csv"));
  CHECK(run({"evaluate", "--instance", generated().string(), "--plan", out.string()}).code ==
        cli::kOk);
}

TEST_CASE("two baseline runs write identical artifacts") {
  auto a = scratch("base-a"), b = scratch("base-b");
  for (const auto& out : {a, b}) {
    CHECK(run({"plan", "--instance", generated().string(), "--iterations", "0", "--out",
               out.string()})
              .code == cli::kOk);
  }
  for (const auto* f : {"assignment.csv", "plan.json", "training_log.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  for (const auto& e : fs::directory_iterator(a / "routes")) {
    CHECK(slurp(e.path()) == slurp(b / "routes" / e.path().filename()));
  }
  auto j = nlohmann::json::parse(slurp(a / "plan.json"));
  CHECK(j.contains("seed"));
  CHECK(j.contains("config_hash"));
}

TEST_CASE("hard depot limits fail the run and name the violation") {
  test::Builder b;
  b.node(0);
  for (int i = 1; i <= 4; ++i) {
    b.node(i, i * 1000.0, 0);
    b.road(2 * i, 0, i, 20, 50, 1, true, true);
    b.road(2 * i + 1, i, 0, 20, 50, 1, true, false);
  }
  auto dir = scratch("hard");
  write_instance(dir / "inst", b.build(), test::one_depot(0, 1));
  auto soft = run({"plan", "--instance", (dir / "inst").string(), "--iterations", "0",
                   "--out", (dir / "soft").string()});
  CHECK(soft.code == cli::kOk);
  auto hard = run({"plan", "--instance", (dir / "inst").string(), "--iterations", "0",
                   "--depot-mode", "hard", "--out", (dir / "hard").string()});
  CHECK(hard.code == cli::kHardViolations);
  CHECK(hard.err.find("depot_capacity") != std::string::npos);
  CHECK(slurp(dir / "hard" / "plan.json").find("depot_capacity") != std::string::npos);
}

TEST_CASE("preprocess drops the hand-counted chain nodes and is idempotent") {
  test::Builder b;
  for (int i = 1; i <= 6; ++i) b.node(i, i * 100.0, 0);
  for (int i = 1; i <= 5; ++i) b.road(i, i, i + 1, 1.0, 30, 1, false, true);
  b.road(9, 6, 1, 1.0, 30, 2, false, false);
  auto dir = scratch("chain");
  write_instance(dir / "raw", b.build(), test::one_depot(1));
  REQUIRE(run({"preprocess", "--in", (dir / "raw").string(), "--out",
               (dir / "once").string()})
              .code == cli::kOk);
  auto stats = nlohmann::json::parse(slurp(dir / "once" / "stats.json"));
  CHECK(stats["input"]["nodes"] == 6);
  CHECK(stats["compressed"]["nodes"] == 2);
  REQUIRE(run({"preprocess", "--in", (dir / "once").string(), "--out",
               (dir / "twice").string()})
              .code == cli::kOk);
  CHECK(slurp(dir / "once" / "edges.csv") == slurp(dir / "twice" / "edges.csv"));
  CHECK(slurp(dir / "once" / "nodes.csv") == slurp(dir / "twice" / "nodes.csv"));
}

TEST_CASE("a depot pruned by the component filter is fatal") {
  test::Builder b;
  b.node(1).node(2).node(3);
  b.road(0, 1, 2, 1, 30, 1, false, true).road(1, 3, 1, 1, 30);
  FleetSpec f;
  f.depots = {{DepotId{1}, NodeId{1}, 2}, {DepotId{42}, NodeId{3}, 2}};
  auto dir = scratch("pruned");
  write_instance(dir / "raw", b.build(), f);
  auto r = run({"preprocess", "--in", (dir / "raw").string(), "--out", (dir / "o").string()});
  CHECK(r.code == cli::kUnreachable);
  CHECK(r.err.find("42") != std::string::npos);
}

TEST_CASE("geojson export from plan artifacts") {
  auto out = scratch("geo");
  REQUIRE(run({"plan", "--instance", generated().string(), "--iterations", "0", "--out",
               out.string()})
              .code == cli::kOk);
  REQUIRE(run({"export-geojson", "--instance", generated().string(), "--plan", out.string()})
              .code == cli::kOk);
  auto doc = nlohmann::json::parse(slurp(out / "routes.geojson"));
  CHECK(doc["type"] == "FeatureCollection");
}

TEST_CASE("tampered artifacts fail evaluation") {
  auto out = scratch("tamper");
  REQUIRE(run({"plan", "--instance", generated().string(), "--iterations", "0", "--out",
               out.string()})
              .code == cli::kOk);
  auto text = slurp(out / "plan.json");
  auto j = nlohmann::json::parse(text);
  j["Z1_min"] = j["Z1_min"].get<double>() + 1.0;
  io::write_file_atomic(out / "plan.json", j.dump(2));
  CHECK(run({"evaluate", "--instance", generated().string(), "--plan", out.string()}).code ==
        cli::kMismatch);
}

TEST_CASE("exit codes for usage and input errors") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"plan"}).code == cli::kUsage);
  CHECK(run({"plan", "--instance", "x", "--iterations", "-1"}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);
  auto missing = scratch("missing");
  CHECK(run({"plan", "--instance", missing.string(), "--out", missing.string()}).code ==
        cli::kBadInput);
  auto bad = scratch("bad");
  fs::create_directories(bad);
  io::write_file_atomic(bad / "nodes.csv", "node_id,x,y\n1,0,0\n");
  io::write_file_atomic(bad / "edges.csv", "edge_id,from,to,length_km,speed,lanes,oneway,treat\n"
                                            "0,1,5,1,30,1,true,false\n");
  io::write_file_atomic(bad / "fleet.json", R"({"depots":[{"id":1,"node":1}]})");
  CHECK(run({"plan", "--instance", bad.string()}).code == cli::kBadInput);
}

TEST_CASE("the environment sets the default output directory") {
  auto out = scratch("env");
  ::setenv("SALTPLAN_OUT", out.string().c_str(), 1);
  auto r = run({"plan", "--instance", generated().string(), "--iterations", "0"});
  ::unsetenv("SALTPLAN_OUT");
  CHECK(r.code == cli::kOk);
  CHECK(fs::exists(out / "plan.json"));
}

TEST_CASE("one-shot pipeline") {
  auto out = scratch("pipeline");
  auto raw = generated().parent_path() / "raw";
  CHECK(run({"run", "--in", raw.string(), "--iterations", "2", "--out", out.string()}).code ==
        cli::kOk);
  CHECK(fs::exists(out / "instance" / "stats.json"));
  CHECK(fs::exists(out / "plan" / "routes.geojson"));
  CHECK(io::CsvTable::parse(slurp(out / "plan" / "training_log.csv")).rows() == 3);
}

TEST_CASE("oracle and bench subcommands") {
  CHECK(run({"oracle", "--count", "3", "--seed", "5"}).code == cli::kOk);
  auto out = scratch("bench");
  CHECK(run({"bench", "--count", "1", "--nodes", "64", "--iterations", "1", "--out",
             out.string()})
            .code == cli::kOk);
  CHECK(io::CsvTable::parse(slurp(out / "report.csv")).rows() >= 2);
}

}  // TEST_SUITE
