#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "saltplan/generator.hpp"
#include "saltplan/oracle.hpp"
#include "saltplan/preprocess.hpp"
#include "saltplan/training.hpp"

using namespace saltplan;

TEST_SUITE("generator") {

TEST_CASE("fixed seed gives byte-identical instance files") {
  GeneratorConfig g;
  g.seed = 17;
  g.nodes = 120;
  auto a = generate_instance(g);
  auto b = generate_instance(g);
  CHECK(format_nodes_csv(a.network) == format_nodes_csv(b.network));
  CHECK(format_edges_csv(a.network) == format_edges_csv(b.network));
  CHECK(format_fleet_json(a.fleet) == format_fleet_json(b.fleet));
  g.seed = 18;
  CHECK(format_edges_csv(generate_instance(g).network) != format_edges_csv(a.network));
}

TEST_CASE("one-way share over about five thousand rows") {
  GeneratorConfig g;
  g.seed = 5;
  g.nodes = 2400;
  auto inst = generate_instance(g);
  auto s = compute_stats(inst.network);
  CHECK(s.source_rows >= 5000);
  CHECK(std::abs(s.oneway_fraction - 0.122) <= 0.02);
}

TEST_CASE("lane and speed targets hold over ten seeds") {
  std::map<int, double> lanes;
  std::map<double, double> speeds;
  double rows = 0, oneway = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorConfig g;
    g.seed = seed;
    g.corridors = 0;
    auto inst = generate_instance(g);
    for (const auto& r : inst.network.to_records()) {
      ++rows;
      oneway += r.oneway;
      lanes[r.lanes] += 1;
      speeds[r.speed] += 1;
    }
  }
  GeneratorConfig d;
  CHECK(std::abs(oneway / rows - d.oneway_fraction) <= 0.02);
  for (std::size_t i = 0; i < d.lane_weights.size(); ++i) {
    CHECK(std::abs(lanes[static_cast<int>(i) + 1] / rows - d.lane_weights[i]) <= 0.02);
  }
  for (std::size_t i = 0; i < d.speed_tiers.size(); ++i) {
    CHECK(std::abs(speeds[d.speed_tiers[i]] / rows - d.speed_weights[i]) <= 0.02);
  }
}

TEST_CASE("generated instances hold their depots and route cleanly") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorConfig g;
    g.seed = seed;
    g.nodes = 144;
    auto inst = generate_instance(g);
    CHECK(inst.fleet.depots.size() == 3);
    for (const auto& d : inst.fleet.depots) CHECK(d.max_vehicles == 12);
    auto net = preprocess_instance(inst.network, inst.fleet);
    CHECK(net.required_edges().size() > 0);
    CHECK(largest_scc(net).node_count() == net.node_count());
    auto a = nearest_depot_assignment(net, inst.fleet.depots);
    CHECK(solve_assignment(net, a, inst.fleet).hard_violation_count() == 0);
  }
}

TEST_CASE("no treated share gives no routes") {
  GeneratorConfig g;
  g.treated_fraction = 0.0;
  g.nodes = 64;
  auto inst = generate_instance(g);
  CHECK(inst.network.required_edges().empty());
  TrainConfig cfg;
  cfg.iterations = 0;
  auto r = train_loop(preprocess_instance(inst.network, inst.fleet), inst.fleet, cfg);
  CHECK(r.best_plan.routes.empty());
}

TEST_CASE("impossible configurations raise") {
  GeneratorConfig g;
  g.nodes = 1;
  CHECK_THROWS_AS(generate_instance(g), GenerationError);
  g.nodes = 100;
  g.oneway_fraction = 1.5;
  CHECK_THROWS_AS(generate_instance(g), GenerationError);
  g.oneway_fraction = 0.1;
  g.depot_count = 0;
  CHECK_THROWS_AS(generate_instance(g), GenerationError);
}

TEST_CASE("micro instances are small, connected and single-depot") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    MicroConfig mc;
    mc.seed = seed;
    auto inst = generate_micro_instance(mc);
    CHECK(inst.fleet.depots.size() == 1);
    CHECK(inst.network.required_edges().size() >= 1);
    CHECK(inst.network.required_edges().size() <= kOracleMaxEdges);
    CHECK(largest_scc(inst.network).node_count() == inst.network.node_count());
  }
}

}  // TEST_SUITE
