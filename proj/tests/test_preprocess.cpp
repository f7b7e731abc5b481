#include <doctest.h>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "saltplan/generator.hpp"
#include "saltplan/preprocess.hpp"

using namespace saltplan;
using saltplan::test::Builder;

TEST_SUITE("preprocess") {

TEST_CASE("toy chain loses exactly its pass-through nodes") {
  // Ring 1-2-3-4-5-6-1 of two-way roads; 2, 3, 5 and 6 are pass-through,
  // depot on 1 and a spur at 4 keeps 4 as a junction.
  Builder b;
  for (int i = 1; i <= 7; ++i) b.node(i, i, 0);
  for (int i = 1; i <= 6; ++i) b.road(i, i, i % 6 + 1, 1.0, 30, 1, false, true);
  b.road(7, 4, 7, 1.0, 30, 1, false, false);
  auto fleet = test::one_depot(1);
  PreprocessReport rep;
  auto net = preprocess_instance(b.build(), fleet, &rep);
  CHECK(rep.before.nodes == 7);
  CHECK(rep.after.nodes == 3);
  CHECK(rep.after.treated_km == rep.before.treated_km);
  auto j = nlohmann::json::parse(format_stats_json(rep));
  CHECK(j.contains("input"));
  CHECK(j.contains("compressed"));
  // Running again changes nothing.
  auto again = preprocess_instance(net, fleet);
  CHECK(format_edges_csv(again) == format_edges_csv(net));
  CHECK(format_nodes_csv(again) == format_nodes_csv(net));
}

TEST_CASE("a depot outside the largest component is fatal and named") {
  Builder b;
  b.node(1).node(2).node(3).node(4);
  b.road(0, 1, 2, 1, 30, 1, false).road(1, 2, 3, 1, 30, 1, false).road(2, 4, 1, 1, 30);
  FleetSpec f;
  f.depots = {{DepotId{3}, NodeId{1}, 1}, {DepotId{8}, NodeId{4}, 1}};
  try {
    preprocess_instance(b.build(), f);
    FAIL("expected an error");
  } catch (const DepotUnreachableError& e) {
    CHECK(e.depot() == DepotId{8});
    CHECK(std::string(e.what()).find("8") != std::string::npos);
  }
}

TEST_CASE("generated instances are idempotent under preprocessing") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorConfig g;
    g.seed = seed;
    g.nodes = 100;
    auto inst = generate_instance(g);
    PreprocessReport rep;
    auto once = preprocess_instance(inst.network, inst.fleet, &rep);
    auto twice = preprocess_instance(once, inst.fleet);
    CHECK(format_edges_csv(once) == format_edges_csv(twice));
    CHECK(rep.after.nodes <= rep.after_scc.nodes);
    CHECK(rep.after.treated_km == doctest::Approx(rep.after_scc.treated_km).epsilon(1e-12));
    for (const auto& d : inst.fleet.depots) CHECK(once.find_node(d.node).has_value());
  }
}

}  // TEST_SUITE
