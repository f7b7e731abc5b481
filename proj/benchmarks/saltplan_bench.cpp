#include <benchmark/benchmark.h>

#include <map>

#include "saltplan/generator.hpp"
#include "saltplan/preprocess.hpp"
#include "saltplan/training.hpp"

namespace {

using namespace saltplan;

const GeneratedInstance& instance(std::size_t nodes) {
  static std::map<std::size_t, GeneratedInstance> cache;
  auto it = cache.find(nodes);
  if (it == cache.end()) {
    GeneratorConfig g;
    g.seed = 11;
    g.nodes = nodes;
    auto inst = generate_instance(g);
    inst.network = preprocess_instance(inst.network, inst.fleet);
    it = cache.emplace(nodes, std::move(inst)).first;
  }
  return it->second;
}

void BM_Dijkstra(benchmark::State& state) {
  const auto& inst = instance(static_cast<std::size_t>(state.range(0)));
  std::size_t src = 0;
  for (auto _ : state) {
    auto tree = ShortestPathTree::from_source(inst.network, src);
    benchmark::DoNotOptimize(tree);
    src = (src + 1) % inst.network.node_count();
  }
}
BENCHMARK(BM_Dijkstra)->Arg(144)->Arg(400)->Arg(1600);

void BM_Compression(benchmark::State& state) {
  GeneratorConfig g;
  g.seed = 5;
  g.nodes = static_cast<std::size_t>(state.range(0));
  auto inst = generate_instance(g);
  for (auto _ : state) {
    auto net = preprocess_instance(inst.network, inst.fleet);
    benchmark::DoNotOptimize(net);
  }
}
BENCHMARK(BM_Compression)->Arg(400)->Arg(1600);

void BM_SolveAssignment(benchmark::State& state) {
  const auto& inst = instance(static_cast<std::size_t>(state.range(0)));
  auto assignment = nearest_depot_assignment(inst.network, inst.fleet.depots);
  for (auto _ : state) {
    PathCache cache(inst.network);
    auto plan = solve_assignment(inst.network, assignment, inst.fleet, {}, &cache);
    benchmark::DoNotOptimize(plan);
  }
}
BENCHMARK(BM_SolveAssignment)->Arg(144)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_TrainIteration(benchmark::State& state) {
  const auto& inst = instance(144);
  TrainConfig cfg;
  cfg.iterations = 1;
  for (auto _ : state) {
    auto result = train_loop(inst.network, inst.fleet, cfg);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_TrainIteration)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
