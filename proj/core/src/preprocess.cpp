#include "saltplan/preprocess.hpp"

#include <nlohmann/json.hpp>

namespace saltplan {

RoadNetwork preprocess_instance(const RoadNetwork& network, const FleetSpec& fleet,
                                PreprocessReport* report) {
  auto scc = largest_scc(network);
  require_depots_present(scc, fleet);
  std::unordered_set<NodeId> depots;
  for (const auto& d : fleet.depots) depots.insert(d.node);
  auto out = compress_chains(scc, depots);
  if (report) {
    report->before = compute_stats(network);
    report->after_scc = compute_stats(scc);
    report->after = compute_stats(out);
  }
  return out;
}

namespace {

nlohmann::ordered_json stats_json(const NetworkStats& s) {
  nlohmann::ordered_json j;
  j["nodes"] = s.nodes;
  j["directed_edges"] = s.edges;
  j["source_rows"] = s.source_rows;
  j["oneway_rows"] = s.oneway_rows;
  j["oneway_fraction"] = s.oneway_fraction;
  j["total_km"] = s.total_km;
  j["treated_edges"] = s.treated_edges;
  j["treated_km"] = s.treated_km;
  j["treated_lane_km"] = s.treated_lane_km;
  j["high_degree_nodes"] = s.high_degree_nodes;
  j["max_degree"] = s.max_degree;
  j["speed_values"] = s.speed_values;
  j["median_speed"] = s.median_speed;
  j["lane_histogram"] = s.lane_histogram;
  return j;
}

}  // namespace

std::string format_stats_json(const PreprocessReport& report) {
  nlohmann::ordered_json j;
  j["input"] = stats_json(report.before);
  j["largest_scc"] = stats_json(report.after_scc);
  j["compressed"] = stats_json(report.after);
  return j.dump(2) + "\n";
}

}  // namespace saltplan
