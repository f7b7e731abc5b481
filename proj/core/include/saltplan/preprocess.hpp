#pragma once

#include <string>

#include "saltplan/fleet.hpp"
#include "saltplan/network.hpp"

namespace saltplan {

struct PreprocessReport {
  NetworkStats before;
  NetworkStats after_scc;
  NetworkStats after;
};

/// Largest SCC, then chain compression with depot nodes protected. A depot
/// outside the kept component raises DepotUnreachableError.
RoadNetwork preprocess_instance(const RoadNetwork& network, const FleetSpec& fleet,
                                PreprocessReport* report = nullptr);

std::string format_stats_json(const PreprocessReport& report);

}  // namespace saltplan
