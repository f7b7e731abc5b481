#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "saltplan/training.hpp"

namespace saltplan {

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  int iterations = 0;
  int best_iteration = 0;
  std::optional<FeatureNormalization> normalization;
};

std::string format_route_csv(const Route& route, std::size_t route_id,
                             const RoadNetwork& network, const VehicleClass& vehicle);
std::string route_file_name(std::size_t route_id);  // route_001.csv, ...
std::string format_plan_json(const Plan& plan, const RunMetadata& meta);

/// Writes assignment.csv, routes/route_NNN.csv and plan.json (atomically,
/// file by file). Stale route files from earlier runs are removed.
void write_plan_artifacts(const std::filesystem::path& dir, const Assignment& assignment,
                          const Plan& plan, const RoadNetwork& network,
                          const FleetSpec& fleet, const RunMetadata& meta);

struct LoadedPlan {
  Assignment assignment;
  Plan plan;  // routes only; metrics re-evaluated by the caller
  double persisted_Z1_minutes = 0.0;
  double persisted_Z2_kg = 0.0;
  int persisted_vehicles = 0;
};

/// Reads artifacts written by write_plan_artifacts. Malformed files raise
/// SchemaError.
LoadedPlan load_plan_artifacts(const std::filesystem::path& dir);

}  // namespace saltplan
