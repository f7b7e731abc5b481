#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saltplan/training.hpp"

namespace saltplan {

struct BenchInstance {
  std::string name;
  std::uint64_t seed = 0;
  RoadNetwork network;  // preprocessed
  FleetSpec fleet;
};

struct MethodRow {
  std::string instance;
  std::string method;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double Z1_minutes = 0.0;
  double Z2_kg = 0.0;
  int vehicles = 0;
  double objective = 0.0;  // w1*Z1/Z1_base + w2*Z2/Z2_base
  double wall_seconds = 0.0;
  std::size_t hard_violations = 0;
  std::size_t soft_violations = 0;
};

struct MethodSummary {
  std::string method;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double mean_Z1_minutes = 0.0;
  double mean_Z2_kg = 0.0;
  double mean_vehicles = 0.0;
  double mean_objective = 0.0;
  double total_wall_seconds = 0.0;
  std::size_t hard_violations = 0;
};

struct ComparisonReport {
  std::vector<MethodRow> rows;  // baseline row then bilevel row per instance
  std::vector<MethodSummary> summary;
  std::string config_hash;
};

inline constexpr const char* kBaselineMethod = "KDTree+NN";
inline constexpr const char* kBilevelMethod = "KDTree-PPO+NN";

/// Arm (a): nearest-depot assignment routed once. Arm (b): train_loop for
/// `iterations` with best-so-far reporting. Both use the same solver and
/// checker. A failing instance is marked and skipped.
ComparisonReport run_comparison(const std::vector<BenchInstance>& instances,
                                int iterations, const TrainConfig& base = {});

std::string format_report_csv(const ComparisonReport& report);

}  // namespace saltplan
