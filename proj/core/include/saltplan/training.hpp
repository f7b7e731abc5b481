#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saltplan/policy.hpp"

namespace saltplan {

struct TrainConfig {
  int iterations = 10;
  std::uint64_t seed = 0;
  double w1 = 1.0;
  double w2 = 1.0;
  double penalty_weight = 1.0;
  bool normalize = true;
  Selection selection = Selection::nearest;
  DepotCapacityMode depot_mode = DepotCapacityMode::soft;
  PpoConfig ppo;
  // A fixed imitation budget: sharper policies rarely leave the baseline
  // assignment, softer ones mostly propose worse ones.
  WarmStartConfig warm{20, 0.95, false};
  // Reward given to an iteration whose assignment could not be routed, as a
  // multiple of the baseline reward.
  double failure_reward_scale = 3.0;
  // Every PPO update sees all episodes so far, the baseline included,
  // instead of only the newest one.
  bool replay_episodes = false;
};

struct IterationLog {
  int iter = 0;
  bool failed = false;
  double Z1_minutes = 0.0;
  double Z2_kg = 0.0;
  int vehicles = 0;
  double reward = 0.0;
  double objective = 0.0;    // -reward
  double best_so_far = 0.0;  // min objective up to and including this row
  std::size_t reassigned = 0;  // edges whose depot differs from the baseline
  std::string note;
};

struct TrainResult {
  Assignment baseline_assignment;
  Plan baseline_plan;
  Assignment best_assignment;
  Plan best_plan;
  int best_iteration = 0;
  std::vector<IterationLog> log;
  PolicyModel model;
  WarmStartReport warm;
  RewardConfig reward;
  std::vector<std::string> diagnostics;
};

/// KDTree+NN baseline: nearest-depot assignment routed by the heuristic.
Plan baseline_plan(const RoadNetwork& network, const FleetSpec& fleet,
                   const Assignment& assignment, const SolveOptions& options,
                   PathCache* cache = nullptr);

/// Iteration 0 is the baseline; each further iteration samples a full
/// assignment from the policy, routes it, scores it and applies one PPO
/// update. The lowest-objective assignment seen is returned.
TrainResult train_loop(const RoadNetwork& network, const FleetSpec& fleet,
                       const TrainConfig& config);

std::string format_training_log(const std::vector<IterationLog>& log);

}  // namespace saltplan
