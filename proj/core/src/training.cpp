#include "saltplan/training.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "saltplan/io.hpp"

namespace saltplan {

Plan baseline_plan(const RoadNetwork& network, const FleetSpec& fleet,
                   const Assignment& assignment, const SolveOptions& options,
                   PathCache* cache) {
  return solve_assignment(network, assignment, fleet, options, cache);
}

TrainResult train_loop(const RoadNetwork& network, const FleetSpec& fleet,
                       const TrainConfig& config) {
  if (config.iterations < 0) throw ValidationError("iterations must be >= 0");
  if (config.w1 < 0 || config.w2 < 0 || config.penalty_weight < 0) {
    throw ValidationError("reward weights must be >= 0");
  }
  fleet.validate();
  require_depots_present(network, fleet);

  TrainResult out;
  std::mt19937_64 rng(config.seed);
  PathCache cache(network);
  const SolveOptions options{config.selection, config.depot_mode};

  out.baseline_assignment = nearest_depot_assignment(network, fleet.depots);
  out.baseline_plan =
      baseline_plan(network, fleet, out.baseline_assignment, options, &cache);

  out.reward.w1 = config.w1;
  out.reward.w2 = config.w2;
  out.reward.penalty_weight = config.penalty_weight;
  out.reward.normalize = config.normalize;
  out.reward.z1_reference = out.baseline_plan.Z1_minutes;
  out.reward.z2_reference = out.baseline_plan.Z2_kg;

  const double baseline_reward = compute_reward(out.baseline_plan, out.reward);
  out.best_assignment = out.baseline_assignment;
  out.best_plan = out.baseline_plan;
  double best = -baseline_reward;
  out.log.push_back({0, false, out.baseline_plan.Z1_minutes, out.baseline_plan.Z2_kg,
                     out.baseline_plan.total_vehicles, baseline_reward, best, best, 0,
                     "baseline"});
  if (config.iterations == 0) return out;

  auto features = encode_features(network, fleet.depots);
  out.model = PolicyModel(features.dim, fleet.depots.size(), config.ppo.hidden, rng());
  auto labels = assignment_labels(out.baseline_assignment, features, fleet.depots);
  out.warm = warm_start(out.model, features, labels, config.warm, rng, baseline_reward);
  if (out.warm.warning) out.diagnostics.push_back(out.warm.diagnostic);

  std::vector<EpisodeBatch> history;
  {
    EpisodeBatch base;
    base.reward = baseline_reward;
    for (std::size_t i = 0; i < features.rows.size(); ++i) {
      auto o = out.model.forward(features.rows[i].values);
      auto logp = log_softmax(o.logits);
      base.records.push_back({features.rows[i].values, labels[i], logp[labels[i]], o.value});
    }
    history.push_back(std::move(base));
  }

  const double failure_reward =
      config.failure_reward_scale * std::min(baseline_reward, -1.0);

  for (int it = 1; it <= config.iterations; ++it) {
    auto proposal = propose_assignment(out.model, features, fleet.depots,
                                       ProposalMode::sample, rng());
    IterationLog row;
    row.iter = it;
    for (const auto& [edge, depot] : proposal.assignment.entries()) {
      if (out.baseline_assignment.at(edge) != depot) ++row.reassigned;
    }
    try {
      Plan plan = solve_assignment(network, proposal.assignment, fleet, options, &cache);
      row.Z1_minutes = plan.Z1_minutes;
      row.Z2_kg = plan.Z2_kg;
      row.vehicles = plan.total_vehicles;
      row.reward = compute_reward(plan, out.reward);
      row.objective = -row.reward;
      if (row.objective < best) {
        best = row.objective;
        out.best_assignment = proposal.assignment;
        out.best_plan = std::move(plan);
        out.best_iteration = it;
      }
    } catch (const UnroutableEdgeError& e) {
      row.failed = true;
      row.reward = failure_reward;
      row.objective = -failure_reward;
      row.note = e.what();
      out.diagnostics.push_back(fmt::format("iteration {} failed: {}", it, e.what()));
    }
    row.best_so_far = best;
    out.log.push_back(row);

    proposal.batch.reward = row.reward;
    proposal.batch.iteration = it;
    std::vector<EpisodeBatch> latest;
    if (config.replay_episodes) {
      history.push_back(std::move(proposal.batch));
    } else {
      latest.push_back(std::move(proposal.batch));
    }
    auto update = ppo_update(out.model, config.replay_episodes ? history : latest,
                             config.ppo, rng);
    if (update.aborted) {
      out.diagnostics.push_back(fmt::format("iteration {}: {}", it, update.diagnostic));
    } else {
      out.model = std::move(update.model);
    }
  }
  return out;
}

std::string format_training_log(const std::vector<IterationLog>& log) {
  std::string out = "iter,Z1_min,Z2_kg,NoV,reward,best_so_far\n";
  for (const auto& r : log) {
    if (r.failed) {
      out += fmt::format("{},,,,{},{}\n", r.iter, io::format_double(r.reward),
                         io::format_double(r.best_so_far));
    } else {
      out += fmt::format("{},{},{},{},{},{}\n", r.iter, io::format_double(r.Z1_minutes),
                         io::format_double(r.Z2_kg), r.vehicles,
                         io::format_double(r.reward), io::format_double(r.best_so_far));
    }
  }
  return out;
}

}  // namespace saltplan
