#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "saltplan/assignment.hpp"
#include "saltplan/routing.hpp"

namespace saltplan {

struct PpoConfig {
  std::size_t hidden = 64;
  double learning_rate = 3e-4;
  double clip_epsilon = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int epochs = 4;
  std::size_t minibatch = 64;
};

/// Two tanh hidden layers shared by a categorical depot head and a scalar
/// value head, plus Adam moments for its parameters.
class PolicyModel {
 public:
  PolicyModel() = default;
  PolicyModel(std::size_t input_dim, std::size_t actions, std::size_t hidden,
              std::uint64_t seed);

  struct Output {
    std::vector<double> logits;
    double value = 0.0;
  };

  // Intermediate activations kept for backpropagation.
  struct Trace {
    std::vector<double> input, h1, h2;
    Output out;
  };

  Output forward(std::span<const double> x) const;
  Trace trace(std::span<const double> x) const;

  /// Accumulates d(loss)/d(params) into `grad` given the gradient of the
  /// loss with respect to the logits and the value output.
  void backward(const Trace& t, std::span<const double> dlogits, double dvalue,
                std::vector<double>& grad) const;

  void adam_step(const std::vector<double>& grad, double learning_rate);
  /// Makes the value head a constant: zero weights, bias `value`.
  void set_constant_value(double value);
  void reset_optimizer();

  std::size_t input_dim() const noexcept { return in_; }
  std::size_t action_count() const noexcept { return actions_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::vector<double>& parameters() noexcept { return params_; }
  const std::vector<double>& parameters() const noexcept { return params_; }

  /// JSON checkpoint: shape manifest plus a flat parameter array.
  std::string to_json() const;
  static PolicyModel from_json(const std::string& text);

 private:
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return w1() + hidden_ * in_; }
  std::size_t w2() const { return b1() + hidden_; }
  std::size_t b2() const { return w2() + hidden_ * hidden_; }
  std::size_t wp() const { return b2() + hidden_; }
  std::size_t bp() const { return wp() + actions_ * hidden_; }
  std::size_t wv() const { return bp() + actions_; }
  std::size_t bv() const { return wv() + hidden_; }

  std::size_t in_ = 0, actions_ = 0, hidden_ = 0;
  std::vector<double> params_;
  std::vector<double> adam_m_, adam_v_;
  std::uint64_t adam_t_ = 0;
};

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// One per-segment decision.
struct PpoRecord {
  std::vector<double> features;
  std::size_t action = 0;
  double logprob = 0.0;  // at sampling time
  double value = 0.0;    // at sampling time
};

struct EpisodeBatch {
  std::vector<PpoRecord> records;  // one per required edge
  double reward = 0.0;             // shared by every record
  int iteration = 0;
};

struct LossWeights {
  double policy = 1.0;
  double value = 0.5;
  double entropy = 0.01;
};

struct LossBreakdown {
  double policy = 0.0;   // -mean clipped surrogate
  double value = 0.0;    // mean squared error to the episode return
  double entropy = 0.0;  // mean entropy
  double total = 0.0;    // policy + w_v * value - w_e * entropy
  double clip_fraction = 0.0;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
};

struct PpoSample {
  const PpoRecord* record;
  double episode_return;
};

double clipped_ratio(double ratio, double epsilon) noexcept;

/// Clipped-surrogate loss over `samples`; when `grad` is non-null the exact
/// gradient is accumulated into it (resized to the parameter count).
LossBreakdown ppo_loss(const PolicyModel& model, std::span<const PpoSample> samples,
                       double clip_epsilon, const LossWeights& weights,
                       std::vector<double>* grad);

struct UpdateResult {
  PolicyModel model;
  bool aborted = false;
  std::string diagnostic;
  LossBreakdown first;
  LossBreakdown last;
  std::size_t steps = 0;
};

/// K epochs of shuffled minibatch Adam steps. Advantage = return - value at
/// sampling time. A non-finite loss returns the input model unchanged.
UpdateResult ppo_update(const PolicyModel& model, std::span<const EpisodeBatch> batches,
                        const PpoConfig& config, std::mt19937_64& rng);

struct WarmStartConfig {
  int max_epochs = 200;
  double target_agreement = 0.95;
  // When false the full epoch budget is spent regardless of agreement.
  bool stop_at_target = true;
  double warn_below = 0.80;
  double learning_rate = 1e-2;
  std::size_t minibatch = 64;
};

struct WarmStartReport {
  double agreement = 0.0;
  int epochs = 0;
  bool warning = false;
  std::string diagnostic;
};

/// Cross-entropy imitation of `labels` (action indices), stopping at the
/// target agreement or the epoch cap. When `value_target` is given the value
/// head is then set to that constant. Optimizer moments are reset on return.
WarmStartReport warm_start(PolicyModel& model, const FeatureSet& features,
                           std::span<const std::size_t> labels,
                           const WarmStartConfig& config, std::mt19937_64& rng,
                           std::optional<double> value_target = std::nullopt);

/// Fraction of rows whose argmax action equals the label.
double greedy_agreement(const PolicyModel& model, const FeatureSet& features,
                        std::span<const std::size_t> labels);

enum class ProposalMode { sample, greedy };

struct Proposal {
  Assignment assignment;
  EpisodeBatch batch;
};

/// Depot per required edge from the policy. `depots` gives the action order
/// (ascending depot id).
Proposal propose_assignment(const PolicyModel& model, const FeatureSet& features,
                            std::span<const Depot> depots, ProposalMode mode,
                            std::uint64_t seed);

/// Action indices of an assignment in feature-row order.
std::vector<std::size_t> assignment_labels(const Assignment& assignment,
                                           const FeatureSet& features,
                                           std::span<const Depot> depots);

struct RewardConfig {
  double w1 = 1.0;
  double w2 = 1.0;
  double penalty_weight = 1.0;
  bool normalize = true;
  double z1_reference = 1.0;  // baseline Z1 (min) when normalizing
  double z2_reference = 1.0;  // baseline Z2 (kg) when normalizing
};

/// Sum over depots of (routes beyond capacity) / capacity.
double depot_overrun_fraction(const Plan& plan);

/// w1*Z1n + w2*Z2n + penalty_weight*overrun (the quantity the loop minimises).
double plan_objective(const Plan& plan, const RewardConfig& config);

/// -plan_objective.
double compute_reward(const Plan& plan, const RewardConfig& config);

}  // namespace saltplan
