#include "saltplan/policy.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>

namespace saltplan {

namespace {

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

// _____________________________________________________________________________
PolicyModel::PolicyModel(std::size_t input_dim, std::size_t actions,
                         std::size_t hidden, std::uint64_t seed)
    : in_(input_dim), actions_(actions), hidden_(hidden) {
  if (in_ == 0 || actions_ == 0 || hidden_ == 0) {
    throw ValidationError("PolicyModel: dimensions must be positive");
  }
  params_.assign(bv() + 1, 0.0);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t offset, std::size_t fan_out, std::size_t fan_in,
                  double gain) {
    double limit = gain * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) {
      params_[offset + i] = (2.0 * unit_uniform(rng) - 1.0) * limit;
    }
  };
  fill(w1(), hidden_, in_, 1.0);
  fill(w2(), hidden_, hidden_, 1.0);
  // Small policy head: near-uniform action probabilities before training.
  fill(wp(), actions_, hidden_, 0.01);
  fill(wv(), 1, hidden_, 1.0);
  reset_optimizer();
}

PolicyModel::Trace PolicyModel::trace(std::span<const double> x) const {
  if (x.size() != in_) {
    throw ValidationError(
        fmt::format("PolicyModel: expected {} features, got {}", in_, x.size()));
  }
  Trace t;
  t.input.assign(x.begin(), x.end());
  t.h1.resize(hidden_);
  t.h2.resize(hidden_);
  const double* p = params_.data();
  for (std::size_t i = 0; i < hidden_; ++i) {
    double z = p[b1() + i];
    const double* row = p + w1() + i * in_;
    for (std::size_t j = 0; j < in_; ++j) z += row[j] * x[j];
    t.h1[i] = std::tanh(z);
  }
  for (std::size_t i = 0; i < hidden_; ++i) {
    double z = p[b2() + i];
    const double* row = p + w2() + i * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) z += row[j] * t.h1[j];
    t.h2[i] = std::tanh(z);
  }
  t.out.logits.resize(actions_);
  for (std::size_t a = 0; a < actions_; ++a) {
    double z = p[bp() + a];
    const double* row = p + wp() + a * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) z += row[j] * t.h2[j];
    t.out.logits[a] = z;
  }
  double v = p[bv()];
  for (std::size_t j = 0; j < hidden_; ++j) v += p[wv() + j] * t.h2[j];
  t.out.value = v;
  return t;
}

PolicyModel::Output PolicyModel::forward(std::span<const double> x) const {
  return trace(x).out;
}

void PolicyModel::backward(const Trace& t, std::span<const double> dlogits,
                           double dvalue, std::vector<double>& grad) const {
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  const double* p = params_.data();
  double* g = grad.data();

  std::vector<double> dh2(hidden_, 0.0);
  for (std::size_t a = 0; a < actions_; ++a) {
    double d = dlogits[a];
    if (d == 0.0) continue;
    g[bp() + a] += d;
    double* grow = g + wp() + a * hidden_;
    const double* prow = p + wp() + a * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) {
      grow[j] += d * t.h2[j];
      dh2[j] += d * prow[j];
    }
  }
  g[bv()] += dvalue;
  for (std::size_t j = 0; j < hidden_; ++j) {
    g[wv() + j] += dvalue * t.h2[j];
    dh2[j] += dvalue * p[wv() + j];
  }

  std::vector<double> dh1(hidden_, 0.0);
  for (std::size_t i = 0; i < hidden_; ++i) {
    double dz = dh2[i] * (1.0 - t.h2[i] * t.h2[i]);
    if (dz == 0.0) continue;
    g[b2() + i] += dz;
    double* grow = g + w2() + i * hidden_;
    const double* prow = p + w2() + i * hidden_;
    for (std::size_t j = 0; j < hidden_; ++j) {
      grow[j] += dz * t.h1[j];
      dh1[j] += dz * prow[j];
    }
  }
  for (std::size_t i = 0; i < hidden_; ++i) {
    double dz = dh1[i] * (1.0 - t.h1[i] * t.h1[i]);
    if (dz == 0.0) continue;
    g[b1() + i] += dz;
    double* grow = g + w1() + i * in_;
    for (std::size_t j = 0; j < in_; ++j) grow[j] += dz * t.input[j];
  }
}

void PolicyModel::adam_step(const std::vector<double>& grad, double learning_rate) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++adam_t_;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_m_[i] = beta1 * adam_m_[i] + (1.0 - beta1) * grad[i];
    adam_v_[i] = beta2 * adam_v_[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = adam_m_[i] / c1;
    double vhat = adam_v_[i] / c2;
    params_[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps);
  }
}

void PolicyModel::set_constant_value(double value) {
  std::fill(params_.begin() + static_cast<std::ptrdiff_t>(wv()),
            params_.begin() + static_cast<std::ptrdiff_t>(bv()), 0.0);
  params_[bv()] = value;
}

void PolicyModel::reset_optimizer() {
  adam_m_.assign(params_.size(), 0.0);
  adam_v_.assign(params_.size(), 0.0);
  adam_t_ = 0;
}

std::string PolicyModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "saltplan-policy-v1";
  j["input_dim"] = in_;
  j["actions"] = actions_;
  j["hidden"] = hidden_;
  j["activation"] = "tanh";
  j["layout"] = {
      {{"name", "w1"}, {"shape", {hidden_, in_}}},
      {{"name", "b1"}, {"shape", {hidden_}}},
      {{"name", "w2"}, {"shape", {hidden_, hidden_}}},
      {{"name", "b2"}, {"shape", {hidden_}}},
      {{"name", "policy_w"}, {"shape", {actions_, hidden_}}},
      {{"name", "policy_b"}, {"shape", {actions_}}},
      {{"name", "value_w"}, {"shape", {1, hidden_}}},
      {{"name", "value_b"}, {"shape", {1}}},
  };
  j["parameters"] = params_;
  return j.dump() + "\n";
}

PolicyModel PolicyModel::from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    PolicyModel m;
    m.in_ = j.at("input_dim").get<std::size_t>();
    m.actions_ = j.at("actions").get<std::size_t>();
    m.hidden_ = j.at("hidden").get<std::size_t>();
    m.params_ = j.at("parameters").get<std::vector<double>>();
    if (m.params_.size() != m.bv() + 1) {
      throw SchemaError(fmt::format("policy checkpoint: expected {} parameters, got {}",
                                    m.bv() + 1, m.params_.size()));
    }
    m.reset_optimizer();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(fmt::format("policy checkpoint: {}", e.what()));
  }
}

// _____________________________________________________________________________
std::vector<double> log_softmax(std::span<const double> logits) {
  double hi = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - hi);
  double lse = hi + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

double clipped_ratio(double ratio, double epsilon) noexcept {
  return std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
}

LossBreakdown ppo_loss(const PolicyModel& model, std::span<const PpoSample> samples,
                       double clip_epsilon, const LossWeights& weights,
                       std::vector<double>* grad) {
  LossBreakdown out;
  if (samples.empty()) return out;
  if (grad) grad->assign(model.parameter_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const std::size_t k = model.action_count();
  std::vector<double> dlogits(k);
  std::size_t clipped = 0;
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = -std::numeric_limits<double>::infinity();

  for (const auto& s : samples) {
    const auto& rec = *s.record;
    auto t = model.trace(rec.features);
    auto logp = log_softmax(t.out.logits);
    double entropy = 0.0;
    for (std::size_t j = 0; j < k; ++j) entropy -= std::exp(logp[j]) * logp[j];

    const double advantage = s.episode_return - rec.value;
    const double ratio = std::exp(logp[rec.action] - rec.logprob);
    const double clipped_r = clipped_ratio(ratio, clip_epsilon);
    const double unclipped_obj = ratio * advantage;
    const double clipped_obj = clipped_r * advantage;
    const bool gradient_flows = unclipped_obj <= clipped_obj;
    if (clipped_r != ratio) ++clipped;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);

    const double surrogate = std::min(unclipped_obj, clipped_obj);
    const double verr = t.out.value - s.episode_return;
    out.policy -= surrogate * inv_n;
    out.value += verr * verr * inv_n;
    out.entropy += entropy * inv_n;

    if (!grad) continue;
    // d(-surrogate)/d(logp_a) = -ratio * A on the unclipped branch.
    const double dlogp_a =
        gradient_flows ? -weights.policy * ratio * advantage * inv_n : 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(logp[j]);
      double d = dlogp_a * ((j == rec.action ? 1.0 : 0.0) - p);
      // d(-w_e * H)/d(logit_j) = w_e * p_j * (log p_j + H)
      d += weights.entropy * inv_n * p * (logp[j] + entropy);
      dlogits[j] = d;
    }
    const double dvalue = weights.value * 2.0 * verr * inv_n;
    model.backward(t, dlogits, dvalue, *grad);
  }
  out.total = weights.policy * out.policy + weights.value * out.value -
              weights.entropy * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) * inv_n;
  return out;
}

UpdateResult ppo_update(const PolicyModel& model, std::span<const EpisodeBatch> batches,
                        const PpoConfig& config, std::mt19937_64& rng) {
  UpdateResult result;
  result.model = model;
  if (batches.empty()) throw ValidationError("ppo_update: no episode batches");

  std::vector<PpoSample> samples;
  for (const auto& b : batches) {
    for (const auto& r : b.records) samples.push_back({&r, b.reward});
  }
  if (samples.empty()) return result;

  const LossWeights weights{1.0, config.value_coef, config.entropy_coef};
  const std::size_t mb = std::max<std::size_t>(1, config.minibatch);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<PpoSample> chunk;
  std::vector<double> grad;
  bool first = true;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      chunk.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + mb); ++i) {
        chunk.push_back(samples[order[i]]);
      }
      auto loss = ppo_loss(result.model, chunk, config.clip_epsilon, weights, &grad);
      if (!std::isfinite(loss.total) || !all_finite(grad)) {
        UpdateResult aborted;
        aborted.model = model;
        aborted.aborted = true;
        aborted.diagnostic = fmt::format(
            "non-finite PPO loss at epoch {} (policy={}, value={}, entropy={}); "
            "update discarded",
            epoch, loss.policy, loss.value, loss.entropy);
        return aborted;
      }
      if (first) {
        result.first = loss;
        first = false;
      }
      result.last = loss;
      result.model.adam_step(grad, config.learning_rate);
      ++result.steps;
    }
  }
  return result;
}

// _____________________________________________________________________________
static std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double greedy_agreement(const PolicyModel& model, const FeatureSet& features,
                        std::span<const std::size_t> labels) {
  if (features.rows.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < features.rows.size(); ++i) {
    if (argmax(model.forward(features.rows[i].values).logits) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(features.rows.size());
}

WarmStartReport warm_start(PolicyModel& model, const FeatureSet& features,
                           std::span<const std::size_t> labels,
                           const WarmStartConfig& config, std::mt19937_64& rng,
                           std::optional<double> value_target) {
  if (labels.size() != features.rows.size()) {
    throw ValidationError("warm_start: one label per feature row required");
  }
  WarmStartReport report;
  const std::size_t n = features.rows.size();
  const std::size_t k = model.action_count();
  report.agreement = greedy_agreement(model, features, labels);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad, dlogits(k);

  while (report.epochs < config.max_epochs &&
         (!config.stop_at_target || report.agreement < config.target_agreement)) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.minibatch) {
      std::size_t end = std::min(n, start + config.minibatch);
      const double inv = 1.0 / static_cast<double>(end - start);
      grad.assign(model.parameter_count(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        std::size_t row = order[i];
        auto t = model.trace(features.rows[row].values);
        auto p = softmax(t.out.logits);
        for (std::size_t j = 0; j < k; ++j) {
          dlogits[j] = (p[j] - (j == labels[row] ? 1.0 : 0.0)) * inv;
        }
        model.backward(t, dlogits, 0.0, grad);
      }
      model.adam_step(grad, config.learning_rate);
    }
    ++report.epochs;
    report.agreement = greedy_agreement(model, features, labels);
  }
  if (value_target) model.set_constant_value(*value_target);
  model.reset_optimizer();
  if (report.agreement < config.warn_below) {
    report.warning = true;
    report.diagnostic = fmt::format(
        "warm start reached only {:.1f}% agreement after {} epochs",
        100.0 * report.agreement, report.epochs);
  }
  return report;
}

std::vector<std::size_t> assignment_labels(const Assignment& assignment,
                                           const FeatureSet& features,
                                           std::span<const Depot> depots) {
  std::vector<std::size_t> labels;
  labels.reserve(features.rows.size());
  for (const auto& row : features.rows) {
    DepotId d = assignment.at(row.edge);
    auto it = std::find_if(depots.begin(), depots.end(),
                           [&](const Depot& x) { return x.id == d; });
    if (it == depots.end()) {
      throw ValidationError(fmt::format("unknown depot {} in assignment", raw(d)));
    }
    labels.push_back(static_cast<std::size_t>(it - depots.begin()));
  }
  return labels;
}

Proposal propose_assignment(const PolicyModel& model, const FeatureSet& features,
                            std::span<const Depot> depots, ProposalMode mode,
                            std::uint64_t seed) {
  if (depots.size() != model.action_count()) {
    throw ValidationError("propose_assignment: depot count does not match policy");
  }
  std::mt19937_64 rng(seed);
  Proposal out;
  out.batch.records.reserve(features.rows.size());
  for (const auto& row : features.rows) {
    auto o = model.forward(row.values);
    auto logp = log_softmax(o.logits);
    std::size_t action = 0;
    if (mode == ProposalMode::greedy) {
      action = argmax(logp);
    } else {
      double u = unit_uniform(rng);
      double acc = 0.0;
      action = logp.size() - 1;
      for (std::size_t j = 0; j < logp.size(); ++j) {
        acc += std::exp(logp[j]);
        if (u < acc) {
          action = j;
          break;
        }
      }
    }
    out.assignment.set(row.edge, depots[action].id);
    out.batch.records.push_back({row.values, action, logp[action], o.value});
  }
  return out;
}

// _____________________________________________________________________________
double depot_overrun_fraction(const Plan& plan) {
  double total = 0.0;
  for (const auto& v : plan.violations) {
    if (v.rule == ViolationRule::depot_capacity && v.limit > 0.0) {
      total += v.excess / v.limit;
    }
  }
  return total;
}

double plan_objective(const Plan& plan, const RewardConfig& config) {
  auto norm = [&](double value, double ref) {
    if (!config.normalize) return value;
    return ref > 0.0 ? value / ref : 0.0;
  };
  return config.w1 * norm(plan.Z1_minutes, config.z1_reference) +
         config.w2 * norm(plan.Z2_kg, config.z2_reference) +
         config.penalty_weight * depot_overrun_fraction(plan);
}

double compute_reward(const Plan& plan, const RewardConfig& config) {
  return -plan_objective(plan, config);
}

}  // namespace saltplan
