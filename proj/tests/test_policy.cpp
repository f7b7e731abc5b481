#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "saltplan/policy.hpp"

using namespace saltplan;

namespace {

FeatureSet random_features(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  FeatureSet fs;
  fs.dim = dim;
  for (std::size_t i = 0; i < rows; ++i) {
    SegmentFeatures f;
    f.edge = EdgeId{static_cast<std::int64_t>(i)};
    for (std::size_t k = 0; k < dim; ++k) f.values.push_back(u(rng));
    fs.rows.push_back(f);
  }
  return fs;
}

std::vector<Depot> depots(std::size_t n) {
  std::vector<Depot> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({DepotId{static_cast<std::int64_t>(i + 1)},
                   NodeId{static_cast<std::int64_t>(i)}, 1});
  }
  return out;
}

// Records whose old log-probabilities put the ratio at a chosen value.
std::vector<PpoRecord> records_with_ratios(const PolicyModel& m, const FeatureSet& fs,
                                           const std::vector<double>& ratios,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PpoRecord> out;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const auto& x = fs.rows[i % fs.rows.size()].values;
    auto o = m.forward(x);
    auto logp = log_softmax(o.logits);
    std::size_t a = rng() % m.action_count();
    out.push_back({x, a, logp[a] - std::log(ratios[i]), o.value + 0.3});
  }
  return out;
}

// Central differences of the total loss, compared entry by entry against the
// analytic gradient.
double max_relative_error(const PolicyModel& model, const std::vector<PpoSample>& samples,
                          const LossWeights& w, double eps) {
  std::vector<double> grad;
  ppo_loss(model, samples, eps, w, &grad);
  PolicyModel probe = model;
  double scale = 0.0;
  std::vector<double> numeric(grad.size());
  const double h = 1e-5;  // near the cube root of machine epsilon
  for (std::size_t i = 0; i < grad.size(); ++i) {
    double keep = probe.parameters()[i];
    probe.parameters()[i] = keep + h;
    double up = ppo_loss(probe, samples, eps, w, nullptr).total;
    probe.parameters()[i] = keep - h;
    double down = ppo_loss(probe, samples, eps, w, nullptr).total;
    probe.parameters()[i] = keep;
    numeric[i] = (up - down) / (2 * h);
    scale = std::max({scale, std::abs(numeric[i]), std::abs(grad[i])});
  }
  REQUIRE(scale > 0.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    // Entries far below the gradient scale are judged against that scale.
    double denom = std::max({std::abs(numeric[i]), std::abs(grad[i]), 1e-3 * scale});
    worst = std::max(worst, std::abs(grad[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_SUITE("policy") {

TEST_CASE("softmax sums to one and outputs stay finite") {
  PolicyModel m(8, 3, 16, 5);
  auto fs = random_features(50, 8, 1);
  for (const auto& r : fs.rows) {
    auto o = m.forward(r.values);
    auto p = softmax(o.logits);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-9);
    for (double l : o.logits) CHECK(std::isfinite(l));
  }
  std::vector<double> big{1000.0, -1000.0, 0.0};
  auto lp = log_softmax(big);
  CHECK(std::isfinite(lp[1]));
  CHECK(lp[0] == doctest::Approx(0.0));
}

TEST_CASE("analytic gradients match central differences") {
  PolicyModel m(6, 3, 8, 11);
  auto fs = random_features(6, 6, 2);
  // Ratios inside, below and above the clip window.
  auto recs = records_with_ratios(m, fs, {1.0, 0.95, 1.1, 0.5, 1.6, 1.05}, 3);
  std::vector<PpoSample> samples;
  std::vector<double> returns{-1.0, 0.5, -2.0, 1.0, -0.5, 2.0};
  for (std::size_t i = 0; i < recs.size(); ++i) samples.push_back({&recs[i], returns[i]});

  SUBCASE("policy term") { CHECK(max_relative_error(m, samples, {1, 0, 0}, 0.2) <= 1e-4); }
  SUBCASE("value term") { CHECK(max_relative_error(m, samples, {0, 1, 0}, 0.2) <= 1e-4); }
  SUBCASE("entropy term") { CHECK(max_relative_error(m, samples, {0, 0, 1}, 0.2) <= 1e-4); }
  SUBCASE("combined") {
    CHECK(max_relative_error(m, samples, {1, 0.5, 0.01}, 0.2) <= 1e-4);
  }
}

TEST_CASE("clipped ratios have no policy gradient") {
  PolicyModel m(4, 2, 6, 4);
  auto fs = random_features(2, 4, 9);
  // A > 0 with ratio above 1.2 and A < 0 with ratio below 0.8 are both clipped.
  auto recs = records_with_ratios(m, fs, {1.5, 0.5}, 1);
  std::vector<PpoSample> samples{{&recs[0], recs[0].value + 1.0},
                                 {&recs[1], recs[1].value - 1.0}};
  std::vector<double> grad;
  auto loss = ppo_loss(m, samples, 0.2, {1, 0, 0}, &grad);
  CHECK(loss.clip_fraction == 1.0);
  for (double g : grad) CHECK(g == 0.0);
  CHECK(loss.policy == doctest::Approx(-(1.2 * 1.0 + 0.8 * -1.0) / 2.0));
  CHECK(clipped_ratio(1.7, 0.2) == 1.2);
  CHECK(clipped_ratio(0.1, 0.2) == 0.8);
  CHECK(clipped_ratio(1.05, 0.2) == 1.05);
}

TEST_CASE("zero advantage and no entropy leave parameters unchanged") {
  PolicyModel m(5, 3, 8, 21);
  m.set_constant_value(-2.0);
  auto fs = random_features(20, 5, 4);
  auto p = propose_assignment(m, fs, depots(3), ProposalMode::sample, 8);
  for (const auto& r : p.batch.records) CHECK(r.value == -2.0);
  p.batch.reward = -2.0;
  PpoConfig cfg;
  cfg.entropy_coef = 0.0;
  std::mt19937_64 rng(1);
  std::vector<EpisodeBatch> batches{p.batch};
  auto res = ppo_update(m, batches, cfg, rng);
  CHECK_FALSE(res.aborted);
  CHECK(res.model.parameters() == m.parameters());
}

TEST_CASE("a non-finite reward aborts the update and keeps the model") {
  PolicyModel m(5, 2, 8, 2);
  auto fs = random_features(4, 5, 4);
  auto p = propose_assignment(m, fs, depots(2), ProposalMode::sample, 8);
  p.batch.reward = std::numeric_limits<double>::quiet_NaN();
  std::mt19937_64 rng(1);
  std::vector<EpisodeBatch> batches{p.batch};
  auto res = ppo_update(m, batches, PpoConfig{}, rng);
  CHECK(res.aborted);
  CHECK_FALSE(res.diagnostic.empty());
  CHECK(res.model.parameters() == m.parameters());
}

TEST_CASE("surrogate matches the clipped objective for any ratio") {
  PolicyModel m(4, 3, 6, 8);
  auto fs = random_features(8, 4, 2);
  std::vector<double> ratios{0.3, 0.79, 0.85, 0.95, 1.0, 1.19, 1.25, 2.5};
  auto recs = records_with_ratios(m, fs, ratios, 4);
  std::vector<PpoSample> samples;
  double expected = 0.0;
  int outside = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    double adv = (i % 2 == 0) ? 1.5 : -0.7;
    samples.push_back({&recs[i], recs[i].value + adv});
    double r = ratios[i];
    double c = std::min(std::max(r, 0.8), 1.2);
    expected -= std::min(r * adv, c * adv) / static_cast<double>(ratios.size());
    outside += (r < 0.8 - 1e-12 || r > 1.2 + 1e-12);
  }
  auto loss = ppo_loss(m, samples, 0.2, {1, 0, 0}, nullptr);
  CHECK(loss.policy == doctest::Approx(expected).epsilon(1e-12));
  CHECK(loss.clip_fraction * ratios.size() == doctest::Approx(outside));
  CHECK(loss.min_ratio == doctest::Approx(0.3));
  CHECK(loss.max_ratio == doctest::Approx(2.5));
}

TEST_CASE("two-armed bandit converges to the better depot") {
  int converged = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto fs = random_features(32, 7, seed);
    PolicyModel m(7, 2, 64, seed);
    auto ds = depots(2);
    int updates = 0;
    for (; updates < 200; ++updates) {
      auto g = propose_assignment(m, fs, ds, ProposalMode::greedy, 0);
      bool all_a = std::all_of(g.batch.records.begin(), g.batch.records.end(),
                               [](const PpoRecord& r) { return r.action == 0; });
      if (all_a) break;
      auto s = propose_assignment(m, fs, ds, ProposalMode::sample, rng());
      std::vector<EpisodeBatch> bs;
      for (const auto& r : s.batch.records) {
        EpisodeBatch b;
        b.records = {r};
        b.reward = r.action == 0 ? -1.0 : -2.0;
        bs.push_back(b);
      }
      m = ppo_update(m, bs, PpoConfig{}, rng).model;
    }
    converged += updates < 200;
  }
  CHECK(converged >= 19);
}

TEST_CASE("uniform logits sample each of three depots a third of the time") {
  PolicyModel m(3, 3, 4, 1);
  // Zero policy head: exactly uniform probabilities. Parameter layout is
  // w1, b1, w2, b2, wp, bp, wv, bv.
  PolicyModel flat = m;
  auto& p = flat.parameters();
  const std::size_t h = 4, in = 3, k = 3;
  const std::size_t wp = h * in + h + h * h + h;
  for (std::size_t i = wp; i < wp + k * h + k; ++i) p[i] = 0.0;
  auto fs = random_features(10000, 3, 6);
  auto prop = propose_assignment(flat, fs, depots(3), ProposalMode::sample, 99);
  std::vector<int> counts(3, 0);
  for (const auto& r : prop.batch.records) {
    ++counts[r.action];
    CHECK(r.logprob == doctest::Approx(std::log(1.0 / 3.0)));
  }
  const double sd = std::sqrt(10000.0 * (1.0 / 3.0) * (2.0 / 3.0));
  for (int c : counts) CHECK(std::abs(c - 10000.0 / 3.0) <= 3 * sd);
}

TEST_CASE("greedy proposals are reproducible and sampling depends only on the seed") {
  PolicyModel m(5, 3, 8, 3);
  auto fs = random_features(40, 5, 7);
  auto a = propose_assignment(m, fs, depots(3), ProposalMode::greedy, 1);
  auto b = propose_assignment(m, fs, depots(3), ProposalMode::greedy, 2);
  CHECK(a.assignment == b.assignment);
  auto c = propose_assignment(m, fs, depots(3), ProposalMode::sample, 5);
  auto d = propose_assignment(m, fs, depots(3), ProposalMode::sample, 5);
  CHECK(c.assignment == d.assignment);
  CHECK(c.batch.records.size() == 40);
}

TEST_CASE("warm start imitates nearest-depot labels") {
  std::mt19937_64 rng(1);
  SUBCASE("one depot agrees at once") {
    PolicyModel m(6, 1, 8, 1);
    auto fs = random_features(30, 6, 1);
    std::vector<std::size_t> labels(30, 0);
    auto r = warm_start(m, fs, labels, WarmStartConfig{}, rng);
    CHECK(r.agreement == 1.0);
    CHECK(r.epochs == 0);
    CHECK_FALSE(r.warning);
  }
  SUBCASE("two separable depots") {
    auto fs = random_features(400, 2, 3);
    std::vector<std::size_t> labels;
    for (const auto& row : fs.rows) labels.push_back(row.values[0] < 0.5 ? 0 : 1);
    PolicyModel m(2, 2, 32, 2);
    WarmStartConfig cfg;
    cfg.target_agreement = 0.99;
    cfg.max_epochs = 400;
    auto r = warm_start(m, fs, labels, cfg, rng, -2.0);
    CHECK(r.agreement >= 0.99);
    CHECK(m.forward(fs.rows[0].values).value == -2.0);
    auto p = propose_assignment(m, fs, depots(2), ProposalMode::greedy, 0);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) differ += p.batch.records[i].action != labels[i];
    CHECK(differ <= labels.size() / 20);
  }
  SUBCASE("untrained model on three balanced depots is near chance") {
    auto fs = random_features(3000, 4, 8);
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < fs.rows.size(); ++i) labels.push_back(i % 3);
    double total = 0.0;
    for (std::uint64_t s = 1; s <= 10; ++s) total += greedy_agreement(PolicyModel(4, 3, 16, s), fs, labels);
    CHECK(total / 10.0 == doctest::Approx(1.0 / 3.0).epsilon(0.1));
  }
  SUBCASE("unreachable agreement warns") {
    auto fs = random_features(200, 3, 5);
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < fs.rows.size(); ++i) labels.push_back(rng() % 2);
    PolicyModel m(3, 2, 4, 1);
    WarmStartConfig cfg;
    cfg.max_epochs = 2;
    auto r = warm_start(m, fs, labels, cfg, rng);
    CHECK(r.warning);
    CHECK(r.diagnostic.find("agreement") != std::string::npos);
  }
}

TEST_CASE("checkpoint round trip") {
  PolicyModel m(5, 3, 8, 17);
  auto again = PolicyModel::from_json(m.to_json());
  CHECK(again.parameters() == m.parameters());
  CHECK(again.to_json() == m.to_json());
  CHECK_THROWS_AS(PolicyModel::from_json(R"({"format":"other"})"), SchemaError);
  CHECK_THROWS_AS(PolicyModel::from_json("not json"), SchemaError);
}

TEST_CASE("reward examples") {
  Plan base;
  base.Z1_minutes = 120.0;
  base.Z2_kg = 3000.0;
  RewardConfig cfg;
  cfg.z1_reference = 120.0;
  cfg.z2_reference = 3000.0;
  CHECK(compute_reward(base, cfg) == doctest::Approx(-2.0));

  Plan better = base;
  better.Z1_minutes = 0.973 * 120.0;
  better.Z2_kg = 0.951 * 3000.0;
  CHECK(compute_reward(better, cfg) == doctest::Approx(-1.924));

  Plan over = base;
  Violation v;
  v.rule = ViolationRule::depot_capacity;
  v.hard = false;
  v.quantity = 3;
  v.limit = 2;
  v.excess = 1;
  over.violations.push_back(v);
  CHECK(depot_overrun_fraction(over) == 0.5);
  CHECK(compute_reward(over, cfg) == doctest::Approx(-2.5));
  CHECK(plan_objective(over, cfg) == -compute_reward(over, cfg));

  cfg.normalize = false;
  CHECK(compute_reward(base, cfg) == doctest::Approx(-3120.0));
}

}  // TEST_SUITE
