#include "saltplan/comparison.hpp"

#include <fmt/format.h>

#include <chrono>

#include "saltplan/io.hpp"

namespace saltplan {

namespace {

MethodRow row_of(const BenchInstance& inst, const char* method, const Plan& plan,
                 const RewardConfig& reward, double seconds) {
  MethodRow r;
  r.instance = inst.name;
  r.method = method;
  r.seed = inst.seed;
  r.Z1_minutes = plan.Z1_minutes;
  r.Z2_kg = plan.Z2_kg;
  r.vehicles = plan.total_vehicles;
  RewardConfig plain = reward;
  plain.penalty_weight = 0.0;
  r.objective = plan_objective(plan, plain);
  r.wall_seconds = seconds;
  r.hard_violations = plan.hard_violation_count();
  r.soft_violations = plan.violations.size() - r.hard_violations;
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ComparisonReport run_comparison(const std::vector<BenchInstance>& instances,
                                int iterations, const TrainConfig& base) {
  ComparisonReport report;
  std::string canon;
  for (const auto& inst : instances) {
    TrainConfig cfg = base;
    cfg.seed = inst.seed;
    canon += fmt::format("{}:{};", inst.name, inst.seed);

    TrainConfig baseline_cfg = cfg;
    baseline_cfg.iterations = 0;
    auto t0 = std::chrono::steady_clock::now();
    try {
      auto a = train_loop(inst.network, inst.fleet, baseline_cfg);
      report.rows.push_back(row_of(inst, kBaselineMethod, a.baseline_plan, a.reward,
                                   seconds_since(t0)));
    } catch (const Error& e) {
      MethodRow r;
      r.instance = inst.name;
      r.method = kBaselineMethod;
      r.seed = inst.seed;
      r.failed = true;
      r.error = e.what();
      report.rows.push_back(r);
    }

    cfg.iterations = iterations;
    t0 = std::chrono::steady_clock::now();
    try {
      auto b = train_loop(inst.network, inst.fleet, cfg);
      report.rows.push_back(
          row_of(inst, kBilevelMethod, b.best_plan, b.reward, seconds_since(t0)));
    } catch (const Error& e) {
      MethodRow r;
      r.instance = inst.name;
      r.method = kBilevelMethod;
      r.seed = inst.seed;
      r.failed = true;
      r.error = e.what();
      report.rows.push_back(r);
    }
  }
  canon += fmt::format("iterations={};w1={};w2={};penalty={}", iterations, base.w1,
                       base.w2, base.penalty_weight);
  report.config_hash = io::hex64(io::fnv1a(canon));

  for (const char* method : {kBaselineMethod, kBilevelMethod}) {
    MethodSummary s;
    s.method = method;
    std::size_t ok = 0;
    for (const auto& r : report.rows) {
      if (r.method != method) continue;
      ++s.instances;
      if (r.failed) {
        ++s.failures;
        continue;
      }
      ++ok;
      s.mean_Z1_minutes += r.Z1_minutes;
      s.mean_Z2_kg += r.Z2_kg;
      s.mean_vehicles += r.vehicles;
      s.mean_objective += r.objective;
      s.total_wall_seconds += r.wall_seconds;
      s.hard_violations += r.hard_violations;
    }
    if (ok) {
      s.mean_Z1_minutes /= static_cast<double>(ok);
      s.mean_Z2_kg /= static_cast<double>(ok);
      s.mean_vehicles /= static_cast<double>(ok);
      s.mean_objective /= static_cast<double>(ok);
    }
    report.summary.push_back(s);
  }
  return report;
}

std::string format_report_csv(const ComparisonReport& report) {
  std::string out =
      "instance,method,seed,status,Z1_min,Z2_kg,NoV,objective,wall_s,"
      "hard_violations,soft_violations,config_hash\n";
  auto f = io::format_double;
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", io::csv_escape(r.instance),
                       r.method, r.seed, r.failed ? "failed" : "ok", f(r.Z1_minutes),
                       f(r.Z2_kg), r.vehicles, f(r.objective), f(r.wall_seconds),
                       r.hard_violations, r.soft_violations, report.config_hash);
  }
  for (const auto& s : report.summary) {
    out += fmt::format("ALL,{},,{}/{} ok,{},{},{},{},{},{},,{}\n", s.method,
                       s.instances - s.failures, s.instances, f(s.mean_Z1_minutes),
                       f(s.mean_Z2_kg), f(s.mean_vehicles), f(s.mean_objective),
                       f(s.total_wall_seconds), s.hard_violations, report.config_hash);
  }
  return out;
}

}  // namespace saltplan
