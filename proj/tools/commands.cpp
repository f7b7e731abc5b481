#include "commands.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include "saltplan/artifacts.hpp"
#include "saltplan/comparison.hpp"
#include "saltplan/generator.hpp"
#include "saltplan/geojson.hpp"
#include "saltplan/io.hpp"
#include "saltplan/oracle.hpp"
#include "saltplan/preprocess.hpp"

namespace saltplan::cli {

namespace fs = std::filesystem;

namespace {

// Console output goes through std::cout so callers can redirect it.
template <typename... Args>
void say(fmt::format_string<Args...> format, Args&&... args) {
  std::cout << fmt::format(format, std::forward<Args>(args)...);
}

fs::path default_out() {
  if (const char* env = std::getenv("SALTPLAN_OUT"); env && *env) return env;
  return "saltplan-out";
}

struct Instance {
  RoadNetwork network;
  FleetSpec fleet;
  std::string digest;  // hash of the input files
};

Instance load_instance(const fs::path& dir, const fs::path& fleet_file) {
  auto paths = InstancePaths::in_directory(dir);
  Instance out;
  out.network = load_network(paths);
  fs::path fleet_path = fleet_file.empty() ? dir / "fleet.json" : fleet_file;
  auto fleet_text = io::read_file(fleet_path);
  out.fleet = parse_fleet_json(fleet_text);
  require_depots_present(out.network, out.fleet);
  out.digest = io::hex64(io::fnv1a(io::read_file(paths.nodes_csv) + "\x1f" +
                                   io::read_file(paths.edges_csv) + "\x1f" + fleet_text));
  return out;
}

void write_instance(const fs::path& dir, const RoadNetwork& network,
                    const FleetSpec& fleet) {
  fs::create_directories(dir);
  io::write_file_atomic(dir / "nodes.csv", format_nodes_csv(network));
  io::write_file_atomic(dir / "edges.csv", format_edges_csv(network));
  io::write_file_atomic(dir / "instance.json", format_instance_header(network.header()));
  io::write_file_atomic(dir / "fleet.json", format_fleet_json(fleet));
}

void print_violations(const Plan& plan) {
  for (const auto& v : plan.violations) {
    std::cerr << (v.hard ? "violation: " : "warning (soft): ") << to_string(v.rule) << ": "
              << v.message << "\n";
  }
}

// _____________________________________________________________________________
struct PreprocessArgs {
  std::string in, fleet, out;
};

int cmd_preprocess(const PreprocessArgs& a) {
  auto inst = load_instance(a.in, a.fleet);
  PreprocessReport report;
  auto net = preprocess_instance(inst.network, inst.fleet, &report);
  write_instance(a.out, net, inst.fleet);
  io::write_file_atomic(fs::path(a.out) / "stats.json", format_stats_json(report));
  say("nodes {} -> {} (scc {}), directed edges {} -> {} (scc {})\n",
             report.before.nodes, report.after.nodes, report.after_scc.nodes,
             report.before.edges, report.after.edges, report.after_scc.edges);
  say("treated km {:.3f}, treated lane-km {:.3f}, one-way fraction {:.4f}\n",
             report.after.treated_km, report.after.treated_lane_km,
             report.after.oneway_fraction);
  return kOk;
}

// _____________________________________________________________________________
struct PlanArgs {
  std::string instance, fleet, out;
  int iterations = 10;
  std::uint64_t seed = 0;
  double w1 = 1.0, w2 = 1.0, penalty = 1.0;
  std::string selection = "nearest";
  std::string depot_mode = "soft";
  bool raw_objectives = false;
};

int cmd_plan(const PlanArgs& a) {
  auto inst = load_instance(a.instance, a.fleet);
  TrainConfig cfg;
  cfg.iterations = a.iterations;
  cfg.seed = a.seed;
  cfg.w1 = a.w1;
  cfg.w2 = a.w2;
  cfg.penalty_weight = a.penalty;
  cfg.normalize = !a.raw_objectives;
  cfg.selection = a.selection == "farthest" ? Selection::farthest : Selection::nearest;
  cfg.depot_mode = a.depot_mode == "hard" ? DepotCapacityMode::hard : DepotCapacityMode::soft;

  auto result = train_loop(inst.network, inst.fleet, cfg);

  RunMetadata meta;
  meta.seed = a.seed;
  meta.iterations = a.iterations;
  meta.best_iteration = result.best_iteration;
  meta.config_hash = io::hex64(io::fnv1a(fmt::format(
      "{};iterations={};seed={};w1={};w2={};penalty={};normalize={};selection={};"
      "depot_mode={}",
      inst.digest, a.iterations, a.seed, a.w1, a.w2, a.penalty, cfg.normalize,
      a.selection, a.depot_mode)));
  if (a.iterations > 0) meta.normalization = encode_features(inst.network, inst.fleet.depots).norm;

  fs::path out = a.out;
  write_plan_artifacts(out, result.best_assignment, result.best_plan, inst.network,
                       inst.fleet, meta);
  io::write_file_atomic(out / "training_log.csv", format_training_log(result.log));
  if (a.iterations > 0) io::write_file_atomic(out / "model.json", result.model.to_json());
  for (const auto& d : result.diagnostics) std::cerr << "note: " << d << "\n";

  const auto& p = result.best_plan;
  say("Z1 {:.3f} min, Z2 {:.3f} kg CO2, NoV {} (best iteration {}), artifacts in {}\n",
             p.Z1_minutes, p.Z2_kg, p.total_vehicles, result.best_iteration, out.string());
  print_violations(p);
  return p.hard_violation_count() == 0 ? kOk : kHardViolations;
}

// _____________________________________________________________________________
struct EvaluateArgs {
  std::string instance, fleet, plan, depot_mode = "soft";
};

int cmd_evaluate(const EvaluateArgs& a) {
  auto inst = load_instance(a.instance, a.fleet);
  auto loaded = load_plan_artifacts(a.plan);
  auto mode = a.depot_mode == "hard" ? DepotCapacityMode::hard : DepotCapacityMode::soft;
  Plan plan = loaded.plan;
  for (auto& r : plan.routes) {
    auto m = measure_route(r, inst.network, inst.fleet.vehicle);
    r.duration_minutes = m.minutes;
    r.distance_km = m.km;
    r.salt_used_lane_km = m.salt_lane_km;
    r.emissions_kg = m.kg_co2;
  }
  finalize_plan(plan, loaded.assignment, inst.network, inst.fleet, mode);
  say("Z1 {} min (persisted {}), Z2 {} kg (persisted {}), NoV {} (persisted {})\n",
             io::format_double(plan.Z1_minutes), io::format_double(loaded.persisted_Z1_minutes),
             io::format_double(plan.Z2_kg), io::format_double(loaded.persisted_Z2_kg),
             plan.total_vehicles, loaded.persisted_vehicles);
  print_violations(plan);
  if (plan.hard_violation_count() > 0) return kHardViolations;
  if (plan.Z1_minutes != loaded.persisted_Z1_minutes ||
      plan.Z2_kg != loaded.persisted_Z2_kg ||
      plan.total_vehicles != loaded.persisted_vehicles) {
    std::cerr << "error: re-evaluated metrics differ from plan.json\n";
    return kMismatch;
  }
  return kOk;
}

// _____________________________________________________________________________
struct ExportArgs {
  std::string instance, fleet, plan, out;
};

int cmd_export(const ExportArgs& a) {
  auto inst = load_instance(a.instance, a.fleet);
  auto loaded = load_plan_artifacts(a.plan);
  Plan plan = loaded.plan;
  for (auto& r : plan.routes) {
    auto m = measure_route(r, inst.network, inst.fleet.vehicle);
    r.duration_minutes = m.minutes;
    r.distance_km = m.km;
    r.salt_used_lane_km = m.salt_lane_km;
    r.emissions_kg = m.kg_co2;
  }
  fs::path out = a.out.empty() ? fs::path(a.plan) / "routes.geojson" : fs::path(a.out);
  io::write_file_atomic(out, export_geojson(plan, inst.network, inst.fleet));
  say("wrote {} ({} routes)\n", out.string(), plan.routes.size());
  return kOk;
}

// _____________________________________________________________________________
struct GenerateArgs {
  GeneratorConfig config;
  std::string out;
  bool preprocess = false;
};

int cmd_generate(const GenerateArgs& a) {
  auto inst = generate_instance(a.config);
  RoadNetwork net = a.preprocess ? preprocess_instance(inst.network, inst.fleet) : inst.network;
  write_instance(a.out, net, inst.fleet);
  say("{} nodes, {} directed edges, {} required, {} depots -> {}\n", net.node_count(),
             net.edge_count(), net.required_edges().size(), inst.fleet.depots.size(), a.out);
  return kOk;
}

// _____________________________________________________________________________
struct OracleArgs {
  std::string instance, fleet;
  std::uint64_t seed = 1;
  int count = 10;
};

int oracle_one(const RoadNetwork& net, const FleetSpec& fleet, const std::string& label,
               double& gap_sum, int& gaps) {
  const auto& depot = fleet.depots.front();
  auto o = brute_force_oracle(net, depot, fleet.vehicle);
  Assignment a;
  for (auto e : net.required_edges()) a.set(net.edge(e).id, depot.id);
  auto h = solve_assignment(net, a, fleet);
  if (!o.feasible) {
    say("{}: no feasible plan ({} candidates)\n", label, o.plans_enumerated);
    return o.route_disagreements + o.plan_disagreements == 0 ? kOk : kMismatch;
  }
  double gap = o.Z1_minutes > 0 ? h.Z1_minutes / o.Z1_minutes - 1.0 : 0.0;
  gap_sum += gap;
  ++gaps;
  say(
      "{}: {} required, {} plans, oracle Z1 {:.4f} Z2 {:.4f}, heuristic Z1 {:.4f} Z2 {:.4f}, "
      "gap {:.2f}%, disagreements {}\n",
      label, net.required_edges().size(), o.plans_enumerated, o.Z1_minutes, o.Z2_kg,
      h.Z1_minutes, h.Z2_kg, 100.0 * gap, o.route_disagreements + o.plan_disagreements);
  return o.route_disagreements + o.plan_disagreements == 0 ? kOk : kMismatch;
}

int cmd_oracle(const OracleArgs& a) {
  double gap_sum = 0.0;
  int gaps = 0, code = kOk;
  if (!a.instance.empty()) {
    auto inst = load_instance(a.instance, a.fleet);
    if (inst.fleet.depots.size() != 1) {
      throw ValidationError("the oracle handles single-depot instances only");
    }
    code = oracle_one(inst.network, inst.fleet, a.instance, gap_sum, gaps);
  } else {
    for (int i = 0; i < a.count; ++i) {
      MicroConfig mc;
      mc.seed = a.seed + static_cast<std::uint64_t>(i);
      auto inst = generate_micro_instance(mc);
      int c = oracle_one(inst.network, inst.fleet, fmt::format("micro seed {}", mc.seed),
                         gap_sum, gaps);
      if (c != kOk) code = c;
    }
  }
  if (gaps) say("mean Z1 gap {:.2f}%\n", 100.0 * gap_sum / gaps);
  return code;
}

// _____________________________________________________________________________
struct BenchArgs {
  int count = 5;
  std::uint64_t seed = 1;
  std::size_t nodes = 400;
  int iterations = 10;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  std::vector<BenchInstance> instances;
  for (int i = 0; i < a.count; ++i) {
    GeneratorConfig g;
    g.seed = a.seed + static_cast<std::uint64_t>(i);
    g.nodes = a.nodes;
    auto inst = generate_instance(g);
    instances.push_back({fmt::format("synthetic-{}", g.seed), g.seed,
                         preprocess_instance(inst.network, inst.fleet), inst.fleet});
  }
  auto report = run_comparison(instances, a.iterations);
  fs::path out = a.out.empty() ? default_out() : fs::path(a.out);
  fs::create_directories(out);
  io::write_file_atomic(out / "report.csv", format_report_csv(report));
  for (const auto& s : report.summary) {
    say("{:<14} Z1 {:8.3f} min  Z2 {:9.3f} kg  NoV {:5.2f}  objective {:.4f}  {:.1f}s\n",
               s.method, s.mean_Z1_minutes, s.mean_Z2_kg, s.mean_vehicles, s.mean_objective,
               s.total_wall_seconds);
  }
  say("report: {}\n", (out / "report.csv").string());
  return kOk;
}

// _____________________________________________________________________________
struct RunArgs {
  std::string in, fleet, out;
  PlanArgs plan;
};

int cmd_run(RunArgs a) {
  fs::path out = a.out.empty() ? default_out() : fs::path(a.out);
  PreprocessArgs pre{a.in, a.fleet, (out / "instance").string()};
  if (int c = cmd_preprocess(pre); c != kOk) return c;
  a.plan.instance = pre.out;
  a.plan.fleet.clear();
  a.plan.out = (out / "plan").string();
  int code = cmd_plan(a.plan);
  cmd_export({pre.out, "", a.plan.out, (out / "plan" / "routes.geojson").string()});
  return code;
}

void add_plan_options(CLI::App* cmd, PlanArgs& a) {
  cmd->add_option("--iterations", a.iterations, "PPO iterations after the baseline")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a.seed, "Random seed");
  cmd->add_option("--w1", a.w1, "Makespan weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--w2", a.w2, "Emissions weight")->check(CLI::NonNegativeNumber);
  cmd->add_option("--penalty", a.penalty, "Depot over-use penalty weight")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--selection", a.selection, "Next-task rule")
      ->check(CLI::IsMember({"nearest", "farthest"}));
  cmd->add_option("--depot-mode", a.depot_mode, "Depot vehicle limit handling")
      ->check(CLI::IsMember({"soft", "hard"}));
  cmd->add_flag("--raw-objectives", a.raw_objectives,
                "Sum raw minutes and kilograms instead of baseline-normalized values");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Winter road salting planner"};
  app.require_subcommand(1);
  std::string out_default = default_out().string();

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Largest SCC and chain compression");
  c_pre->add_option("--in", pre.in, "Instance directory (nodes.csv, edges.csv)")->required();
  c_pre->add_option("--fleet", pre.fleet, "fleet.json (default: <in>/fleet.json)");
  c_pre->add_option("--out", pre.out, "Output directory")->required();

  PlanArgs plan;
  plan.out = out_default;
  auto* c_plan = app.add_subcommand("plan", "Baseline plus PPO assignment training");
  c_plan->add_option("--instance", plan.instance, "Preprocessed instance directory")
      ->required();
  c_plan->add_option("--fleet", plan.fleet, "fleet.json (default: <instance>/fleet.json)");
  c_plan->add_option("--out", plan.out, "Artifact directory (env SALTPLAN_OUT)");
  add_plan_options(c_plan, plan);

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Re-check persisted plan artifacts");
  c_eval->add_option("--instance", ev.instance, "Instance directory")->required();
  c_eval->add_option("--fleet", ev.fleet, "fleet.json");
  c_eval->add_option("--plan", ev.plan, "Artifact directory")->required();
  c_eval->add_option("--depot-mode", ev.depot_mode)->check(CLI::IsMember({"soft", "hard"}));

  ExportArgs ex;
  auto* c_geo = app.add_subcommand("export-geojson", "Routes and depots as GeoJSON");
  c_geo->add_option("--instance", ex.instance, "Instance directory")->required();
  c_geo->add_option("--fleet", ex.fleet, "fleet.json");
  c_geo->add_option("--plan", ex.plan, "Artifact directory")->required();
  c_geo->add_option("--out", ex.out, "Output file (default: <plan>/routes.geojson)");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Synthetic instance");
  c_gen->add_option("--seed", gen.config.seed);
  c_gen->add_option("--nodes", gen.config.nodes, "Grid nodes");
  c_gen->add_option("--oneway", gen.config.oneway_fraction);
  c_gen->add_option("--treated", gen.config.treated_fraction);
  c_gen->add_option("--depots", gen.config.depot_count);
  c_gen->add_option("--extent", gen.config.extent);
  c_gen->add_option("--max-vehicles", gen.config.max_vehicles);
  c_gen->add_flag("--preprocess", gen.preprocess, "Write the preprocessed network");
  c_gen->add_option("--out", gen.out, "Output directory")->required();

  OracleArgs orc;
  auto* c_orc = app.add_subcommand("oracle", "Exhaustive check on micro instances");
  c_orc->add_option("--instance", orc.instance, "Single-depot instance (<= 8 required)");
  c_orc->add_option("--fleet", orc.fleet, "fleet.json");
  c_orc->add_option("--seed", orc.seed, "First micro-instance seed");
  c_orc->add_option("--count", orc.count, "Micro instances to generate")
      ->check(CLI::PositiveNumber);

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Baseline vs PPO comparison");
  c_bench->add_option("--count", bench.count)->check(CLI::PositiveNumber);
  c_bench->add_option("--seed", bench.seed);
  c_bench->add_option("--nodes", bench.nodes);
  c_bench->add_option("--iterations", bench.iterations)->check(CLI::NonNegativeNumber);
  c_bench->add_option("--out", bench.out, "Report directory (env SALTPLAN_OUT)");

  RunArgs runa;
  runa.plan.out.clear();
  auto* c_run = app.add_subcommand("run", "preprocess, plan and export in one go");
  c_run->add_option("--in", runa.in, "Raw instance directory")->required();
  c_run->add_option("--fleet", runa.fleet, "fleet.json");
  c_run->add_option("--out", runa.out, "Output directory (env SALTPLAN_OUT)");
  add_plan_options(c_run, runa.plan);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_pre) return cmd_preprocess(pre);
    if (*c_plan) return cmd_plan(plan);
    if (*c_eval) return cmd_evaluate(ev);
    if (*c_geo) return cmd_export(ex);
    if (*c_gen) return cmd_generate(gen);
    if (*c_orc) return cmd_oracle(orc);
    if (*c_bench) return cmd_bench(bench);
    if (*c_run) return cmd_run(runa);
  } catch (const DepotUnreachableError& e) {
    std::cerr << "error: depot " << raw(e.depot()) << ": " << e.what() << "\n";
    return kUnreachable;
  } catch (const UnroutableEdgeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnreachable;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace saltplan::cli
