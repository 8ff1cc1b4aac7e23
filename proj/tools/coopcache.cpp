// Copyright 2026 The coopcache Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// coopcache: generate instances, run placement policies over epochs, sweep
// cluster sizes and check the rounding bounds on random tiny instances.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coopcache/cluster.hpp"
#include "coopcache/epoch.hpp"
#include "coopcache/instance_io.hpp"
#include "coopcache/oracle.hpp"
#include "coopcache/rounding.hpp"
#include "coopcache/scenario.hpp"
#include "coopcache/verify.hpp"

namespace cc = coopcache;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kViolation = 2, kSolverError = 3, kIoError = 4 };

struct ScenarioFlags {
  std::string scenario = "maws";
  int n = 200;
  int m = 50;
  int users = 2000;
  std::string tau = "1/3";
  uint64_t seed = 1;
  std::string trace_path;
  std::vector<int64_t> weights;
  int t = 0;
  double churn = 0.05;
};

void AddScenarioFlags(CLI::App* cmd, ScenarioFlags& f) {
  cmd->add_option("--scenario", f.scenario, "workload")
      ->check(CLI::IsMember({"sans", "maws", "trace", "partition"}))
      ->capture_default_str();
  cmd->add_option("--n", f.n, "caches")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--m", f.m, "items")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--users", f.users, "users")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_option("--tau", f.tau, "storage sizing ratio, s = ceil(u / tau); p/q or decimal")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
  cmd->add_option("--trace", f.trace_path, "association trace CSV (trace scenario)");
  cmd->add_option("--weights", f.weights, "partition weights")->delimiter(',');
  cmd->add_option("--t", f.t, "partition subset size");
  cmd->add_option("--churn", f.churn, "share of items re-drawn per epoch")->capture_default_str();
}

cc::Rational ParseTau(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    return cc::Rational::Of(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  }
  // Decimal: scale by a power of ten until integral.
  const auto dot = text.find('.');
  if (dot == std::string::npos) return cc::Rational::Of(std::stoll(text), 1);
  const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  int64_t den = 1;
  for (size_t i = dot + 1; i < text.size(); ++i) den *= 10;
  return cc::Rational::Of(std::stoll(digits), den);
}

cc::Generator MakeGenerator(const ScenarioFlags& f) {
  cc::Generator gen;
  gen.params.n = f.n;
  gen.params.m = f.m;
  gen.params.n_users = f.users;
  gen.params.tau = ParseTau(f.tau);
  gen.params.churn = f.churn;
  gen.params.seed = f.seed;
  if (f.scenario == "sans") {
    gen.workload = cc::Workload::kSans;
  } else if (f.scenario == "maws") {
    gen.workload = cc::Workload::kMaws;
  } else {
    gen.workload = cc::Workload::kTrace;
    if (f.trace_path.empty()) throw CLI::ValidationError("--trace", "required for the trace scenario");
    gen.trace = cc::IngestTraceFile(f.trace_path);
  }
  return gen;
}

bool IsPartition(const ScenarioFlags& f) { return f.scenario == "partition"; }

cc::PartitionSpec MakePartition(const ScenarioFlags& f) {
  if (f.weights.empty()) throw CLI::ValidationError("--weights", "required for the partition scenario");
  return cc::PartitionSpec{f.weights, f.t};
}

json ScenarioJson(const ScenarioFlags& f) {
  json j{{"scenario", f.scenario}, {"seed", f.seed}};
  if (IsPartition(f)) {
    j["weights"] = f.weights;
    j["t"] = f.t;
    return j;
  }
  j["n"] = f.n;
  j["m"] = f.m;
  j["users"] = f.users;
  j["tau"] = f.tau;
  j["churn"] = f.churn;
  if (!f.trace_path.empty()) j["trace"] = f.trace_path;
  return j;
}

cc::Instance BuildInstance(const ScenarioFlags& f) {
  if (IsPartition(f)) return cc::PartitionInstance(MakePartition(f));
  return MakeGenerator(f).Generate(f.seed);
}

// Writes to `path`, or stdout for "" and "-".
template <typename Fn>
void WithOutput(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  fn(out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

void PrintSummary(std::ostream& os, const cc::Instance& inst) {
  int64_t storage = 0, upload = 0, active = 0;
  for (const cc::CacheSpec& c : inst.caches()) {
    storage += c.s;
    upload += c.u;
  }
  for (int i = 1; i <= inst.n(); ++i) active += inst.demands_of(i).empty() ? 0 : 1;
  os << "caches " << inst.n() << " (" << active << " with demand), items " << inst.m()
     << ", demand entries " << inst.demands().size() << ", total requests " << inst.total_demand()
     << ", storage " << storage << ", upload " << upload << ", tau_max " << inst.tau_max().value()
     << "\n";
  if (inst.n() >= 2) os << "mean pairwise jaccard " << cc::MeanPairwiseJaccard(inst) << "\n";
}

void PrintCost(std::ostream& os, const std::string& label, const cc::CostReport& cost) {
  os << label << ": total " << cost.total() << ", server requests " << cost.simplified_objective
     << ", server penalty " << cost.server_penalty << ", download penalty "
     << cost.download_penalty_total() << ", placements " << cost.placement_cost
     << (cost.charge_placement ? " (charged)" : "") << "\n";
}

// generate ------------------------------------------------------------------

struct GenerateCmd {
  ScenarioFlags scenario;
  std::string out;

  int Run() const {
    const cc::Instance inst = BuildInstance(scenario);
    json doc = cc::InstanceToJson(inst);
    WithOutput(out, [&](std::ostream& os) { os << doc.dump(2) << "\n"; });
    std::ostream& log = (out.empty() || out == "-") ? std::cerr : std::cout;
    log << "config " << ScenarioJson(scenario).dump() << "\n";
    PrintSummary(log, inst);
    return kOk;
  }
};

// solve ---------------------------------------------------------------------

struct SolveCmd {
  ScenarioFlags scenario;
  std::string instance_path;
  std::string mode = "serving";
  int k = 0;
  bool oracle = false;
  std::string out;
  std::string trace_out;

  int Run() const {
    const cc::Instance inst =
        instance_path.empty() ? BuildInstance(scenario) : cc::ReadInstanceFile(instance_path);
    json config{{"command", "solve"}, {"mode", mode}, {"k", k}, {"oracle", oracle}};
    if (instance_path.empty()) {
      config["scenario"] = ScenarioJson(scenario);
    } else {
      config["instance"] = instance_path;
    }
    std::cout << "config " << config.dump() << "\n";
    PrintSummary(std::cout, inst);

    cc::PlacementOptions options;
    options.mode = mode == "placement" ? cc::PlacementMode::kPlacement : cc::PlacementMode::kServing;
    const cc::PlacementResult result = k > 0 ? cc::SolveClustered(inst, k, nullptr, options)
                                             : cc::DataPlacement(inst, nullptr, options);
    std::cout << "fractional objective " << result.fractional_objective << ", rounded objective "
              << result.rounded_objective << "\n";
    PrintCost(std::cout, "rounding", result.cost);
    const cc::LocalResult local = cc::LocalCaching(inst, cc::EpochState::Empty(inst.n()));
    PrintCost(std::cout, "local", local.cost);
    std::cout << "lower bound " << cc::LowerBound(inst, cc::EpochState::Empty(inst.n())) << "\n";
    if (oracle) {
      const cc::OracleMode om =
          mode == "placement" ? cc::OracleMode::kPlacement : cc::OracleMode::kServing;
      const cc::OracleResult opt = cc::ExactOpt(inst, om);
      PrintCost(std::cout, "oracle", opt.cost);
      std::cout << "oracle simplified optimum " << opt.simplified_value << " over "
                << opt.placements_checked << " placements\n";
    }
    if (!out.empty()) {
      WithOutput(out, [&](std::ostream& os) { os << cc::SolutionToJson(result.solution).dump(2) << "\n"; });
    }
    if (!trace_out.empty()) {
      WithOutput(trace_out, [&](std::ostream& os) { os << result.trace.Dump(); });
    }
    return kOk;
  }
};

// simulate ------------------------------------------------------------------

struct SimulateCmd {
  ScenarioFlags scenario;
  int epochs = 3;
  int k = 0;
  bool static_demand = false;
  std::vector<std::string> policies;
  std::string out;

  int Run() const {
    std::vector<std::string> names = policies;
    if (names.empty()) names = {"rounding", "local", "lowerbound"};
    std::vector<cc::Policy> parsed;
    for (const std::string& name : names) parsed.push_back(cc::ParsePolicy(name));

    std::vector<cc::Instance> stream;
    if (IsPartition(scenario)) {
      stream.assign(static_cast<size_t>(std::max(epochs, 0)), BuildInstance(scenario));
    } else {
      stream = cc::DemandStream(MakeGenerator(scenario), scenario.seed, epochs, !static_demand);
    }
    cc::EpochOptions options;
    options.cluster_k = k;

    json config{{"command", "simulate"}, {"scenario", ScenarioJson(scenario)}, {"epochs", epochs},
                {"k", k}, {"static", static_demand}, {"policies", names}};
    std::vector<cc::EpochReport> reports;
    for (cc::Policy p : parsed) {
      std::vector<cc::EpochReport> part = cc::RunEpochs(stream, p, options);
      reports.insert(reports.end(), part.begin(), part.end());
    }
    WithOutput(out, [&](std::ostream& os) {
      os << "# " << config.dump() << "\n";
      cc::WriteEpochCsv(os, reports);
    });
    return kOk;
  }
};

// cluster-sweep -------------------------------------------------------------

struct SweepCmd {
  ScenarioFlags scenario;
  std::vector<int> ks{10, 25, 50, 100, 200};
  int seeds = 1;
  std::string mode = "placement";
  std::string out;
  std::string clusters_dir;

  int Run() const {
    if (IsPartition(scenario)) throw CLI::ValidationError("--scenario", "partition cannot be swept");
    const cc::Generator gen = MakeGenerator(scenario);
    cc::PlacementOptions options;
    options.mode = mode == "serving" ? cc::PlacementMode::kServing : cc::PlacementMode::kPlacement;
    json config{{"command", "cluster-sweep"}, {"scenario", ScenarioJson(scenario)}, {"k", ks},
                {"seeds", seeds}, {"mode", mode}};

    std::ostringstream csv;
    csv << "# " << config.dump() << "\n";
    csv << "seed,k,clusters,total_cost,server_requests,placement_cost,normalized_cost\n";
    for (int s = 0; s < seeds; ++s) {
      const uint64_t seed = scenario.seed + static_cast<uint64_t>(s);
      const cc::Instance inst = gen.Generate(seed);
      struct Row {
        int k;
        size_t clusters;
        cc::CostReport cost;
      };
      std::vector<Row> rows;
      for (int k : ks) {
        const cc::ClusterSet clusters = cc::Cluster(inst, k);
        if (!clusters_dir.empty()) {
          WithOutput(clusters_dir + "/clusters_seed" + std::to_string(seed) + "_k" + std::to_string(k) + ".csv",
                     [&](std::ostream& os) { cc::WriteClusterCsv(os, clusters); });
        }
        const cc::PlacementResult result = cc::SolveClustered(inst, clusters, nullptr, options);
        rows.push_back({k, clusters.size(), result.cost});
      }
      // Normalized by the cost at the largest k of the sweep.
      size_t ref = 0;
      for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].k > rows[ref].k) ref = i;
      }
      const double denom = static_cast<double>(rows[ref].cost.total());
      for (const Row& row : rows) {
        char norm[32];
        std::snprintf(norm, sizeof(norm), "%.6f",
                      denom > 0 ? static_cast<double>(row.cost.total()) / denom : 1.0);
        csv << seed << ',' << row.k << ',' << row.clusters << ',' << row.cost.total() << ','
            << row.cost.simplified_objective << ',' << row.cost.placement_cost << ',' << norm << "\n";
      }
    }
    WithOutput(out, [&](std::ostream& os) { os << csv.str(); });
    return kOk;
  }
};

// verify --------------------------------------------------------------------

struct VerifyCmd {
  int instances = 200;
  uint64_t seed = 1;
  bool oracle = false;
  bool inject_fault = false;

  int Run() const {
    std::cout << "verify seed " << seed << ", instances " << instances
              << (inject_fault ? ", fault injected" : "") << "\n";
    const cc::VerifyReport report = cc::RunBoundSuite(instances, seed, inject_fault);
    std::cout << "worst rounded/fractional: serving " << report.worst_serving_ratio
              << ", placement " << report.worst_placement_ratio << "\n";
    std::cout << "worst storage/s " << report.worst_storage_factor << ", worst upload/u "
              << report.worst_upload_factor << "\n";
    if (oracle) ReportOracleRatios();
    for (const cc::BoundViolation& v : report.violations) {
      std::cout << "VIOLATION seed " << v.seed << ": " << v.what << "\n";
    }
    std::cout << (report.violations.empty() ? "PASS" : "FAIL") << " " << report.violations.size()
              << " violations\n";
    return report.violations.empty() ? kOk : kViolation;
  }

  // Rounded cost against the exact optimum; logged only, since the
  // guarantee is stated against the fractional value.
  void ReportOracleRatios() const {
    std::mt19937_64 seeder(seed);
    double worst[2] = {0.0, 0.0};
    int over[2] = {0, 0};
    for (int t = 0; t < instances; ++t) {
      const cc::Instance inst = cc::RandomTinyInstance(seeder());
      for (int mode = 0; mode < 2; ++mode) {
        cc::PlacementOptions options;
        options.mode = mode == 0 ? cc::PlacementMode::kServing : cc::PlacementMode::kPlacement;
        const cc::PlacementResult result = cc::DataPlacement(inst, nullptr, options);
        const cc::OracleResult opt = cc::ExactOpt(
            inst, mode == 0 ? cc::OracleMode::kServing : cc::OracleMode::kPlacement);
        const double rounded = result.rounded_objective;
        const double best = static_cast<double>(opt.simplified_value);
        const double factor = mode == 0 ? 8.0 : 16.0;
        if (rounded > factor * best + 1e-9) ++over[mode];
        if (best > 0) worst[mode] = std::max(worst[mode], rounded / best);
      }
    }
    std::cout << "oracle: worst rounded/optimum serving " << worst[0] << " (" << over[0]
              << " above 8x), placement " << worst[1] << " (" << over[1] << " above 16x)\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative cache placement experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI or TOML file");

  GenerateCmd gen;
  CLI::App* g = app.add_subcommand("generate", "write an instance as JSON");
  AddScenarioFlags(g, gen.scenario);
  g->add_option("--out", gen.out, "instance path (stdout when omitted)");

  SolveCmd solve;
  CLI::App* s = app.add_subcommand("solve", "place and route one instance");
  AddScenarioFlags(s, solve.scenario);
  s->add_option("--instance", solve.instance_path, "instance JSON; overrides the scenario flags");
  s->add_option("--mode", solve.mode, "objective")
      ->check(CLI::IsMember({"serving", "placement"}))
      ->capture_default_str();
  s->add_option("--k", solve.k, "cluster size, 0 for none")->capture_default_str();
  s->add_flag("--oracle", solve.oracle, "also solve exactly (tiny instances only)");
  s->add_option("--out", solve.out, "solution JSON path");
  s->add_option("--trace-out", solve.trace_out, "rounding trace path");

  SimulateCmd sim;
  CLI::App* m = app.add_subcommand("simulate", "run policies over epochs, CSV out");
  AddScenarioFlags(m, sim.scenario);
  m->add_option("--epochs", sim.epochs, "epochs")->check(CLI::PositiveNumber)->capture_default_str();
  m->add_option("--k", sim.k, "cluster size, 0 for none")->capture_default_str();
  m->add_option("--policy", sim.policies, "rounding | local | lowerbound | oracle (repeatable)")
      ->check(CLI::IsMember({"rounding", "local", "lowerbound", "oracle"}));
  m->add_flag("--static", sim.static_demand, "repeat the first epoch's demand");
  m->add_option("--out", sim.out, "CSV path (stdout when omitted)");

  SweepCmd sweep;
  CLI::App* w = app.add_subcommand("cluster-sweep", "cost against cluster size, CSV out");
  AddScenarioFlags(w, sweep.scenario);
  w->add_option("--k", sweep.ks, "cluster sizes (repeatable)")->capture_default_str();
  w->add_option("--seeds", sweep.seeds, "consecutive seeds from --seed")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  w->add_option("--mode", sweep.mode, "objective")
      ->check(CLI::IsMember({"serving", "placement"}))
      ->capture_default_str();
  w->add_option("--out", sweep.out, "CSV path (stdout when omitted)");
  w->add_option("--clusters-out", sweep.clusters_dir, "directory for cache_id,cluster_id dumps");

  VerifyCmd verify;
  CLI::App* v = app.add_subcommand("verify", "check the rounding bounds on random tiny instances");
  v->add_option("--instances", verify.instances, "instances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  v->add_option("--seed", verify.seed, "random seed")->capture_default_str();
  v->add_flag("--oracle", verify.oracle, "also log rounded cost against the exact optimum");
  v->add_flag("--inject-fault", verify.inject_fault, "corrupt every rounded solution")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (g->parsed()) return gen.Run();
    if (s->parsed()) return solve.Run();
    if (m->parsed()) return sim.Run();
    if (w->parsed()) return sweep.Run();
    if (v->parsed()) return verify.Run();
  } catch (const CLI::Error& e) {
    app.exit(e);
    return kUsage;
  } catch (const cc::OracleLimitExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverError;
  } catch (const cc::TraceParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const cc::InvalidInstance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverError;
  }
  return kUsage;
}
