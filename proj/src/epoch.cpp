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

#include "coopcache/epoch.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "coopcache/cluster.hpp"

namespace coopcache {

std::string ToString(Policy policy) {
  switch (policy) {
    case Policy::kRounding: return "rounding";
    case Policy::kLocal: return "local";
    case Policy::kLowerBound: return "lowerbound";
    case Policy::kOracle: return "oracle";
  }
  return "unknown";
}

Policy ParsePolicy(const std::string& name) {
  for (Policy p : {Policy::kRounding, Policy::kLocal, Policy::kLowerBound, Policy::kOracle}) {
    if (ToString(p) == name) return p;
  }
  throw std::invalid_argument("unknown policy '" + name + "'");
}

int64_t Savings(const Instance& instance, const EpochState& prev, int cache, int item) {
  const int64_t r = instance.demand(cache, item);
  return prev.Holds(cache, item) ? r : r - 1;
}

std::vector<int> LocalItems(const Instance& instance, const EpochState& prev, int cache) {
  std::vector<std::pair<int64_t, int>> ranked;
  for (const Demand& d : instance.demands_of(cache)) {
    const int64_t f = Savings(instance, prev, cache, d.item);
    if (f > 0) ranked.push_back({-f, d.item});
  }
  std::sort(ranked.begin(), ranked.end());
  const size_t keep = std::min<size_t>(ranked.size(), static_cast<size_t>(instance.cache(cache).s));
  std::vector<int> items;
  for (size_t t = 0; t < keep; ++t) items.push_back(ranked[t].second);
  std::sort(items.begin(), items.end());
  return items;
}

LocalResult LocalCaching(const Instance& instance, const EpochState& prev) {
  LocalResult result;
  for (const CacheSpec& c : instance.caches()) {
    for (int k : LocalItems(instance, prev, c.id)) result.solution.y[{c.id, k}] = 1;
  }
  for (const Demand& d : instance.demands()) {
    const int source = result.solution.y.count({d.cache, d.item}) ? d.cache : 0;
    result.solution.x[Route{source, d.cache, d.item}] = d.count;
  }
  result.cost = EvaluateCost(instance, result.solution, &prev, true);
  return result;
}

int64_t LowerBound(const Instance& instance, const EpochState& prev) {
  int64_t bound = instance.total_demand();
  for (const CacheSpec& c : instance.caches()) {
    for (int k : LocalItems(instance, prev, c.id)) bound -= Savings(instance, prev, c.id, k);
  }
  return bound;
}

EpochReport MakeReport(int epoch, Policy policy, const Instance& instance, const Solution& sol,
                       const CostReport& cost) {
  EpochReport report;
  report.epoch = epoch;
  report.policy = ToString(policy);
  report.total_cost = cost.total();
  report.server_requests = cost.simplified_objective;
  report.placement_cost = cost.placement_cost;
  report.cost = cost;
  report.spare_upload.assign(instance.n() + 1, 0);
  int storage_count = 0, upload_count = 0;
  for (const CacheSpec& c : instance.caches()) {
    const int64_t up = cost.hat_u[c.id];
    report.spare_upload[c.id] = std::max<int64_t>(0, c.u - up);
    if (c.s > 0) {
      const double b = static_cast<double>(sol.distinct_items(c.id)) / (2.0 * static_cast<double>(c.s));
      report.mean_storage_blowup += b;
      report.max_storage_blowup = std::max(report.max_storage_blowup, b);
      ++storage_count;
    }
    if (c.u > 0) {
      const double b = static_cast<double>(up) / static_cast<double>(c.u);
      report.mean_upload_blowup += b;
      report.max_upload_blowup = std::max(report.max_upload_blowup, b);
      ++upload_count;
    }
  }
  if (storage_count > 0) report.mean_storage_blowup /= storage_count;
  if (upload_count > 0) report.mean_upload_blowup /= upload_count;
  return report;
}

std::vector<EpochReport> RunEpochs(const std::vector<Instance>& stream, Policy policy,
                                   const EpochOptions& options) {
  std::vector<EpochReport> reports;
  if (stream.empty()) return reports;
  EpochState state = EpochState::Empty(stream.front().n());
  for (size_t t = 0; t < stream.size(); ++t) {
    const Instance& instance = stream[t];
    const int epoch = static_cast<int>(t) + 1;
    // The first epoch starts from empty caches; every placement is charged.
    const EpochState* prev = &state;
    Solution sol;
    CostReport cost;
    switch (policy) {
      case Policy::kRounding: {
        PlacementResult result = options.cluster_k > 0
                                     ? SolveClustered(instance, options.cluster_k, prev, options.placement)
                                     : DataPlacement(instance, prev, options.placement);
        sol = std::move(result.solution);
        cost = result.cost;
        break;
      }
      case Policy::kLocal:
      case Policy::kLowerBound: {
        LocalResult result = LocalCaching(instance, state);
        sol = std::move(result.solution);
        cost = result.cost;
        break;
      }
      case Policy::kOracle: {
        OracleResult result = ExactOpt(instance, OracleMode::kPlacement, prev, options.oracle_limits);
        sol = std::move(result.solution);
        cost = result.cost;
        break;
      }
    }
    EpochReport report = MakeReport(epoch, policy, instance, sol, cost);
    if (policy == Policy::kLowerBound) report.total_cost = LowerBound(instance, state);
    reports.push_back(std::move(report));
    state = EpochState::FromSolution(sol, instance.n(), epoch);
  }
  return reports;
}

std::string EpochCsvHeader() {
  return "epoch,policy,total_cost,server_requests,placement_cost,mean_storage_blowup,"
         "max_storage_blowup,mean_upload_blowup,max_upload_blowup";
}

std::string ToCsvRow(const EpochReport& r) {
  std::ostringstream out;
  out << r.epoch << ',' << r.policy << ',' << r.total_cost << ',' << r.server_requests << ','
      << r.placement_cost << std::fixed << std::setprecision(6) << ',' << r.mean_storage_blowup
      << ',' << r.max_storage_blowup << ',' << r.mean_upload_blowup << ',' << r.max_upload_blowup;
  return out.str();
}

void WriteEpochCsv(std::ostream& out, const std::vector<EpochReport>& reports) {
  out << EpochCsvHeader() << '\n';
  for (const EpochReport& r : reports) out << ToCsvRow(r) << '\n';
}

}  // namespace coopcache
