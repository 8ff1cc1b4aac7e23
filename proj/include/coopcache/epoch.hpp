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

#ifndef COOPCACHE_EPOCH_HPP_
#define COOPCACHE_EPOCH_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "coopcache/model.hpp"
#include "coopcache/oracle.hpp"
#include "coopcache/rounding.hpp"

namespace coopcache {

enum class Policy { kRounding, kLocal, kLowerBound, kOracle };

std::string ToString(Policy policy);
Policy ParsePolicy(const std::string& name);  // throws std::invalid_argument

// Per-cache savings of caching item k: r when k was held before, r - 1 otherwise.
int64_t Savings(const Instance& instance, const EpochState& prev, int cache, int item);

// The s_i items of largest positive savings at `cache`; ties to lower item id.
std::vector<int> LocalItems(const Instance& instance, const EpochState& prev, int cache);

struct LocalResult {
  Solution solution;
  CostReport cost;
};

LocalResult LocalCaching(const Instance& instance, const EpochState& prev);

// sum r - sum over local items of savings.
int64_t LowerBound(const Instance& instance, const EpochState& prev);

struct EpochReport {
  int epoch = 0;
  std::string policy;
  int64_t total_cost = 0;
  int64_t server_requests = 0;
  int64_t placement_cost = 0;
  // Storage relative to the 2 * s_i that DataPlacement provisions, over
  // caches with s_i > 0; upload relative to u_i over caches with u_i > 0.
  double mean_storage_blowup = 0.0;
  double max_storage_blowup = 0.0;
  double mean_upload_blowup = 0.0;
  double max_upload_blowup = 0.0;
  std::vector<int64_t> spare_upload;  // by cache id, [0] unused
  CostReport cost;
};

EpochReport MakeReport(int epoch, Policy policy, const Instance& instance, const Solution& sol,
                       const CostReport& cost);

struct EpochOptions {
  int cluster_k = 0;  // 0 solves the whole instance at once
  PlacementOptions placement{PlacementMode::kPlacement, {}, {}};
  OracleLimits oracle_limits;
};

// One placement per epoch; the state carried forward is the placement made.
std::vector<EpochReport> RunEpochs(const std::vector<Instance>& stream, Policy policy,
                                   const EpochOptions& options = {});

std::string EpochCsvHeader();
std::string ToCsvRow(const EpochReport& report);
void WriteEpochCsv(std::ostream& out, const std::vector<EpochReport>& reports);

}  // namespace coopcache

#endif  // COOPCACHE_EPOCH_HPP_
