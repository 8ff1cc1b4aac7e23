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

#ifndef COOPCACHE_SCENARIO_HPP_
#define COOPCACHE_SCENARIO_HPP_

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopcache/model.hpp"

namespace coopcache {

struct ScenarioParams {
  int n = 200;
  int m = 50;
  int n_users = 2000;
  double n_pop_items = 10.0;  // mean distinct items drawn per user
  int64_t u_min = 1;
  int64_t u_max = 5;
  Rational tau{1, 3};          // s_i = ceil(u_i / tau)
  int64_t download_cap = 1'000'000;
  int64_t alpha0 = 1;
  int64_t u0 = 0;
  int64_t alpha = 2;
  int64_t beta = 1;
  // MAWS.
  double n_assoc = 2.0;
  int n_shares = 3;
  int n_friends = 5;
  double request_locality = 0.8;  // share of draws from items mapped to associated caches
  double friend_locality = 0.7;   // share of friends picked among co-associated users
  int region_size = 10;           // caches per locality region
  int items_per_region = 8;       // items mapped to each region
  double churn = 0.05;
  uint64_t seed = 1;
};

// (user, cache) association with an event count, from a trace.
struct Association {
  int64_t user = 0;
  int64_t cache = 0;
  int64_t count = 0;
  friend auto operator<=>(const Association&, const Association&) = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(int line, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

Instance GenSans(const ScenarioParams& params);
Instance GenMaws(const ScenarioParams& params);
// MAWS with user-cache associations taken from a trace; n is the number of
// distinct trace caches (renumbered in increasing id order).
Instance GenMawsFromTrace(const ScenarioParams& params, const std::vector<Association>& trace);

enum class Workload { kSans, kMaws, kTrace };

struct Generator {
  Workload workload = Workload::kSans;
  ScenarioParams params;
  std::vector<Association> trace;

  Instance Generate(uint64_t seed) const;
};

// Replaces the demand of floor(churn * m) items (at least 1 when m >= 20)
// with fresh draws from the generator.
Instance EvolveDemands(const Instance& instance, const Generator& generator, uint64_t seed,
                       std::vector<int>* replaced = nullptr);

// `epochs` instances: a fresh draw followed by churned successors, or the
// same instance repeated when `churn` is false.
std::vector<Instance> DemandStream(const Generator& generator, uint64_t seed, int epochs,
                                   bool churn = true);

std::vector<Association> IngestTrace(std::istream& in);
std::vector<Association> IngestTraceFile(const std::string& path);

struct PartitionSpec {
  std::vector<int64_t> weights;
  int t = 0;
};

// Three caches and a server whose zero-cost solutions are exactly the
// size-t equal-sum splits of the weights.
Instance PartitionInstance(const PartitionSpec& spec);

// Brute force: is there a size-t subset with half the total weight?
bool HasEqualPartition(const PartitionSpec& spec);

// Mean pairwise Jaccard similarity of per-cache request sets.
double MeanPairwiseJaccard(const Instance& instance);

}  // namespace coopcache

#endif  // COOPCACHE_SCENARIO_HPP_
