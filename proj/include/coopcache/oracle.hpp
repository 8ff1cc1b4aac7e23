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

#ifndef COOPCACHE_ORACLE_HPP_
#define COOPCACHE_ORACLE_HPP_

#include <cstdint>
#include <stdexcept>

#include "coopcache/model.hpp"

namespace coopcache {

struct OracleLimits {
  int max_caches = 4;
  int max_items = 4;
  int64_t max_total_demand = 16;
  int64_t max_search_nodes = 5'000'000;
};

class OracleLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OracleMode { kServing, kPlacement };

struct OracleResult {
  // Minimizer of the tiered cost (plus placement cost in kPlacement mode).
  Solution solution;
  CostReport cost;
  int64_t total = 0;
  // Minimizer of server requests (plus placements in kPlacement mode) with
  // hard upload caps on the caches.
  Solution simplified_solution;
  int64_t simplified_value = 0;
  int64_t placements_checked = 0;
};

// Exhaustive search over single-copy placements.
OracleResult ExactOpt(const Instance& instance, OracleMode mode, const EpochState* prev = nullptr,
                      const OracleLimits& limits = {});

struct TauOracleResult {
  Solution solution;  // tau form, integral copies
  int64_t server_requests = 0;
};

// Integral optimum of the tau-constrained program: integer copies, each copy
// of item k at cache i serves at most tau_i external requests in total.
TauOracleResult ExactTauOpt(const Instance& instance, const OracleLimits& limits = {});

}  // namespace coopcache

#endif  // COOPCACHE_ORACLE_HPP_
