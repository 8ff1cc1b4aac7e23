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

// Domain types for cooperative cache placement: caches with tiered
// upload/download pricing, a content server, a sparse demand matrix, and
// integral placement/routing solutions with exact cost accounting.

#ifndef COOPCACHE_MODEL_HPP_
#define COOPCACHE_MODEL_HPP_

#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coopcache {

// Exact non-negative rational, used for per-cache tau = u / s.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  static Rational Of(int64_t num, int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  // floor(this * k) for integer k >= 0.
  int64_t FloorTimes(int64_t k) const;

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);
};

struct CacheSpec {
  int id = 0;          // 1..n
  int64_t s = 0;       // storage, items
  int64_t u = 0;       // free upload, requests
  int64_t d = 0;       // free download, requests
  int64_t alpha = 0;   // price per upload above u
  int64_t beta = 0;    // price per download above d
};

struct ServerSpec {
  int64_t u0 = 0;
  int64_t alpha0 = 0;
};

struct Demand {
  int cache = 0;   // 1..n
  int item = 0;    // 0..m-1
  int64_t count = 0;

  friend auto operator<=>(const Demand&, const Demand&) = default;
};

class InvalidInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Immutable problem instance. Cache ids are 1..n; id 0 denotes the server.
// Items are 0..m-1. Duplicate demand entries are summed and zero counts
// dropped, so demands() is sorted by (cache, item) with positive counts.
class Instance {
 public:
  Instance() = default;
  Instance(ServerSpec server, std::vector<CacheSpec> caches, int m,
           std::vector<Demand> demands);

  int n() const { return static_cast<int>(caches_.size()); }
  int m() const { return m_; }
  const ServerSpec& server() const { return server_; }
  const std::vector<CacheSpec>& caches() const { return caches_; }
  const CacheSpec& cache(int id) const { return caches_.at(id - 1); }
  const std::vector<Demand>& demands() const { return demands_; }

  // r_{ik}; 0 when absent.
  int64_t demand(int cache, int item) const;
  // Demands of one cache, sorted by item.
  std::vector<Demand> demands_of(int cache) const;
  int64_t total_demand() const;
  int64_t total_upload_caps() const;

  // tau_i = u_i / s_i, and 0 when s_i = 0.
  Rational tau(int cache) const;
  Rational tau_max() const;

  // True when alpha0 is strictly below every cache's alpha.
  bool server_is_cheapest() const;

  // Same caches and server, different demand matrix.
  Instance WithDemands(std::vector<Demand> demands) const;
  // Same demands, replaced cache specs.
  Instance WithCaches(std::vector<CacheSpec> caches) const;

 private:
  ServerSpec server_;
  std::vector<CacheSpec> caches_;
  int m_ = 0;
  std::vector<Demand> demands_;
  std::vector<size_t> first_of_cache_;  // index into demands_, size n+2
};

using CacheItem = std::pair<int, int>;  // (cache, item)

struct Route {
  int source = 0;     // 0 = server
  int requester = 0;
  int item = 0;
  friend auto operator<=>(const Route&, const Route&) = default;
};

// Integral placement and routing. y counts copies (<= 1 in single-copy form,
// any non-negative integer in tau form).
struct Solution {
  std::map<CacheItem, int64_t> y;
  std::map<Route, int64_t> x;

  int64_t copies(int cache, int item) const;
  // Sum_k y_{ik}.
  int64_t storage_used(int cache) const;
  // Number of distinct items with y >= 1.
  int64_t distinct_items(int cache) const;
  // Requests served by `cache` to other caches (server when cache == 0).
  int64_t upload(int cache) const;
  int64_t server_requests() const { return upload(0); }

  friend bool operator==(const Solution&, const Solution&) = default;
};

struct Violation {
  enum class Kind {
    kDemandShortfall,  // sum_src x < r
    kDemandExcess,     // sum_src x > r
    kUnbackedRoute,    // x[i,j,k] > 0 with y[i,k] = 0
    kBadIndex,         // cache or item out of range
    kNegative,         // negative entry
  };
  Kind kind;
  int source = -1;
  int requester = -1;
  int item = -1;
  int64_t slack = 0;

  std::string Describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> Validate(const Instance& instance, const Solution& sol);

// Items held by each cache between epochs. held[id] for id in 1..n.
struct EpochState {
  int epoch = 0;
  std::vector<std::set<int>> held;

  static EpochState Empty(int n);
  bool Holds(int cache, int item) const;
  static EpochState FromSolution(const Solution& sol, int n, int epoch);
};

struct CostReport {
  int64_t server_penalty = 0;
  std::vector<int64_t> download_penalties;  // index by cache id, [0] unused
  std::vector<int64_t> upload_overages;     // index by cache id, [0] server
  int64_t simplified_objective = 0;         // sum_jk x_{0jk}
  int64_t placement_cost = 0;               // newly fetched (cache, item) pairs
  std::vector<int64_t> hat_d;               // realized downloads
  std::vector<int64_t> hat_u;               // realized uploads, [0] server
  bool charge_placement = false;

  int64_t download_penalty_total() const;
  int64_t total() const;
};

class InvalidSolution : public std::runtime_error {
 public:
  InvalidSolution(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Tiered cost of a valid solution. placement_cost counts (i,k) with
// y >= 1 and k not held by i in `prev` (all new when prev is null); it is
// added to total() only when charge_placement is set.
CostReport EvaluateCost(const Instance& instance, const Solution& sol,
                        const EpochState* prev = nullptr,
                        bool charge_placement = false);

}  // namespace coopcache

#endif  // COOPCACHE_MODEL_HPP_
