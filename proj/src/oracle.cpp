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

#include "coopcache/oracle.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <vector>

namespace coopcache {

namespace {

constexpr int64_t kUnbounded = std::numeric_limits<int64_t>::max() / 4;

class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : adj_(nodes) {}

  int AddArc(int from, int to, int64_t cap) {
    adj_[from].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({to, cap});
    adj_[to].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({from, 0});
    return static_cast<int>(arcs_.size()) - 2;
  }

  int64_t Run(int s, int t) {
    int64_t total = 0;
    while (true) {
      std::vector<int> via(adj_.size(), -1);
      std::queue<int> bfs;
      bfs.push(s);
      via[s] = -2;
      while (!bfs.empty() && via[t] == -1) {
        const int u = bfs.front();
        bfs.pop();
        for (int a : adj_[u]) {
          if (arcs_[a].cap > 0 && via[arcs_[a].to] == -1) {
            via[arcs_[a].to] = a;
            bfs.push(arcs_[a].to);
          }
        }
      }
      if (via[t] == -1) return total;
      int64_t push = kUnbounded;
      for (int v = t; v != s; v = arcs_[via[v] ^ 1].to) push = std::min(push, arcs_[via[v]].cap);
      for (int v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].cap -= push;
        arcs_[via[v] ^ 1].cap += push;
      }
      total += push;
    }
  }

  int64_t flow(int arc) const { return arcs_[arc ^ 1].cap; }

 private:
  struct Arc {
    int to;
    int64_t cap;
  };
  std::vector<std::vector<int>> adj_;
  std::vector<Arc> arcs_;
};

// Serves every demand not covered by a local copy, maximizing cache-served
// requests under per-source caps; the server takes the rest.
// cap(i, k) < 0 means "no per-item cap", only the per-cache cap applies.
struct Routing {
  std::map<Route, int64_t> x;
  int64_t server = 0;
};

Routing RouteDemands(const Instance& instance, const std::vector<Demand>& demands,
                     const std::function<int64_t(int, int)>& copies,
                     const std::function<int64_t(int, int)>& item_cap, bool cache_caps) {
  const int n = instance.n();
  Routing routing;
  std::vector<const Demand*> remote;
  for (const Demand& d : demands) {
    if (copies(d.cache, d.item) >= 1) {
      routing.x[Route{d.cache, d.cache, d.item}] = d.count;
    } else {
      remote.push_back(&d);
    }
  }
  if (remote.empty()) return routing;
  // Nodes: 0 source, 1..n caches, then (cache, item) supply nodes, demand
  // nodes, sink.
  std::map<CacheItem, int> supply;
  int next = n + 1;
  for (const Demand* d : remote) {
    for (int i = 1; i <= n; ++i) {
      if (i != d->cache && copies(i, d->item) >= 1 && !supply.count({i, d->item})) {
        supply[{i, d->item}] = next++;
      }
    }
  }
  const int first_demand = next;
  const int sink = first_demand + static_cast<int>(remote.size());
  MaxFlow flow(sink + 1);
  for (int i = 1; i <= n; ++i) flow.AddArc(0, i, cache_caps ? instance.cache(i).u : kUnbounded);
  for (const auto& [key, node] : supply) {
    const int64_t cap = item_cap(key.first, key.second);
    flow.AddArc(key.first, node, cap < 0 ? kUnbounded : cap);
  }
  std::vector<std::vector<std::pair<int, int>>> arcs_of(remote.size());  // (source cache, arc)
  for (size_t t = 0; t < remote.size(); ++t) {
    const Demand& d = *remote[t];
    for (int i = 1; i <= n; ++i) {
      auto it = supply.find({i, d.item});
      if (i == d.cache || it == supply.end()) continue;
      arcs_of[t].push_back({i, flow.AddArc(it->second, first_demand + static_cast<int>(t), kUnbounded)});
    }
    flow.AddArc(first_demand + static_cast<int>(t), sink, d.count);
  }
  flow.Run(0, sink);
  for (size_t t = 0; t < remote.size(); ++t) {
    const Demand& d = *remote[t];
    int64_t served = 0;
    for (const auto& [i, arc] : arcs_of[t]) {
      const int64_t f = flow.flow(arc);
      if (f > 0) routing.x[Route{i, d.cache, d.item}] = f;
      served += f;
    }
    if (d.count > served) {
      routing.x[Route{0, d.cache, d.item}] = d.count - served;
      routing.server += d.count - served;
    }
  }
  return routing;
}

std::vector<int> DemandedItems(const Instance& instance) {
  std::vector<int> items;
  for (const Demand& d : instance.demands()) items.push_back(d.item);
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

void CheckLimits(const Instance& instance, const OracleLimits& limits) {
  if (instance.n() > limits.max_caches) {
    throw OracleLimitExceeded("oracle limit: " + std::to_string(instance.n()) + " caches > " +
                              std::to_string(limits.max_caches));
  }
  if (instance.m() > limits.max_items) {
    throw OracleLimitExceeded("oracle limit: " + std::to_string(instance.m()) + " items > " +
                              std::to_string(limits.max_items));
  }
  if (instance.total_demand() > limits.max_total_demand) {
    throw OracleLimitExceeded("oracle limit: total demand " +
                              std::to_string(instance.total_demand()) + " > " +
                              std::to_string(limits.max_total_demand));
  }
}

}  // namespace

OracleResult ExactOpt(const Instance& instance, OracleMode mode, const EpochState* prev,
                      const OracleLimits& limits) {
  CheckLimits(instance, limits);
  const int n = instance.n();
  const std::vector<int> items = DemandedItems(instance);
  const int width = static_cast<int>(items.size());

  const bool charge = mode == OracleMode::kPlacement;
  // Per cache, the item subsets that fit its storage. Without placement
  // charges a superset never costs more, so only full subsets are tried.
  std::vector<std::vector<uint32_t>> choices(n + 1);
  int64_t combos = 1;
  for (int i = 1; i <= n; ++i) {
    const int64_t full = std::min<int64_t>(instance.cache(i).s, width);
    for (uint32_t mask = 0; mask < (1u << width); ++mask) {
      const int64_t size = std::popcount(mask);
      if (charge ? size <= full : size == full) choices[i].push_back(mask);
    }
    combos *= static_cast<int64_t>(choices[i].size());
    if (combos > limits.max_search_nodes) {
      throw OracleLimitExceeded("oracle limit: more than " +
                                std::to_string(limits.max_search_nodes) + " placements");
    }
  }

  std::vector<uint32_t> mask(n + 1, 0);
  auto held = [&](int i, int k) -> int64_t {
    const auto it = std::lower_bound(items.begin(), items.end(), k);
    if (it == items.end() || *it != k) return 0;
    return (mask[i] >> (it - items.begin())) & 1u;
  };
  auto no_item_cap = [](int, int) -> int64_t { return -1; };

  OracleResult best;
  best.total = kUnbounded;
  best.simplified_value = kUnbounded;
  std::function<void(int)> visit = [&](int i) {
    if (i <= n) {
      for (uint32_t choice : choices[i]) {
        mask[i] = choice;
        visit(i + 1);
      }
      return;
    }
    ++best.placements_checked;
    Solution sol;
    int64_t placements = 0;
    for (int c = 1; c <= n; ++c) {
      for (int t = 0; t < width; ++t) {
        if (!((mask[c] >> t) & 1u)) continue;
        sol.y[{c, items[t]}] = 1;
        if (prev == nullptr || !prev->Holds(c, items[t])) ++placements;
      }
    }
    Routing routing = RouteDemands(instance, instance.demands(), held, no_item_cap, true);
    sol.x = std::move(routing.x);
    const int64_t simplified = routing.server + (charge ? placements : 0);
    CostReport report = EvaluateCost(instance, sol, prev, charge);
    if (report.total() < best.total) {
      best.total = report.total();
      best.cost = report;
      best.solution = sol;
    }
    if (simplified < best.simplified_value) {
      best.simplified_value = simplified;
      best.simplified_solution = sol;
    }
  };
  visit(1);
  return best;
}

TauOracleResult ExactTauOpt(const Instance& instance, const OracleLimits& limits) {
  CheckLimits(instance, limits);
  const int n = instance.n();
  const std::vector<int> items = DemandedItems(instance);

  // Storage states are mixed-radix numbers over (s_i + 1).
  std::vector<int64_t> radix(n + 1, 1), stride(n + 2, 1);
  for (int i = 1; i <= n; ++i) {
    radix[i] = instance.cache(i).s + 1;
    stride[i + 1] = stride[i] * radix[i];
    if (stride[i + 1] > limits.max_search_nodes) {
      throw OracleLimitExceeded("oracle limit: storage state space too large");
    }
  }
  const int64_t states = stride[n + 1];
  auto digit = [&](int64_t state, int i) { return (state / stride[i]) % radix[i]; };

  // best[state] = min server requests over items so far with `state` slots used.
  std::vector<int64_t> best(states, kUnbounded);
  std::vector<std::vector<int64_t>> choice(items.size(), std::vector<int64_t>(states, -1));
  std::vector<std::vector<int64_t>> from(items.size(), std::vector<int64_t>(states, -1));
  best[0] = 0;
  int64_t work = 0;
  for (size_t t = 0; t < items.size(); ++t) {
    const int k = items[t];
    std::vector<Demand> ds;
    for (const Demand& d : instance.demands()) {
      if (d.item == k) ds.push_back(d);
    }
    // Server requests for every copy vector of this item.
    std::vector<int64_t> cost(states);
    for (int64_t vec = 0; vec < states; ++vec) {
      auto copies = [&](int i, int item) -> int64_t { return item == k ? digit(vec, i) : 0; };
      auto cap = [&](int i, int) -> int64_t { return instance.tau(i).FloorTimes(digit(vec, i)); };
      cost[vec] = RouteDemands(instance, ds, copies, cap, false).server;
    }
    std::vector<int64_t> next(states, kUnbounded);
    for (int64_t used = 0; used < states; ++used) {
      if (best[used] == kUnbounded) continue;
      for (int64_t vec = 0; vec < states; ++vec) {
        if (++work > limits.max_search_nodes * 8) {
          throw OracleLimitExceeded("oracle limit: tau search budget exhausted");
        }
        bool fits = true;
        for (int i = 1; i <= n && fits; ++i) fits = digit(used, i) + digit(vec, i) < radix[i];
        if (!fits) continue;
        const int64_t total = used + vec;  // digits do not carry
        const int64_t value = best[used] + cost[vec];
        if (value < next[total]) {
          next[total] = value;
          choice[t][total] = vec;
          from[t][total] = used;
        }
      }
    }
    best = std::move(next);
  }
  int64_t end = 0;
  for (int64_t s = 0; s < states; ++s) {
    if (best[s] < best[end]) end = s;
  }
  TauOracleResult result;
  result.server_requests = best[end];
  for (size_t t = items.size(); t-- > 0;) {
    const int k = items[t];
    const int64_t vec = choice[t][end];
    std::vector<Demand> ds;
    for (const Demand& d : instance.demands()) {
      if (d.item == k) ds.push_back(d);
    }
    auto copies = [&](int i, int item) -> int64_t { return item == k ? digit(vec, i) : 0; };
    auto cap = [&](int i, int) -> int64_t { return instance.tau(i).FloorTimes(digit(vec, i)); };
    Routing routing = RouteDemands(instance, ds, copies, cap, false);
    for (int i = 1; i <= n; ++i) {
      if (digit(vec, i) > 0) result.solution.y[{i, k}] = digit(vec, i);
    }
    result.solution.x.insert(routing.x.begin(), routing.x.end());
    end = from[t][end];
  }
  return result;
}

}  // namespace coopcache
