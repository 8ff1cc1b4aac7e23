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

#include <doctest.h>

#include <functional>
#include <limits>
#include <random>

#include "coopcache/lp.hpp"
#include "coopcache/oracle.hpp"
#include "coopcache/scenario.hpp"
#include "coopcache/verify.hpp"
#include "test_util.hpp"

using namespace coopcache;
using coopcache::testing::Cache;
using coopcache::testing::Make;

namespace {

struct Naive {
  int64_t total = std::numeric_limits<int64_t>::max();
  int64_t simplified = std::numeric_limits<int64_t>::max();
};

// Every placement within storage, then every source for every single unit
// of demand within the upload caps, costed by EvaluateCost.
Naive NaiveOpt(const Instance& inst, bool placement, const EpochState* prev) {
  Naive best;
  const int n = inst.n();
  const int m = inst.m();
  std::vector<std::pair<int, int>> units;  // (requester, item)
  for (const Demand& d : inst.demands()) {
    for (int64_t c = 0; c < d.count; ++c) units.push_back({d.cache, d.item});
  }
  for (int mask = 0; mask < (1 << (n * m)); ++mask) {
    Solution sol;
    bool fits = true;
    for (int i = 1; i <= n; ++i) {
      int64_t used = 0;
      for (int k = 0; k < m; ++k) {
        if (mask >> ((i - 1) * m + k) & 1) {
          sol.y[{i, k}] = 1;
          ++used;
        }
      }
      fits = fits && used <= inst.cache(i).s;
    }
    if (!fits) continue;
    std::function<void(size_t)> assign = [&](size_t u) {
      if (u == units.size()) {
        // Upload caps are hard constraints of the integer program.
        for (int i = 1; i <= n; ++i) {
          if (sol.upload(i) > inst.cache(i).u) return;
        }
        const CostReport cost = EvaluateCost(inst, sol, prev, placement);
        best.total = std::min(best.total, cost.total());
        const int64_t value = sol.server_requests() + (placement ? cost.placement_cost : 0);
        best.simplified = std::min(best.simplified, value);
        return;
      }
      const auto [j, k] = units[u];
      for (int src = 0; src <= n; ++src) {
        if (src > 0 && sol.copies(src, k) == 0) continue;
        Route r{src, j, k};
        if (++sol.x[r] == 0) sol.x.erase(r);
        assign(u + 1);
        if (--sol.x[r] == 0) sol.x.erase(r);
      }
    };
    assign(0);
  }
  return best;
}

TinyParams Smaller() {
  TinyParams p;
  p.max_n = 2;
  p.max_m = 3;
  p.max_total = 6;
  return p;
}

}  // namespace

TEST_CASE("oracle: zero demand") {
  const Instance inst = Make({Cache(1, 1, 1), Cache(2, 2, 0)}, 3, {});
  CHECK(ExactOpt(inst, OracleMode::kServing).total == 0);
  CHECK(ExactOpt(inst, OracleMode::kPlacement).total == 0);
}

TEST_CASE("oracle: one slot, two items, placement charged") {
  const Instance inst = Make({Cache(1, 1, 0)}, 2, {{1, 0, 5}, {1, 1, 2}});
  const OracleResult res = ExactOpt(inst, OracleMode::kPlacement);
  CHECK(res.total == 3);
  CHECK(res.solution.copies(1, 0) == 1);
  CHECK(res.simplified_value == 3);
}

TEST_CASE("oracle: items held before are free") {
  const Instance inst = Make({Cache(1, 1, 0)}, 2, {{1, 0, 5}, {1, 1, 2}});
  EpochState prev = EpochState::Empty(1);
  prev.held[1] = {0};
  CHECK(ExactOpt(inst, OracleMode::kPlacement, &prev).total == 2);
}

TEST_CASE("oracle: partition yes-instance costs nothing") {
  const PartitionSpec spec{{1, 1, 2}, 2};
  REQUIRE(HasEqualPartition(spec));
  CHECK(ExactOpt(PartitionInstance(spec), OracleMode::kServing).total == 0);
}

TEST_CASE("oracle: limits are enforced") {
  std::vector<CacheSpec> caches;
  for (int i = 1; i <= 5; ++i) caches.push_back(Cache(i, 1, 1));
  const Instance inst = Make(caches, 2, {{1, 0, 1}});
  CHECK_THROWS_AS(ExactOpt(inst, OracleMode::kServing), OracleLimitExceeded);
}

TEST_CASE("oracle agrees with naive enumeration") {
  for (uint64_t seed = 0; seed < 120; ++seed) {
    const Instance inst = RandomTinyInstance(seed, Smaller());
    INFO("seed " << seed);
    for (const bool placement : {false, true}) {
      const OracleResult got =
          ExactOpt(inst, placement ? OracleMode::kPlacement : OracleMode::kServing);
      const Naive want = NaiveOpt(inst, placement, nullptr);
      CHECK(got.total == want.total);
      CHECK(got.simplified_value == want.simplified);
      CHECK(Validate(inst, got.solution).empty());
      CHECK(EvaluateCost(inst, got.solution, nullptr, placement).total() == got.total);
    }
  }
}

TEST_CASE("oracle agrees with naive enumeration given a previous epoch") {
  std::mt19937_64 rng(21);
  for (uint64_t seed = 300; seed < 360; ++seed) {
    const Instance inst = RandomTinyInstance(seed, Smaller());
    EpochState prev = EpochState::Empty(inst.n());
    for (int i = 1; i <= inst.n(); ++i) {
      for (int k = 0; k < inst.m(); ++k) {
        if (rng() % 3 == 0) prev.held[i].insert(k);
      }
    }
    const OracleResult got = ExactOpt(inst, OracleMode::kPlacement, &prev);
    CHECK(got.total == NaiveOpt(inst, true, &prev).total);
  }
}

TEST_CASE("oracle serving value lies above the tau-LP") {
  for (uint64_t seed = 0; seed < 80; ++seed) {
    const Instance inst = RandomTinyInstance(seed);
    const OracleResult res = ExactOpt(inst, OracleMode::kServing);
    const FractionalSolution lp = SolveLp(BuildTauLp(inst));
    const TauOracleResult tau = ExactTauOpt(inst);
    CHECK(lp.objective_value <= static_cast<double>(tau.server_requests) + 1e-7);
    if (lp.objective_value > static_cast<double>(res.simplified_value) + 1e-7) {
      MESSAGE("seed " << seed << ": tau-LP " << lp.objective_value << " above I1 optimum "
                      << res.simplified_value);
    }
  }
}
