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

#include <algorithm>
#include <random>

#include "coopcache/oracle.hpp"
#include "coopcache/rounding.hpp"
#include "coopcache/scenario.hpp"
#include "coopcache/verify.hpp"
#include "test_util.hpp"

using namespace coopcache;
using coopcache::testing::Cache;
using coopcache::testing::Make;
using coopcache::testing::RandomSolution;

namespace {

// Every copy of (i,k) carries at most tau_i external requests.
bool WithinTau(const Instance& inst, const Solution& sol) {
  std::map<CacheItem, int64_t> external;
  for (const auto& [r, c] : sol.x) {
    if (r.source != 0 && r.source != r.requester) external[{r.source, r.item}] += c;
  }
  for (const auto& [key, load] : external) {
    const Rational tau = inst.tau(key.first);
    if (load * tau.den > tau.num * sol.copies(key.first, key.second)) return false;
  }
  return true;
}

int64_t SumTopK(const Instance& inst, int cache, const std::vector<int>& items) {
  int64_t total = 0;
  for (int k : items) total += inst.demand(cache, k);
  return total;
}

FractionalSolution FromIntegral(const Solution& sol) {
  FractionalSolution frac;
  for (const auto& [key, c] : sol.y) frac.yhat[key] = static_cast<double>(c);
  for (const auto& [r, c] : sol.x) frac.xhat[r] = static_cast<double>(c);
  double server = 0.0;
  for (const auto& [r, c] : sol.x) server += r.source == 0 ? static_cast<double>(c) : 0.0;
  frac.objective_value = server;
  return frac;
}

}  // namespace

TEST_CASE("top-k: largest demands win") {
  const Instance inst = Make({Cache(1, 2, 0)}, 3, {{1, 0, 5}, {1, 1, 2}, {1, 2, 1}});
  CHECK(TopKItems(inst, 1) == std::vector<int>{0, 1});
}

TEST_CASE("top-k: fewer items than slots") {
  const Instance inst = Make({Cache(1, 5, 0)}, 4, {{1, 3, 1}, {1, 1, 2}});
  auto items = TopKItems(inst, 1);
  std::sort(items.begin(), items.end());
  CHECK(items == std::vector<int>{1, 3});
}

TEST_CASE("top-k: ties go to the lower item") {
  const Instance inst = Make({Cache(1, 1, 0)}, 3, {{1, 2, 4}, {1, 1, 4}});
  CHECK(TopKItems(inst, 1) == std::vector<int>{1});
}

TEST_CASE("top-k: total demand is maximal over all subsets") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const int m = 1 + static_cast<int>(rng() % 6);
    const int64_t s = static_cast<int64_t>(rng() % 5);
    std::vector<Demand> demands;
    for (int k = 0; k < m; ++k) {
      if (rng() % 4) demands.push_back({1, k, 1 + static_cast<int64_t>(rng() % 5)});
    }
    const Instance inst = Make({Cache(1, s, 0)}, m, demands);
    const auto chosen = TopKItems(inst, 1);
    CHECK(static_cast<int64_t>(chosen.size()) ==
          std::min<int64_t>(s, static_cast<int64_t>(demands.size())));
    int64_t best = 0;
    for (int mask = 0; mask < (1 << m); ++mask) {
      if (__builtin_popcount(mask) > s) continue;
      std::vector<int> items;
      for (int k = 0; k < m; ++k) {
        if (mask >> k & 1) items.push_back(k);
      }
      best = std::max(best, SumTopK(inst, 1, items));
    }
    CHECK(SumTopK(inst, 1, chosen) == best);
  }
}

TEST_CASE("copy loads: five requests at tau two") {
  CHECK(CopyLoads(5, Rational{2, 1}) == std::vector<double>{2, 2, 1});
  CHECK(CopyLoads(0, Rational{2, 1}) == std::vector<double>{0});
  CHECK(CopyLoads(3, Rational{3, 2}) == std::vector<double>{1.5, 1.5});
}

TEST_CASE("tau expand: no external routes leaves the solution alone") {
  const Instance inst = Make({Cache(1, 2, 1), Cache(2, 1, 1)}, 2, {{1, 0, 3}, {2, 1, 2}});
  Solution sol;
  sol.y[{1, 0}] = 1;
  sol.y[{2, 1}] = 1;
  sol.x[Route{1, 1, 0}] = 3;
  sol.x[Route{2, 2, 1}] = 2;
  const Solution out = TauExpand(sol, inst);
  CHECK(out.y == sol.y);
  CHECK(out.x == sol.x);
}

TEST_CASE("tau expand: five external requests at tau two open three copies") {
  const Instance inst = Make({Cache(1, 1, 2, 1'000'000, 2, 1), Cache(2, 0, 0)}, 1, {{2, 0, 5}});
  REQUIRE(inst.tau(1).value() == doctest::Approx(2.0));
  Solution sol;
  sol.y[{1, 0}] = 1;
  sol.x[Route{1, 2, 0}] = 5;
  const Solution out = TauExpand(sol, inst);
  CHECK(out.copies(1, 0) == 3);
  CHECK(WithinTau(inst, out));
}

TEST_CASE("tau expand then clamp keeps cost and validity") {
  std::mt19937_64 rng(3);
  for (uint64_t seed = 0; seed < 150; ++seed) {
    const Instance inst = RandomTinyInstance(seed);
    const Solution raw = RandomSolution(inst, rng);
    Solution sol;
    sol.y = raw.y;
    // Caches without upload cannot serve others in tau form.
    for (const auto& [r, c] : raw.x) {
      const bool blocked = r.source != 0 && r.source != r.requester && inst.cache(r.source).u == 0;
      sol.x[blocked ? Route{0, r.requester, r.item} : r] += c;
    }
    REQUIRE(Validate(inst, sol).empty());
    const Solution wide = TauExpand(sol, inst);
    CHECK(WithinTau(inst, wide));
    for (const CacheSpec& c : inst.caches()) {
      CHECK(wide.distinct_items(c.id) == sol.distinct_items(c.id));
    }
    const Solution back = Clamp(wide);
    CHECK(Validate(inst, back).empty());
    CHECK(EvaluateCost(inst, back).total() == EvaluateCost(inst, sol).total());
    CHECK(back.y == sol.y);
  }
}

TEST_CASE("round: integral input keeps its placement and objective") {
  for (uint64_t seed = 40; seed < 80; ++seed) {
    const Instance inst = RandomTinyInstance(seed);
    const TauOracleResult exact = ExactTauOpt(inst);
    const FractionalSolution frac = FromIntegral(exact.solution);
    const Solution out = Round(inst, frac);
    CHECK(out.server_requests() == exact.server_requests);
    for (const auto& [key, c] : exact.solution.y) {
      if (c > 0) CHECK(out.copies(key.first, key.second) == c);
    }
  }
}

TEST_CASE("round: demand stays served and rounded flow is near the LP") {
  for (uint64_t seed = 500; seed < 700; ++seed) {
    const Instance inst = RandomTinyInstance(seed);
    const FractionalSolution frac = SolveLp(BuildTauLp(inst));
    RoundingTrace trace;
    const Solution out = Round(inst, frac, {}, &trace);
    INFO("seed " << seed);
    CHECK(Validate(inst, out).empty());
    CHECK(static_cast<double>(out.server_requests()) <= 8.0 * frac.objective_value + 1e-6);
    for (const CacheSpec& c : inst.caches()) {
      CHECK(out.storage_used(c.id) <= 4 * c.s + 2);
    }
    for (const CacheItem& key : trace.promoted) CHECK(out.copies(key.first, key.second) >= 1);
    for (const auto& [key, moved] : trace.displaced) {
      CHECK(moved < static_cast<double>(inst.demand(key.first, key.second)) / 2.0 + 1e-9);
    }
  }
}

TEST_CASE("round: trace replays to the same solution") {
  const Instance inst = RandomTinyInstance(17);
  const FractionalSolution frac = SolveLp(BuildTauLp(inst));
  RoundingTrace trace;
  const Solution out = Round(inst, frac, {}, &trace);
  const RoundingTrace parsed = RoundingTrace::Parse(trace.Dump());
  CHECK(parsed.Dump() == trace.Dump());
  const Solution replay = parsed.Replay();
  CHECK(replay.y == out.y);
  CHECK(replay.x == out.x);
}

TEST_CASE("data placement: self-sufficient caches cost nothing") {
  const Instance inst = Make({Cache(1, 2, 1), Cache(2, 2, 1)}, 4,
                             {{1, 0, 3}, {1, 1, 1}, {2, 2, 5}, {2, 3, 2}});
  const PlacementResult res = DataPlacement(inst, nullptr);
  CHECK(res.cost.total() == 0);
  CHECK(res.solution.server_requests() == 0);
}

TEST_CASE("data placement: partition yes-instance reaches zero") {
  const PartitionSpec spec{{1, 2, 3, 2}, 2};
  REQUIRE(HasEqualPartition(spec));
  const Instance inst = PartitionInstance(spec);
  const PlacementResult res = DataPlacement(inst, nullptr);
  CHECK(Validate(inst, res.solution).empty());
  CHECK(ExactOpt(inst, OracleMode::kServing).total == 0);
  MESSAGE("partition yes-instance rounding total " << res.cost.total());
}

TEST_CASE("data placement: bounds hold in both modes") {
  for (uint64_t seed = 900; seed < 1000; ++seed) {
    const Instance inst = RandomTinyInstance(seed);
    PlacementOptions serving;
    const PlacementResult a = DataPlacement(inst, nullptr, serving);
    CHECK(CheckPlacementBounds(inst, a, 8.0).empty());
    PlacementOptions placement;
    placement.mode = PlacementMode::kPlacement;
    const PlacementResult b = DataPlacement(inst, nullptr, placement);
    CHECK(CheckPlacementBounds(inst, b, 16.0).empty());
  }
}

TEST_CASE("data placement is deterministic") {
  const Instance inst = RandomTinyInstance(4242);
  const PlacementResult a = DataPlacement(inst, nullptr);
  const PlacementResult b = DataPlacement(inst, nullptr);
  CHECK(a.solution.y == b.solution.y);
  CHECK(a.solution.x == b.solution.x);
  CHECK(a.trace.Dump() == b.trace.Dump());
}
