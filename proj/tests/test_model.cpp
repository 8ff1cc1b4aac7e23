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

#include <random>

#include "coopcache/model.hpp"
#include "test_util.hpp"

using namespace coopcache;
using coopcache::testing::Cache;
using coopcache::testing::Make;

TEST_CASE("rational tau is exact and zero for storage-less caches") {
  const Instance inst = Make({Cache(1, 3, 1), Cache(2, 0, 4), Cache(3, 6, 4)}, 1, {});
  CHECK(inst.tau(1) == Rational::Of(1, 3));
  CHECK(inst.tau(2) == Rational::Of(0, 1));
  CHECK(inst.tau(3) == Rational::Of(2, 3));
  CHECK(inst.tau_max() == Rational::Of(2, 3));
  CHECK(Rational::Of(2, 3).FloorTimes(7) == 4);
  CHECK(Rational::Of(4, 6) == Rational::Of(2, 3));
}

TEST_CASE("instance merges duplicate demands and drops zeros") {
  const Instance inst = Make({Cache(1, 1, 0), Cache(2, 1, 0)}, 3,
                             {{2, 1, 2}, {1, 0, 1}, {2, 1, 3}, {1, 2, 0}});
  REQUIRE(inst.demands().size() == 2);
  CHECK(inst.demand(2, 1) == 5);
  CHECK(inst.demand(1, 2) == 0);
  CHECK(inst.total_demand() == 6);
  CHECK(inst.demands_of(2).size() == 1);
}

TEST_CASE("instance rejects bad references") {
  CHECK_THROWS_AS(Make({Cache(1, 1, 0)}, 2, {{2, 0, 1}}), InvalidInstance);
  CHECK_THROWS_AS(Make({Cache(1, 1, 0)}, 2, {{1, 2, 1}}), InvalidInstance);
  CHECK_THROWS_AS(Make({Cache(1, -1, 0)}, 2, {}), InvalidInstance);
  CHECK_THROWS_AS(Make({Cache(2, 1, 0)}, 2, {}), InvalidInstance);
}

TEST_CASE("validate: empty instance and empty solution") {
  const Instance inst = Make({Cache(1, 1, 0)}, 2, {});
  CHECK(Validate(inst, Solution{}).empty());
}

TEST_CASE("validate: shortfall names the demand and the missing amount") {
  const Instance inst = Make({Cache(1, 1, 0)}, 2, {{1, 1, 2}});
  Solution sol;
  sol.x[Route{0, 1, 1}] = 1;
  const auto v = Validate(inst, sol);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::kDemandShortfall);
  CHECK(v[0].requester == 1);
  CHECK(v[0].item == 1);
  CHECK(v[0].slack == 1);
}

TEST_CASE("validate: route from a cache without a copy") {
  const Instance inst = Make({Cache(1, 1, 0), Cache(2, 1, 1)}, 2, {{1, 1, 1}});
  Solution sol;
  sol.x[Route{2, 1, 1}] = 1;
  const auto v = Validate(inst, sol);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == Violation::Kind::kUnbackedRoute);
  CHECK(v[0].source == 2);
  CHECK(v[0].requester == 1);
  CHECK(v[0].item == 1);
}

TEST_CASE("cost: everything served from caches held before is free") {
  const Instance inst = Make({Cache(1, 2, 0), Cache(2, 1, 0)}, 2, {{1, 0, 4}, {1, 1, 1}, {2, 0, 2}});
  Solution sol;
  sol.y[{1, 0}] = sol.y[{1, 1}] = sol.y[{2, 0}] = 1;
  sol.x[Route{1, 1, 0}] = 4;
  sol.x[Route{1, 1, 1}] = 1;
  sol.x[Route{2, 2, 0}] = 2;
  const EpochState prev = EpochState::FromSolution(sol, 2, 0);
  const CostReport cost = EvaluateCost(inst, sol, &prev, true);
  CHECK(cost.total() == 0);
  CHECK(cost.placement_cost == 0);
}

TEST_CASE("cost: server and download penalties by hand") {
  const Instance inst = Make({Cache(1, 1, 0, 1, 2, 2)}, 1, {{1, 0, 3}}, ServerSpec{0, 1});
  Solution sol;
  sol.x[Route{0, 1, 0}] = 3;
  const CostReport cost = EvaluateCost(inst, sol);
  CHECK(cost.server_penalty == 3);
  CHECK(cost.download_penalties[1] == 4);
  CHECK(cost.total() == 7);
  CHECK(cost.simplified_objective == 3);
}

TEST_CASE("cost: upload exactly at the cap has no overage") {
  const Instance inst = Make({Cache(1, 1, 5), Cache(2, 0, 0)}, 1, {{2, 0, 5}});
  Solution sol;
  sol.y[{1, 0}] = 1;
  sol.x[Route{1, 2, 0}] = 5;
  const CostReport cost = EvaluateCost(inst, sol);
  CHECK(cost.upload_overages[1] == 0);
  CHECK(cost.hat_u[1] == 5);
  CHECK(cost.simplified_objective == 0);
}

TEST_CASE("cost: rejects invalid solutions") {
  const Instance inst = Make({Cache(1, 1, 0)}, 1, {{1, 0, 2}});
  CHECK_THROWS_AS(EvaluateCost(inst, Solution{}), InvalidSolution);
}

// Independent evaluation of the tiered cost expression.
namespace {
struct Expected {
  int64_t server_requests = 0, server_penalty = 0, downloads = 0, placements = 0;
  std::vector<int64_t> hat_u, hat_d;
};

Expected Recount(const Instance& inst, const Solution& sol, const EpochState* prev) {
  Expected e;
  e.hat_u.assign(inst.n() + 1, 0);
  e.hat_d.assign(inst.n() + 1, 0);
  for (const auto& [r, c] : sol.x) {
    if (r.source == r.requester) continue;
    e.hat_u[r.source] += c;
    e.hat_d[r.requester] += c;
  }
  e.server_requests = e.hat_u[0];
  e.server_penalty = inst.server().alpha0 * std::max<int64_t>(0, e.hat_u[0] - inst.server().u0);
  for (const CacheSpec& c : inst.caches()) {
    e.downloads += c.beta * std::max<int64_t>(0, e.hat_d[c.id] - c.d);
  }
  for (const auto& [key, copies] : sol.y) {
    if (copies >= 1 && (prev == nullptr || !prev->Holds(key.first, key.second))) ++e.placements;
  }
  return e;
}
}  // namespace

TEST_CASE("cost: matches an independent recount on random solutions") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + static_cast<int>(rng() % 4), m = 1 + static_cast<int>(rng() % 4);
    std::vector<CacheSpec> caches;
    for (int i = 1; i <= n; ++i) {
      caches.push_back(Cache(i, rng() % 3, rng() % 4, rng() % 5, 2 + rng() % 2, 1 + rng() % 2));
    }
    std::vector<Demand> demands;
    for (int q = 0; q < 6; ++q) {
      demands.push_back({1 + static_cast<int>(rng() % n), static_cast<int>(rng() % m),
                         static_cast<int64_t>(rng() % 4)});
    }
    const Instance inst = Make(caches, m, demands, ServerSpec{static_cast<int64_t>(rng() % 3), 1});
    const Solution sol = coopcache::testing::RandomSolution(inst, rng);
    REQUIRE(Validate(inst, sol).empty());
    EpochState prev = EpochState::Empty(n);
    for (int i = 1; i <= n; ++i) {
      if (rng() % 2) prev.held[i].insert(static_cast<int>(rng() % m));
    }
    const bool charge = rng() % 2;
    const CostReport cost = EvaluateCost(inst, sol, &prev, charge);
    const Expected e = Recount(inst, sol, &prev);
    CHECK(cost.simplified_objective == e.server_requests);
    CHECK(cost.server_penalty == e.server_penalty);
    CHECK(cost.download_penalty_total() == e.downloads);
    CHECK(cost.placement_cost == e.placements);
    CHECK(cost.hat_u == e.hat_u);
    CHECK(cost.total() == e.server_penalty + e.downloads + (charge ? e.placements : 0));
    CHECK((cost.simplified_objective == 0) == (e.hat_u[0] == 0));
    // Pure function.
    CHECK(EvaluateCost(inst, sol, &prev, charge).total() == cost.total());
  }
}
