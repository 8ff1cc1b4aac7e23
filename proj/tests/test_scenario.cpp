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

#include <cmath>
#include <sstream>

#include "coopcache/instance_io.hpp"
#include "coopcache/oracle.hpp"
#include "coopcache/scenario.hpp"

using namespace coopcache;

namespace {

ScenarioParams Small(uint64_t seed) {
  ScenarioParams p;
  p.n = 40;
  p.m = 30;
  p.n_users = 300;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("generators are pure functions of their parameters") {
  for (uint64_t seed : {1u, 2u, 77u}) {
    CHECK(InstanceToJson(GenSans(Small(seed))).dump() == InstanceToJson(GenSans(Small(seed))).dump());
    CHECK(InstanceToJson(GenMaws(Small(seed))).dump() == InstanceToJson(GenMaws(Small(seed))).dump());
  }
  CHECK(InstanceToJson(GenSans(Small(1))).dump() != InstanceToJson(GenSans(Small(2))).dump());
}

TEST_CASE("no users means no demand") {
  ScenarioParams p = Small(3);
  p.n_users = 0;
  CHECK(GenSans(p).demands().empty());
  CHECK(GenMaws(p).demands().empty());
}

TEST_CASE("sans: caches sized from upload and tau") {
  const ScenarioParams p = Small(4);
  const Instance inst = GenSans(p);
  CHECK(inst.n() == p.n);
  CHECK(inst.m() == p.m);
  for (const CacheSpec& c : inst.caches()) {
    CHECK(c.u >= p.u_min);
    CHECK(c.u <= p.u_max);
    CHECK(c.s == (c.u * p.tau.den + p.tau.num - 1) / p.tau.num);
  }
  // Roughly n_pop_items distinct draws per user, each at least one request.
  CHECK(inst.total_demand() >= p.n_users);
  CHECK(static_cast<double>(inst.total_demand()) <= 2.0 * p.n_pop_items * p.n_users);
}

TEST_CASE("maws overlaps more than sans") {
  double sans = 0.0, maws = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    sans += MeanPairwiseJaccard(GenSans(Small(seed)));
    maws += MeanPairwiseJaccard(GenMaws(Small(seed)));
  }
  CHECK(maws > sans);
}

TEST_CASE("churn replaces five of a hundred items and nothing else") {
  Generator gen{Workload::kMaws, Small(5), {}};
  gen.params.m = 100;
  const Instance base = gen.Generate(5);
  std::vector<int> replaced;
  const Instance next = EvolveDemands(base, gen, 99, &replaced);
  CHECK(replaced.size() == 5);
  const std::set<int> changed(replaced.begin(), replaced.end());
  for (const CacheSpec& c : base.caches()) {
    for (int k = 0; k < base.m(); ++k) {
      if (!changed.count(k)) CHECK(next.demand(c.id, k) == base.demand(c.id, k));
    }
  }
  std::vector<int> again;
  const Instance repeat = EvolveDemands(base, gen, 99, &again);
  CHECK(again == replaced);
  CHECK(InstanceToJson(repeat).dump() == InstanceToJson(next).dump());
}

TEST_CASE("churn on ten items replaces nothing") {
  Generator gen{Workload::kSans, Small(6), {}};
  gen.params.m = 10;
  const Instance base = gen.Generate(6);
  std::vector<int> replaced;
  const Instance next = EvolveDemands(base, gen, 1, &replaced);
  CHECK(replaced.empty());
  CHECK(InstanceToJson(next).dump() == InstanceToJson(base).dump());
}

TEST_CASE("demand stream without churn repeats the first instance") {
  const Generator gen{Workload::kSans, Small(7), {}};
  const auto stream = DemandStream(gen, 7, 3, false);
  REQUIRE(stream.size() == 3);
  CHECK(InstanceToJson(stream[2]).dump() == InstanceToJson(stream[0]).dump());
  CHECK(InstanceToJson(stream[0]).dump() == InstanceToJson(gen.Generate(7)).dump());
}

TEST_CASE("trace: header only gives an empty table") {
  std::istringstream in("user_id,cache_id,timestamp\n");
  CHECK(IngestTrace(in).empty());
}

TEST_CASE("trace: repeated rows aggregate, duplicate timestamps included") {
  std::istringstream in("user_id,cache_id,timestamp\n4,2,10\n4,2,10\n4,2,11\n5,1,3\n");
  const auto table = IngestTrace(in);
  REQUIRE(table.size() == 2);
  CHECK(table[0] == Association{4, 2, 3});
  CHECK(table[1] == Association{5, 1, 1});
}

TEST_CASE("trace: malformed rows report their line") {
  std::istringstream bad_int("user_id,cache_id,timestamp\n1,2,3\nx,2,3\n");
  try {
    IngestTrace(bad_int);
    FAIL("expected a parse error");
  } catch (const TraceParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream short_row("user_id,cache_id,timestamp\n1,2\n");
  CHECK_THROWS_AS(IngestTrace(short_row), TraceParseError);
  std::istringstream no_header("1,2,3\n");
  CHECK_THROWS_AS(IngestTrace(no_header), TraceParseError);
}

TEST_CASE("trace-driven maws uses the trace caches") {
  std::istringstream in("user_id,cache_id,timestamp\n1,10,0\n1,20,0\n2,20,0\n3,30,0\n");
  ScenarioParams p = Small(8);
  p.n_users = 3;
  const Instance inst = GenMawsFromTrace(p, IngestTrace(in));
  CHECK(inst.n() == 3);
}

TEST_CASE("partition: construction") {
  const Instance inst = PartitionInstance({{2, 2, 1, 1}, 2});
  REQUIRE(inst.n() == 3);
  CHECK(inst.m() == 4);
  CHECK(inst.cache(1).s == 0);
  CHECK(inst.cache(1).d == 12);
  CHECK(inst.cache(2).s == 2);
  CHECK(inst.cache(3).s == 2);
  CHECK(inst.cache(2).u == 6);
  CHECK(inst.demand(1, 0) == 4);
  CHECK_THROWS(PartitionInstance({{1, 2}, 2}));
}

TEST_CASE("partition: worked examples") {
  CHECK(ExactOpt(PartitionInstance({{1, 1}, 1}), OracleMode::kServing).total == 0);
  CHECK(ExactOpt(PartitionInstance({{1, 3}, 1}), OracleMode::kServing).total > 0);
  CHECK(ExactOpt(PartitionInstance({{2, 2, 1, 1}, 2}), OracleMode::kServing).total == 0);
}

TEST_CASE("partition: zero cost exactly when an equal split exists") {
  OracleLimits limits;
  limits.max_total_demand = 64;
  for (int n = 2; n <= 4; ++n) {
    int combos = 1;
    for (int t = 0; t < n; ++t) combos *= 3;
    for (int code = 0; code < combos; ++code) {
      std::vector<int64_t> w;
      for (int v = code, t = 0; t < n; ++t, v /= 3) w.push_back(1 + v % 3);
      for (int t = 1; t < n; ++t) {
        const PartitionSpec spec{w, t};
        const bool zero = ExactOpt(PartitionInstance(spec), OracleMode::kServing, nullptr, limits).total == 0;
        CHECK(zero == HasEqualPartition(spec));
      }
    }
  }
}
