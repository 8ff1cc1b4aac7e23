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

#include "coopcache/gap.hpp"
#include "test_util.hpp"

using namespace coopcache;
using coopcache::testing::GapContractViolation;
using coopcache::testing::RandomGapInput;

TEST_CASE("gap: integral input comes back unchanged") {
  GapInput in;
  in.p = {2, 1};
  in.q = {2, 1};
  in.zhat = {{{0, 0}, 1.0}, {{0, 1}, 1.0}, {{1, 0}, 1.0}};
  const auto z = GapRound(in);
  CHECK(z.at({0, 0}) == 1);
  CHECK(z.at({0, 1}) == 1);
  CHECK(z.at({1, 0}) == 1);
  int64_t total = 0;
  for (const auto& [cell, v] : z) total += v;
  CHECK(total == 3);
}

TEST_CASE("gap: one unit split 0.3 / 0.7") {
  GapInput in;
  in.p = {1};
  in.q = {1, 1};
  in.zhat = {{{0, 0}, 0.3}, {{1, 0}, 0.7}};
  const auto z = GapRound(in);
  const int64_t a = z.count({0, 0}) ? z.at({0, 0}) : 0;
  const int64_t b = z.count({1, 0}) ? z.at({1, 0}) : 0;
  CHECK(a + b == 1);
  CHECK((a == 1 || b == 1));
  CHECK(GapContractViolation(in, z).empty());
}

TEST_CASE("gap: two halves on two rows") {
  GapInput in;
  in.p = {1, 1};
  in.q = {1, 1};
  in.zhat = {{{0, 0}, 0.5}, {{0, 1}, 0.5}, {{1, 0}, 0.5}, {{1, 1}, 0.5}};
  const auto z = GapRound(in);
  CHECK(GapContractViolation(in, z).empty());
  for (int i = 0; i < 2; ++i) {
    int64_t row = 0;
    for (int j = 0; j < 2; ++j) row += z.count({i, j}) ? z.at({i, j}) : 0;
    CHECK(row <= 2);
  }
}

TEST_CASE("gap: cost-aware rounding prefers the cheap row") {
  GapInput in;
  in.p = {1};
  in.q = {1, 1};
  in.zhat = {{{0, 0}, 0.5}, {{1, 0}, 0.5}};
  in.cost = {{{0, 0}, 5.0}, {{1, 0}, 1.0}};
  const auto z = GapRound(in);
  CHECK(GapCost(in.cost, z) <= 3.0);
  CHECK(z.at({1, 0}) == 1);
}

TEST_CASE("gap: inconsistent column totals are rejected") {
  GapInput in;
  in.p = {2};
  in.q = {1};
  in.zhat = {{{0, 0}, 1.0}};
  CHECK_THROWS_AS(GapRound(in), GapInfeasible);
}

TEST_CASE("gap: random inputs meet the contract") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 500; ++t) {
    const GapInput in = RandomGapInput(rng, t % 2 == 1);
    const auto z = GapRound(in);
    INFO("trial " << t);
    CHECK(GapContractViolation(in, z) == "");
  }
}
