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

#ifndef COOPCACHE_VERIFY_HPP_
#define COOPCACHE_VERIFY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "coopcache/model.hpp"
#include "coopcache/rounding.hpp"

namespace coopcache {

struct TinyParams {
  int max_n = 4;
  int max_m = 4;
  int64_t max_total = 16;
  int64_t max_s = 3;
  int64_t max_u = 6;
};

// Random instance within the oracle limits; a pure function of the seed.
Instance RandomTinyInstance(uint64_t seed, const TinyParams& params = {});

struct BoundViolation {
  uint64_t seed = 0;
  std::string what;
};

// Checks the rounding guarantees on one placement result: objective within
// `factor` of the fractional value, storage <= 5s+2, upload <= 8u+4tau_max.
std::vector<std::string> CheckPlacementBounds(const Instance& instance,
                                              const PlacementResult& result, double factor);

struct VerifyReport {
  uint64_t seed = 0;
  int instances = 0;
  std::vector<BoundViolation> violations;
  double worst_serving_ratio = 0.0;    // rounded / fractional, fractional > 0
  double worst_placement_ratio = 0.0;
  double worst_storage_factor = 0.0;   // used / s
  double worst_upload_factor = 0.0;    // upload / u
};

// Runs both placement modes on `count` tiny instances derived from `seed`.
// `inject_fault` corrupts every rounded solution so the checker must fire.
VerifyReport RunBoundSuite(int count, uint64_t seed, bool inject_fault = false);

}  // namespace coopcache

#endif  // COOPCACHE_VERIFY_HPP_
