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

#ifndef COOPCACHE_ROUNDING_HPP_
#define COOPCACHE_ROUNDING_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coopcache/lp.hpp"
#include "coopcache/model.hpp"

namespace coopcache {

// Up to s_i items with the largest demand at cache i; ties to lower item id.
std::vector<int> TopKItems(const Instance& instance, int cache);

enum class PlacementMode {
  kServing,    // minimize server requests only
  kPlacement,  // also charge newly placed items
};

struct Reroute {
  int from = 0;  // 0 = server
  int to = 0;
  int requester = 0;
  int item = 0;
  double amount = 0.0;
};

struct RoundingTrace {
  std::vector<CacheItem> promoted;          // step 1
  std::map<int, double> nhat;               // step 2, per item
  std::map<int, int64_t> ncopies;           // step 3, per item
  std::vector<CacheItem> closed_small;      // step 2 closures
  std::vector<CacheItem> closed_gap;        // step 4 closures
  std::vector<Reroute> reroutes;            // steps 2 and 4
  std::map<CacheItem, double> displaced;    // step 5, local demand moved
  std::map<CacheItem, int64_t> y;           // final placement
  std::map<Route, int64_t> x;               // final routing

  std::string Dump() const;
  static RoundingTrace Parse(const std::string& text);
  Solution Replay() const;
};

struct RoundOptions {
  PlacementMode mode = PlacementMode::kServing;
  // Pairs charged for placement in kPlacement mode; ignored otherwise.
  const std::set<CacheItem>* chargeable = nullptr;
};

// Integral tau-form solution from a fractional one.
Solution Round(const Instance& instance, const FractionalSolution& frac,
               const RoundOptions& options = {}, RoundingTrace* trace = nullptr);

// Splits the external load of every held item over ceil(load / tau) copies.
Solution TauExpand(const Solution& sol, const Instance& instance);
std::vector<double> CopyLoads(double load, const Rational& tau);

// Caps every placement count at one.
Solution Clamp(const Solution& sol);

struct PlacementOptions {
  PlacementMode mode = PlacementMode::kServing;
  ConcaveOptions concave;  // node budget etc. for kPlacement
  SimplexOptions simplex;
};

struct PlacementResult {
  Solution solution;  // single-copy form
  CostReport cost;
  std::map<int, std::vector<int>> reserved;  // per cache
  FractionalSolution fractional;             // on the residual demand
  // LP (kServing) or concave (kPlacement) value on the residual demand.
  double fractional_objective = 0.0;
  // Same objective evaluated on the rounded residual part.
  double rounded_objective = 0.0;
  std::optional<ConcaveResult> concave;
  RoundingTrace trace;
};

// Reserve, solve the relaxation on residual demand, round, clamp.
PlacementResult DataPlacement(const Instance& instance, const EpochState* prev,
                              const PlacementOptions& options = {});

// Fractional step used by DataPlacement; exposed so clustering can swap it.
struct ResidualProblem {
  Instance residual;
  std::map<int, std::vector<int>> reserved;
  std::set<CacheItem> free_pairs;
};
ResidualProblem ReserveTopItems(const Instance& instance);

PlacementResult FinishPlacement(const Instance& instance, const EpochState* prev,
                                const ResidualProblem& problem, FractionalSolution frac,
                                double fractional_objective, PlacementMode mode);

}  // namespace coopcache

#endif  // COOPCACHE_ROUNDING_HPP_
