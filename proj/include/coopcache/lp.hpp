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

// Fractional relaxations of the tau-constrained placement program.
//
// The full model carries one routing variable per (source, requester, item)
// and reproduces the program row for row. The compact model aggregates
// cache-to-cache routing per item into export/import totals; it has the
// same optimum whenever every tau_i <= r_jk (then the per-route caps
// x_ijk <= r_jk * y_ik are implied by the per-copy service cap), and its
// solution is expanded back into per-route flows.

#ifndef COOPCACHE_LP_HPP_
#define COOPCACHE_LP_HPP_

#include <map>
#include <set>
#include <vector>

#include "coopcache/model.hpp"
#include "coopcache/simplex.hpp"

namespace coopcache {

inline constexpr double kFeasibilityTolerance = 1e-7;
inline constexpr double kIntegralityTolerance = 1e-6;

enum class LpForm { kFull, kCompact };

struct LpModel {
  LpForm form = LpForm::kFull;
  LinearProgram program;
  int n = 0;
  int m = 0;
  std::vector<Demand> demands;
  std::vector<Rational> tau;  // by cache id, [0] unused
  std::vector<int64_t> storage;

  std::map<CacheItem, int> y_var;
  // Full form.
  std::map<Route, int> x_var;
  // Compact form.
  std::map<CacheItem, int> local_var;   // x_jjk
  std::map<CacheItem, int> import_var;  // sum_{i != j, i > 0} x_ijk
  std::map<CacheItem, int> export_var;  // sum_{j != i} x_ijk
  std::map<int, int> total_var;         // per item, total cache-to-cache flow
};

struct FractionalSolution {
  std::map<CacheItem, double> yhat;  // entries > 0 only
  std::map<Route, double> xhat;      // entries > 0 only
  double objective_value = 0.0;

  double y(int cache, int item) const;
  double x(int source, int requester, int item) const;
  double server_flow() const;
};

// Rows: per-copy external service cap, storage, demand coverage,
// per-route backing. Objective: requests served by the server.
LpModel BuildTauLp(const Instance& instance);

// Aggregated equivalent of BuildTauLp; requires CompactFormIsExact.
LpModel BuildCompactTauLp(const Instance& instance);
bool CompactFormIsExact(const Instance& instance);

// Compact form when exact, full form otherwise.
LpModel BuildTauLpAuto(const Instance& instance);

// Maps an optimal vector of `model.program` to placement and routing.
FractionalSolution ExtractFractional(const LpModel& model, const std::vector<double>& values);

FractionalSolution SolveLp(const LpModel& model, const SimplexOptions& options = {});

// Largest violation of the tau-LP rows by `frac` on `instance`.
double TauLpViolation(const Instance& instance, const FractionalSolution& frac);

// ---- Concave placement-cost objective ----

struct ConcaveModel {
  LpModel base;
  // y variables whose placement is charged y / (y + 1).
  std::set<CacheItem> chargeable;
};

// Charges every (i, k) with k not held by i in `prev` and not in `free_pairs`.
ConcaveModel BuildConcaveModel(const Instance& instance, const EpochState* prev,
                               const std::set<CacheItem>& free_pairs = {});

enum class ConcaveStatus { kOptimal, kBudgetExhausted };

struct ConcaveResult {
  FractionalSolution solution;  // objective_value is the concave objective
  double lower_bound = 0.0;     // valid bound over the searched region
  ConcaveStatus status = ConcaveStatus::kOptimal;
  int nodes = 0;
  double gap() const { return solution.objective_value - lower_bound; }
};

struct ConcaveOptions {
  int node_budget = 10'000;
  // Search stops once the simplex has spent this many times the root's
  // iterations (but at least min_iteration_budget) across all nodes.
  double iteration_budget_factor = 3.0;
  int64_t min_iteration_budget = 20'000;
  // Tangent-majorization passes used to polish incumbents.
  int polish_iterations = 8;
  double gap_tolerance = 1e-7;
  SimplexOptions simplex;
};

// Exact concave objective sum x_0jk + sum_{chargeable} y / (y + 1).
double ConcaveObjective(const ConcaveModel& model, const FractionalSolution& sol);

// Branch-and-bound over the chargeable placements with secant lower bounds.
ConcaveResult SolveConcave(const ConcaveModel& model, const ConcaveOptions& options = {});

}  // namespace coopcache

#endif  // COOPCACHE_LP_HPP_
