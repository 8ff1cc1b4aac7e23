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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "coopcache/lp.hpp"

namespace coopcache {

namespace {

double Charge(double y) { return y / (y + 1.0); }

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  double parent_bound = -std::numeric_limits<double>::infinity();
};

struct Relaxation {
  SimplexResult result;
  bool feasible = false;
};

class ConcaveSolver {
 public:
  ConcaveSolver(const ConcaveModel& model, const ConcaveOptions& options)
      : model_(model), options_(options) {
    for (const CacheItem& key : model.chargeable) {
      auto it = model.base.y_var.find(key);
      if (it == model.base.y_var.end()) continue;
      vars_.push_back(it->second);
      caps_.push_back(static_cast<double>(model.base.storage[key.first]));
    }
  }

  ConcaveResult Run() {
    ConcaveResult out;
    Box root{std::vector<double>(vars_.size(), 0.0), caps_, -std::numeric_limits<double>::infinity()};
    std::vector<Box> stack{root};
    double region_bound = std::numeric_limits<double>::infinity();
    bool first = true;
    int64_t iteration_budget = 0;
    while (!stack.empty()) {
      if (out.nodes >= options_.node_budget) break;
      if (!first && iterations_ > iteration_budget) break;
      Box box = std::move(stack.back());
      stack.pop_back();
      ++out.nodes;
      const Relaxation rel = SolveSecant(box);
      if (!rel.feasible) continue;
      const double bound = rel.result.objective;
      Offer(rel.result.x);
      if (first) {
        first = false;
        iteration_budget = std::max<int64_t>(
            options_.min_iteration_budget,
            static_cast<int64_t>(options_.iteration_budget_factor * static_cast<double>(iterations_)));
        Polish(box, rel.result);
      }
      if (bound >= best_value_ - options_.gap_tolerance) {
        region_bound = std::min(region_bound, bound);
        continue;
      }
      // Branch on the chargeable variable where the secant is loosest.
      size_t pick = vars_.size();
      double worst = options_.gap_tolerance;
      for (size_t t = 0; t < vars_.size(); ++t) {
        const double y = rel.result.x[vars_[t]];
        const double gap = Charge(y) - Secant(box, t, y);
        if (gap > worst) {
          worst = gap;
          pick = t;
        }
      }
      if (pick == vars_.size()) {
        region_bound = std::min(region_bound, bound);
        continue;
      }
      const double y = rel.result.x[vars_[pick]];
      const double rounded = std::round(y);
      Box left = box, right = box;
      left.parent_bound = right.parent_bound = bound;
      if (std::abs(y - rounded) <= kIntegralityTolerance) {
        left.hi[pick] = rounded;
        right.lo[pick] = rounded;
      } else {
        left.hi[pick] = std::floor(y);
        right.lo[pick] = std::ceil(y);
      }
      stack.push_back(std::move(left));
      stack.push_back(std::move(right));
    }
    // Unexplored boxes are bounded by their parent's relaxation.
    for (const Box& box : stack) region_bound = std::min(region_bound, box.parent_bound);
    if (!have_best_) {
      throw NumericalError("concave placement program has no feasible point");
    }
    out.status = stack.empty() ? ConcaveStatus::kOptimal : ConcaveStatus::kBudgetExhausted;
    out.solution = ExtractFractional(model_.base, best_x_);
    out.solution.objective_value = best_value_;
    out.lower_bound = std::min(region_bound, best_value_);
    return out;
  }

 private:
  double Secant(const Box& box, size_t t, double y) const {
    const double lo = box.lo[t], hi = box.hi[t];
    if (hi - lo <= 0.0) return Charge(lo);
    return Charge(lo) + (Charge(hi) - Charge(lo)) / (hi - lo) * (y - lo);
  }

  LinearProgram WithBox(const Box& box) const {
    LinearProgram lp = model_.base.program;
    for (size_t t = 0; t < vars_.size(); ++t) lp.set_bounds(vars_[t], box.lo[t], box.hi[t]);
    return lp;
  }

  Relaxation Solve(const LinearProgram& lp, const std::vector<BasisStatus>* warm = nullptr) const {
    Relaxation rel;
    rel.result = SolveSimplex(lp, options_.simplex, warm);
    iterations_ += rel.result.iterations;
    rel.feasible = rel.result.status == SolveStatus::kOptimal;
    if (!rel.feasible && rel.result.status != SolveStatus::kInfeasible) {
      throw NumericalError("concave relaxation ended with status " + ToString(rel.result.status));
    }
    return rel;
  }

  Relaxation SolveSecant(const Box& box) const {
    LinearProgram lp = WithBox(box);
    double offset = lp.objective_offset();
    for (size_t t = 0; t < vars_.size(); ++t) {
      const double lo = box.lo[t], hi = box.hi[t];
      const double slope = hi > lo ? (Charge(hi) - Charge(lo)) / (hi - lo) : 0.0;
      lp.set_cost(vars_[t], lp.cost(vars_[t]) + slope);
      offset += Charge(lo) - slope * lo;
    }
    lp.set_objective_offset(offset);
    return Solve(lp);
  }

  double TrueValue(const std::vector<double>& x) const {
    double value = model_.base.program.Objective(x);
    for (int v : vars_) value += Charge(std::max(0.0, x[v]));
    return value;
  }

  void Offer(const std::vector<double>& x) {
    const double value = TrueValue(x);
    if (value < best_value_ - 1e-12) {
      best_value_ = value;
      best_x_ = x;
      have_best_ = true;
    }
  }

  // Minimizes successive tangent majorizers of the concave charge.
  void Polish(const Box& box, const SimplexResult& start) {
    std::vector<double> x = start.x;
    std::vector<BasisStatus> basis = start.basis;
    for (int pass = 0; pass < options_.polish_iterations; ++pass) {
      LinearProgram lp = WithBox(box);
      double offset = lp.objective_offset();
      for (int v : vars_) {
        const double y0 = std::max(0.0, x[v]);
        const double slope = 1.0 / ((y0 + 1.0) * (y0 + 1.0));
        lp.set_cost(v, lp.cost(v) + slope);
        offset += Charge(y0) - slope * y0;
      }
      lp.set_objective_offset(offset);
      const Relaxation rel = Solve(lp, basis.empty() ? nullptr : &basis);
      if (!rel.feasible) return;
      const double before = TrueValue(x);
      x = rel.result.x;
      basis = rel.result.basis;
      Offer(x);
      if (TrueValue(x) >= before - options_.gap_tolerance) return;
    }
  }

  const ConcaveModel& model_;
  const ConcaveOptions& options_;
  std::vector<int> vars_;
  std::vector<double> caps_;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::vector<double> best_x_;
  bool have_best_ = false;
  mutable int64_t iterations_ = 0;
};

}  // namespace

ConcaveModel BuildConcaveModel(const Instance& instance, const EpochState* prev,
                               const std::set<CacheItem>& free_pairs) {
  ConcaveModel model{BuildTauLpAuto(instance), {}};
  for (const auto& [key, var] : model.base.y_var) {
    (void)var;
    if (free_pairs.count(key)) continue;
    if (prev != nullptr && prev->Holds(key.first, key.second)) continue;
    model.chargeable.insert(key);
  }
  return model;
}

double ConcaveObjective(const ConcaveModel& model, const FractionalSolution& sol) {
  double value = sol.server_flow();
  for (const CacheItem& key : model.chargeable) value += Charge(sol.y(key.first, key.second));
  return value;
}

ConcaveResult SolveConcave(const ConcaveModel& model, const ConcaveOptions& options) {
  return ConcaveSolver(model, options).Run();
}

}  // namespace coopcache
