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

#include "coopcache/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "coopcache/gap.hpp"

namespace coopcache {

namespace {

constexpr double kTol = 1e-9;

class Rounder {
 public:
  Rounder(const Instance& instance, const FractionalSolution& frac, const RoundOptions& options,
          RoundingTrace& trace)
      : instance_(instance), frac_(frac), options_(options), trace_(trace) {
    for (const auto& [route, v] : frac.xhat) {
      if (v <= kTol) continue;
      x_[route] = v;
      if (route.source > 0 && route.source != route.requester) {
        ext_[{route.source, route.item}] += v;
      }
    }
  }

  Solution Run() {
    std::map<int, std::vector<std::pair<int, double>>> small;  // item -> (cache, yhat)
    for (const auto& [key, v] : frac_.yhat) {
      if (v >= 0.5 - kTol) {
        y_[key] = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(v - kIntegralityTolerance)));
        trace_.promoted.push_back(key);
      } else if (v > kTol) {
        small[key.second].push_back({key.first, v});
      }
    }

    std::map<int, double> scaled_total;
    std::map<CacheItem, double> yprime;
    for (const auto& [k, list] : small) {
      double nhat = 0.0;
      for (const auto& [i, v] : list) nhat += v;
      trace_.nhat[k] = nhat;
      if (nhat < 0.5) {
        for (const auto& [i, v] : list) {
          trace_.closed_small.push_back({i, k});
          for (const auto& [j, amount] : ExternalFlows(i, k)) {
            const int target = Step2Target(j, k);
            Move(Route{i, j, k}, target, amount);
          }
        }
        continue;
      }
      const int64_t copies = static_cast<int64_t>(std::ceil(nhat - kIntegralityTolerance));
      trace_.ncopies[k] = copies;
      for (const auto& [i, v] : list) yprime[{i, k}] = v * static_cast<double>(copies) / nhat;
    }
    CheckCoverage("after step 2");

    GapStep(yprime);
    DisplaceLocal();
    CheckCoverage("after step 5");
    Solution sol = FinalAssignment();
    trace_.y = sol.y;
    trace_.x = sol.x;
    return sol;
  }

 private:
  double Tau(int i) const { return instance_.tau(i).value(); }

  bool IsOpen(int i, int k) const {
    auto it = y_.find({i, k});
    return it != y_.end() && it->second >= 1;
  }

  double Spare(int i, int k) const {
    auto it = ext_.find({i, k});
    const double load = it == ext_.end() ? 0.0 : it->second;
    return Tau(i) * static_cast<double>(y_.at({i, k})) - load;
  }

  std::vector<int> OpenCopies(int k) const {
    std::vector<int> open;
    for (const CacheSpec& c : instance_.caches()) {
      if (IsOpen(c.id, k)) open.push_back(c.id);
    }
    return open;
  }

  std::vector<std::pair<int, double>> ExternalFlows(int i, int k) const {
    std::vector<std::pair<int, double>> flows;
    for (auto it = x_.lower_bound(Route{i, 0, 0}); it != x_.end() && it->first.source == i; ++it) {
      if (it->first.item == k && it->first.requester != i && it->second > kTol) {
        flows.push_back({it->first.requester, it->second});
      }
    }
    return flows;
  }

  int Step2Target(int requester, int k) const {
    if (IsOpen(requester, k)) return requester;
    int best = 0;
    double best_spare = -std::numeric_limits<double>::infinity();
    for (int t : OpenCopies(k)) {
      const double spare = Spare(t, k);
      if (spare > best_spare + kTol) {
        best = t;
        best_spare = spare;
      }
    }
    return best;
  }

  void Move(const Route& from, int to, double amount) {
    if (amount <= 0.0) return;
    double& src = x_[from];
    src -= amount;
    if (src <= kTol) x_.erase(from);
    if (from.source > 0 && from.source != from.requester) ext_[{from.source, from.item}] -= amount;
    x_[Route{to, from.requester, from.item}] += amount;
    if (to > 0 && to != from.requester) ext_[{to, from.item}] += amount;
    trace_.reroutes.push_back({from.source, to, from.requester, from.item, amount});
  }

  void GapStep(const std::map<CacheItem, double>& yprime) {
    if (yprime.empty()) return;
    std::map<int, int> column_of;
    GapInput gap;
    gap.q.assign(instance_.n(), 0.0);
    for (const auto& [k, copies] : trace_.ncopies) {
      column_of[k] = static_cast<int>(gap.p.size());
      gap.p.push_back(copies);
    }
    for (const auto& [key, v] : yprime) {
      const auto [i, k] = key;
      const Cell cell{i - 1, column_of.at(k)};
      gap.zhat[cell] = v;
      gap.q[i - 1] += v;
      if (options_.mode == PlacementMode::kPlacement) {
        const bool charged = options_.chargeable == nullptr || options_.chargeable->count(key);
        gap.cost[cell] = charged ? 1.0 : 0.0;
      } else {
        auto it = x_.find(Route{i, i, k});
        gap.cost[cell] = it == x_.end() ? 0.0 : -it->second;
      }
    }
    const std::map<Cell, int64_t> z = GapRound(gap);
    for (const auto& [key, v] : yprime) {
      (void)v;
      auto it = z.find({key.first - 1, column_of.at(key.second)});
      if (it != z.end() && it->second >= 1) y_[key] = 1;
    }
    for (const auto& [key, v] : yprime) {
      (void)v;
      if (IsOpen(key.first, key.second)) continue;
      trace_.closed_gap.push_back(key);
      for (const auto& [j, amount] : ExternalFlows(key.first, key.second)) {
        Spread(Route{key.first, j, key.second}, amount);
      }
    }
    CheckCoverage("after step 4");
  }

  // Moves a closed copy's flow onto the open copies in proportion to their
  // spare capacity; overflow beyond total spare follows tau * copies.
  void Spread(const Route& from, double amount) {
    const int k = from.item;
    if (IsOpen(from.requester, k)) {
      Move(from, from.requester, amount);
      return;
    }
    const std::vector<int> open = OpenCopies(k);
    if (open.empty()) {
      Move(from, 0, amount);
      return;
    }
    std::vector<double> spare(open.size()), weight(open.size());
    double total_spare = 0.0, total_weight = 0.0;
    for (size_t t = 0; t < open.size(); ++t) {
      spare[t] = std::max(0.0, Spare(open[t], k));
      weight[t] = Tau(open[t]) * static_cast<double>(y_.at({open[t], k}));
      total_spare += spare[t];
      total_weight += weight[t];
    }
    if (total_weight <= kTol) {
      Move(from, 0, amount);
      return;
    }
    std::vector<double> share(open.size());
    if (total_spare >= amount) {
      for (size_t t = 0; t < open.size(); ++t) share[t] = amount * spare[t] / total_spare;
    } else {
      for (size_t t = 0; t < open.size(); ++t) {
        share[t] = spare[t] + (amount - total_spare) * weight[t] / total_weight;
      }
    }
    for (size_t t = 0; t < open.size(); ++t) Move(from, open[t], share[t]);
  }

  void DisplaceLocal() {
    std::vector<CacheItem> closed = trace_.closed_small;
    closed.insert(closed.end(), trace_.closed_gap.begin(), trace_.closed_gap.end());
    for (const auto& [i, k] : closed) {
      auto it = x_.find(Route{i, i, k});
      if (it == x_.end()) continue;
      const double local = it->second;
      x_.erase(it);
      const double r = static_cast<double>(instance_.demand(i, k));
      if (local >= r - kTol) {
        throw std::logic_error("closed copy carried its whole local demand");
      }
      trace_.displaced[{i, k}] = local;
      const double factor = r / (r - local);
      for (int s = 0; s <= instance_.n(); ++s) {
        auto src = x_.find(Route{s, i, k});
        if (src == x_.end()) continue;
        const double extra = src->second * (factor - 1.0);
        src->second += extra;
        if (s > 0) ext_[{s, k}] += extra;
      }
    }
  }

  Solution FinalAssignment() {
    const int n = instance_.n();
    const std::vector<Demand>& demands = instance_.demands();
    std::map<CacheItem, int> column_of;
    GapInput gap;
    gap.q.assign(2 * n + 1, 0.0);
    for (const Demand& d : demands) {
      column_of[{d.cache, d.item}] = static_cast<int>(gap.p.size());
      gap.p.push_back(d.count);
    }
    for (const auto& [route, v] : x_) {
      int row;
      if (route.source == 0) {
        row = 2 * n;
      } else if (route.source == route.requester) {
        row = n + route.source - 1;
      } else {
        row = route.source - 1;
      }
      const Cell cell{row, column_of.at({route.requester, route.item})};
      gap.zhat[cell] += v;
      gap.q[row] += v;
      if (route.source == 0) gap.cost[cell] = 1.0;
    }
    const std::map<Cell, int64_t> z = GapRound(gap);
    Solution sol;
    for (const auto& [key, v] : y_) {
      if (v >= 1) sol.y[key] = v;
    }
    for (const auto& [cell, count] : z) {
      if (count <= 0) continue;
      const Demand& d = demands[cell.second];
      int source;
      if (cell.first == 2 * n) {
        source = 0;
      } else if (cell.first >= n) {
        source = cell.first - n + 1;
      } else {
        source = cell.first + 1;
      }
      sol.x[Route{source, d.cache, d.item}] += count;
    }
    return sol;
  }

  void CheckCoverage(const char* where) const {
    std::map<CacheItem, double> got;
    for (const auto& [route, v] : x_) got[{route.requester, route.item}] += v;
    for (const Demand& d : instance_.demands()) {
      auto it = got.find({d.cache, d.item});
      const double have = it == got.end() ? 0.0 : it->second;
      if (std::abs(have - static_cast<double>(d.count)) > 1e-6 * std::max<double>(1.0, d.count)) {
        std::ostringstream msg;
        msg << "demand (" << d.cache << "," << d.item << ") covered " << have << " of " << d.count
            << " " << where;
        throw std::logic_error(msg.str());
      }
    }
  }

  const Instance& instance_;
  const FractionalSolution& frac_;
  const RoundOptions& options_;
  RoundingTrace& trace_;
  std::map<CacheItem, int64_t> y_;
  std::map<Route, double> x_;
  std::map<CacheItem, double> ext_;
};

}  // namespace

std::vector<int> TopKItems(const Instance& instance, int cache) {
  std::vector<Demand> ds = instance.demands_of(cache);
  std::stable_sort(ds.begin(), ds.end(),
                   [](const Demand& a, const Demand& b) { return a.count > b.count; });
  const size_t keep = std::min<size_t>(ds.size(), static_cast<size_t>(instance.cache(cache).s));
  std::vector<int> items;
  for (size_t t = 0; t < keep; ++t) items.push_back(ds[t].item);
  std::sort(items.begin(), items.end());
  return items;
}

Solution Round(const Instance& instance, const FractionalSolution& frac,
               const RoundOptions& options, RoundingTrace* trace) {
  RoundingTrace local;
  RoundingTrace& t = trace != nullptr ? *trace : local;
  t = RoundingTrace{};
  return Rounder(instance, frac, options, t).Run();
}

std::string RoundingTrace::Dump() const {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& [i, k] : promoted) out << "promoted " << i << ' ' << k << '\n';
  for (const auto& [k, v] : nhat) out << "nhat " << k << ' ' << v << '\n';
  for (const auto& [k, v] : ncopies) out << "ncopies " << k << ' ' << v << '\n';
  for (const auto& [i, k] : closed_small) out << "closed_small " << i << ' ' << k << '\n';
  for (const auto& [i, k] : closed_gap) out << "closed_gap " << i << ' ' << k << '\n';
  for (const Reroute& r : reroutes) {
    out << "reroute " << r.from << ' ' << r.to << ' ' << r.requester << ' ' << r.item << ' '
        << r.amount << '\n';
  }
  for (const auto& [key, v] : displaced) {
    out << "displaced " << key.first << ' ' << key.second << ' ' << v << '\n';
  }
  for (const auto& [key, v] : y) out << "y " << key.first << ' ' << key.second << ' ' << v << '\n';
  for (const auto& [route, v] : x) {
    out << "x " << route.source << ' ' << route.requester << ' ' << route.item << ' ' << v << '\n';
  }
  return out.str();
}

RoundingTrace RoundingTrace::Parse(const std::string& text) {
  RoundingTrace t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    int a = 0, b = 0, c = 0, d = 0;
    double v = 0.0;
    int64_t count = 0;
    if (tag == "promoted" && fields >> a >> b) {
      t.promoted.push_back({a, b});
    } else if (tag == "nhat" && fields >> a >> v) {
      t.nhat[a] = v;
    } else if (tag == "ncopies" && fields >> a >> count) {
      t.ncopies[a] = count;
    } else if (tag == "closed_small" && fields >> a >> b) {
      t.closed_small.push_back({a, b});
    } else if (tag == "closed_gap" && fields >> a >> b) {
      t.closed_gap.push_back({a, b});
    } else if (tag == "reroute" && fields >> a >> b >> c >> d >> v) {
      t.reroutes.push_back({a, b, c, d, v});
    } else if (tag == "displaced" && fields >> a >> b >> v) {
      t.displaced[{a, b}] = v;
    } else if (tag == "y" && fields >> a >> b >> count) {
      t.y[{a, b}] = count;
    } else if (tag == "x" && fields >> a >> b >> c >> count) {
      t.x[Route{a, b, c}] = count;
    } else {
      throw std::invalid_argument("bad trace line " + std::to_string(lineno) + ": " + line);
    }
  }
  return t;
}

Solution RoundingTrace::Replay() const {
  Solution sol;
  sol.y = y;
  sol.x = x;
  return sol;
}

std::vector<double> CopyLoads(double load, const Rational& tau) {
  if (load <= 0.0) return {0.0};
  const double t = tau.value();
  if (t <= 0.0) throw std::invalid_argument("external load on a cache with tau = 0");
  // Exact ceiling for integral loads and rational tau.
  const int64_t whole = static_cast<int64_t>(std::llround(load));
  int64_t copies;
  if (std::abs(load - static_cast<double>(whole)) < 1e-9) {
    const __int128 num = static_cast<__int128>(whole) * tau.den;
    copies = static_cast<int64_t>((num + tau.num - 1) / tau.num);
  } else {
    copies = static_cast<int64_t>(std::ceil(load / t - 1e-12));
  }
  std::vector<double> loads;
  double left = load;
  for (int64_t c = 0; c < copies; ++c) {
    const double take = std::min(t, left);
    loads.push_back(take);
    left -= take;
  }
  return loads;
}

Solution TauExpand(const Solution& sol, const Instance& instance) {
  Solution out = sol;
  for (auto& [key, copies] : out.y) {
    if (copies <= 0) continue;
    double load = 0.0;
    for (auto it = sol.x.lower_bound(Route{key.first, 0, 0});
         it != sol.x.end() && it->first.source == key.first; ++it) {
      if (it->first.item == key.second && it->first.requester != key.first) {
        load += static_cast<double>(it->second);
      }
    }
    copies = static_cast<int64_t>(CopyLoads(load, instance.tau(key.first)).size());
  }
  return out;
}

Solution Clamp(const Solution& sol) {
  Solution out = sol;
  for (auto& [key, copies] : out.y) copies = std::min<int64_t>(copies, 1);
  return out;
}

ResidualProblem ReserveTopItems(const Instance& instance) {
  ResidualProblem problem;
  std::set<CacheItem> reserved;
  for (const CacheSpec& c : instance.caches()) {
    std::vector<int> items = TopKItems(instance, c.id);
    for (int k : items) reserved.insert({c.id, k});
    if (!items.empty()) problem.reserved[c.id] = std::move(items);
  }
  std::vector<Demand> rest;
  for (const Demand& d : instance.demands()) {
    if (!reserved.count({d.cache, d.item})) rest.push_back(d);
  }
  problem.residual = instance.WithDemands(std::move(rest));
  problem.free_pairs = std::move(reserved);
  return problem;
}

PlacementResult FinishPlacement(const Instance& instance, const EpochState* prev,
                                const ResidualProblem& problem, FractionalSolution frac,
                                double fractional_objective, PlacementMode mode) {
  auto charged = [&](const CacheItem& key) {
    if (problem.free_pairs.count(key)) return false;
    return prev == nullptr || !prev->Holds(key.first, key.second);
  };
  std::set<CacheItem> chargeable;
  for (const auto& [key, v] : frac.yhat) {
    (void)v;
    if (charged(key)) chargeable.insert(key);
  }
  PlacementResult result;
  RoundOptions round_options{mode, &chargeable};
  const Solution tau_form = Round(problem.residual, frac, round_options, &result.trace);
  Solution sol = Clamp(tau_form);

  result.rounded_objective = static_cast<double>(sol.server_requests());
  if (mode == PlacementMode::kPlacement) {
    for (const auto& [key, copies] : sol.y) {
      if (copies >= 1 && charged(key)) result.rounded_objective += 1.0;
    }
  }
  for (const auto& [i, items] : problem.reserved) {
    for (int k : items) {
      sol.y[{i, k}] = 1;
      sol.x[Route{i, i, k}] = instance.demand(i, k);
    }
  }
  result.cost = EvaluateCost(instance, sol, prev, mode == PlacementMode::kPlacement);
  result.solution = std::move(sol);
  result.reserved = problem.reserved;
  result.fractional = std::move(frac);
  result.fractional_objective = fractional_objective;
  return result;
}

PlacementResult DataPlacement(const Instance& instance, const EpochState* prev,
                              const PlacementOptions& options) {
  const ResidualProblem problem = ReserveTopItems(instance);
  if (options.mode == PlacementMode::kServing) {
    const LpModel model = BuildTauLpAuto(problem.residual);
    FractionalSolution frac = SolveLp(model, options.simplex);
    const double value = frac.objective_value;
    return FinishPlacement(instance, prev, problem, std::move(frac), value, options.mode);
  }
  const ConcaveModel model = BuildConcaveModel(problem.residual, prev, problem.free_pairs);
  ConcaveResult concave = SolveConcave(model, options.concave);
  const double value = concave.solution.objective_value;
  PlacementResult result =
      FinishPlacement(instance, prev, problem, concave.solution, value, options.mode);
  result.concave = std::move(concave);
  return result;
}

}  // namespace coopcache
