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

#include "coopcache/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coopcache {

namespace {

constexpr double kDropBelow = 1e-12;

std::set<int> DemandedItems(const Instance& instance) {
  std::set<int> items;
  for (const Demand& d : instance.demands()) items.insert(d.item);
  return items;
}

std::string Name(const char* prefix, int a, int b, int c = -1) {
  std::string s = std::string(prefix) + "_" + std::to_string(a) + "_" + std::to_string(b);
  if (c >= 0) s += "_" + std::to_string(c);
  return s;
}

LpModel CommonSkeleton(const Instance& instance, LpForm form) {
  LpModel model;
  model.form = form;
  model.n = instance.n();
  model.m = instance.m();
  model.demands = instance.demands();
  model.tau.assign(instance.n() + 1, Rational{0, 1});
  model.storage.assign(instance.n() + 1, 0);
  for (const CacheSpec& c : instance.caches()) {
    model.tau[c.id] = instance.tau(c.id);
    model.storage[c.id] = c.s;
  }
  const std::set<int> items = DemandedItems(instance);
  for (const CacheSpec& c : instance.caches()) {
    for (int k : items) {
      model.y_var[{c.id, k}] =
          model.program.AddVariable(0.0, kInfinity, 0.0, Name("y", c.id, k));
    }
  }
  return model;
}

void AddStorageRows(const Instance& instance, LpModel& model) {
  for (const CacheSpec& c : instance.caches()) {
    const int row = model.program.AddRow(-kInfinity, static_cast<double>(c.s),
                                         "storage_" + std::to_string(c.id));
    for (auto it = model.y_var.lower_bound({c.id, 0});
         it != model.y_var.end() && it->first.first == c.id; ++it) {
      model.program.AddCoefficient(row, it->second, 1.0);
    }
  }
}

}  // namespace

double FractionalSolution::y(int cache, int item) const {
  auto it = yhat.find({cache, item});
  return it == yhat.end() ? 0.0 : it->second;
}

double FractionalSolution::x(int source, int requester, int item) const {
  auto it = xhat.find(Route{source, requester, item});
  return it == xhat.end() ? 0.0 : it->second;
}

double FractionalSolution::server_flow() const {
  double total = 0.0;
  for (auto it = xhat.begin(); it != xhat.end() && it->first.source == 0; ++it) {
    total += it->second;
  }
  return total;
}

LpModel BuildTauLp(const Instance& instance) {
  LpModel model = CommonSkeleton(instance, LpForm::kFull);
  LinearProgram& lp = model.program;
  const int n = instance.n();

  for (const Demand& d : instance.demands()) {
    const double r = static_cast<double>(d.count);
    for (int i = 0; i <= n; ++i) {
      model.x_var[Route{i, d.cache, d.item}] =
          lp.AddVariable(0.0, r, i == 0 ? 1.0 : 0.0, Name("x", i, d.cache, d.item));
    }
  }
  // Per-copy external service: sum_{j != i} x_ijk <= tau_i * y_ik.
  for (const auto& [key, yv] : model.y_var) {
    const auto [i, k] = key;
    const int row = lp.AddRow(-kInfinity, 0.0, Name("copy", i, k));
    lp.AddCoefficient(row, yv, -model.tau[i].value());
    for (const Demand& d : instance.demands()) {
      if (d.item != k || d.cache == i) continue;
      lp.AddCoefficient(row, model.x_var.at(Route{i, d.cache, k}), 1.0);
    }
  }
  AddStorageRows(instance, model);
  for (const Demand& d : instance.demands()) {
    const int row = lp.AddRow(static_cast<double>(d.count), static_cast<double>(d.count),
                              Name("cover", d.cache, d.item));
    for (int i = 0; i <= n; ++i) lp.AddCoefficient(row, model.x_var.at(Route{i, d.cache, d.item}), 1.0);
  }
  // Backing: x_ijk <= r_jk * y_ik for cache sources.
  for (const Demand& d : instance.demands()) {
    for (int i = 1; i <= n; ++i) {
      const int row = lp.AddRow(-kInfinity, 0.0, Name("back", i, d.cache, d.item));
      lp.AddCoefficient(row, model.x_var.at(Route{i, d.cache, d.item}), 1.0);
      lp.AddCoefficient(row, model.y_var.at({i, d.item}), -static_cast<double>(d.count));
    }
  }
  return model;
}

bool CompactFormIsExact(const Instance& instance) {
  const Rational tau_max = instance.tau_max();
  for (const Demand& d : instance.demands()) {
    if (Rational{d.count, 1} < tau_max) return false;
  }
  return true;
}

LpModel BuildCompactTauLp(const Instance& instance) {
  if (!CompactFormIsExact(instance)) {
    throw std::invalid_argument("compact tau-LP needs tau_i <= r_jk for every demand");
  }
  LpModel model = CommonSkeleton(instance, LpForm::kCompact);
  LinearProgram& lp = model.program;
  double offset = 0.0;
  for (const Demand& d : instance.demands()) {
    const double r = static_cast<double>(d.count);
    offset += r;
    model.local_var[{d.cache, d.item}] =
        lp.AddVariable(0.0, r, -1.0, Name("local", d.cache, d.item));
    model.import_var[{d.cache, d.item}] =
        lp.AddVariable(0.0, r, -1.0, Name("import", d.cache, d.item));
  }
  lp.set_objective_offset(offset);
  for (const auto& [key, yv] : model.y_var) {
    (void)yv;
    model.export_var[key] =
        lp.AddVariable(0.0, kInfinity, 0.0, Name("export", key.first, key.second));
  }
  for (const auto& [key, yv] : model.y_var) {
    if (!model.total_var.count(key.second)) {
      model.total_var[key.second] =
          lp.AddVariable(0.0, kInfinity, 0.0, "flow_" + std::to_string(key.second));
    }
  }
  for (const auto& [key, yv] : model.y_var) {
    const int row = lp.AddRow(-kInfinity, 0.0, Name("copy", key.first, key.second));
    lp.AddCoefficient(row, model.export_var.at(key), 1.0);
    lp.AddCoefficient(row, yv, -model.tau[key.first].value());
  }
  AddStorageRows(instance, model);
  for (const Demand& d : instance.demands()) {
    const CacheItem key{d.cache, d.item};
    const double r = static_cast<double>(d.count);
    int row = lp.AddRow(-kInfinity, r, Name("cover", d.cache, d.item));
    lp.AddCoefficient(row, model.local_var.at(key), 1.0);
    lp.AddCoefficient(row, model.import_var.at(key), 1.0);
    row = lp.AddRow(-kInfinity, 0.0, Name("back", d.cache, d.cache, d.item));
    lp.AddCoefficient(row, model.local_var.at(key), 1.0);
    lp.AddCoefficient(row, model.y_var.at(key), -r);
    // A cache cannot be its own external source.
    row = lp.AddRow(-kInfinity, 0.0, Name("noself", d.cache, d.item));
    lp.AddCoefficient(row, model.import_var.at(key), 1.0);
    lp.AddCoefficient(row, model.export_var.at(key), 1.0);
    lp.AddCoefficient(row, model.total_var.at(d.item), -1.0);
  }
  for (const auto& [item, tv] : model.total_var) {
    const int out_row = lp.AddRow(0.0, 0.0, "exports_" + std::to_string(item));
    const int in_row = lp.AddRow(0.0, 0.0, "imports_" + std::to_string(item));
    lp.AddCoefficient(out_row, tv, -1.0);
    lp.AddCoefficient(in_row, tv, -1.0);
    for (const auto& [key, ev] : model.export_var) {
      if (key.second == item) lp.AddCoefficient(out_row, ev, 1.0);
    }
    for (const auto& [key, gv] : model.import_var) {
      if (key.second == item) lp.AddCoefficient(in_row, gv, 1.0);
    }
  }
  return model;
}

LpModel BuildTauLpAuto(const Instance& instance) {
  return CompactFormIsExact(instance) ? BuildCompactTauLp(instance) : BuildTauLp(instance);
}

namespace {

// Splits per-item exports/imports into cache-to-cache flows with no
// self-service. Feasible whenever import_j + export_j <= total for all j.
void DecomposeTransfers(int item, std::vector<std::pair<int, double>> exports,
                        std::vector<std::pair<int, double>> imports,
                        std::map<Route, double>& xhat) {
  std::map<std::pair<int, int>, double> flow;  // (source, requester)
  size_t s = 0;
  for (auto& [j, need] : imports) {
    for (size_t pass = 0; pass < exports.size() && need > kDropBelow; ++pass) {
      auto& [i, have] = exports[(s + pass) % exports.size()];
      if (i == j || have <= kDropBelow) continue;
      const double amount = std::min(have, need);
      flow[{i, j}] += amount;
      have -= amount;
      need -= amount;
    }
    while (s < exports.size() && exports[s].second <= kDropBelow) ++s;
  }
  // Leftover can only be a cache whose remaining supply and demand are its
  // own; swap through an existing flow i -> j' to free it.
  for (auto& [j, need] : imports) {
    if (need <= kDropBelow) continue;
    double* own = nullptr;
    for (auto& [i, have] : exports) {
      if (i == j) own = &have;
    }
    for (auto it = flow.begin(); it != flow.end() && need > kDropBelow; ++it) {
      const auto [i, jp] = it->first;
      if (i == j || jp == j || it->second <= kDropBelow || own == nullptr) continue;
      const double amount = std::min({it->second, need, *own});
      if (amount <= kDropBelow) continue;
      it->second -= amount;
      flow[{i, j}] += amount;
      flow[{j, jp}] += amount;
      need -= amount;
      *own -= amount;
    }
    if (need > 1e-9) {
      throw NumericalError("transfer decomposition left " + std::to_string(need) +
                           " unassigned for item " + std::to_string(item));
    }
  }
  for (const auto& [key, amount] : flow) {
    if (amount > kDropBelow) xhat[Route{key.first, key.second, item}] += amount;
  }
}

}  // namespace

FractionalSolution ExtractFractional(const LpModel& model, const std::vector<double>& values) {
  FractionalSolution frac;
  for (const auto& [key, var] : model.y_var) {
    if (values[var] > kDropBelow) frac.yhat[key] = values[var];
  }
  if (model.form == LpForm::kFull) {
    for (const auto& [route, var] : model.x_var) {
      if (values[var] > kDropBelow) frac.xhat[route] = values[var];
    }
  } else {
    std::map<int, std::vector<std::pair<int, double>>> exports, imports;
    for (const Demand& d : model.demands) {
      const CacheItem key{d.cache, d.item};
      const double r = static_cast<double>(d.count);
      const double local = values[model.local_var.at(key)];
      const double in = values[model.import_var.at(key)];
      if (local > kDropBelow) frac.xhat[Route{d.cache, d.cache, d.item}] = local;
      const double server = std::max(0.0, r - local - in);
      if (server > kDropBelow) frac.xhat[Route{0, d.cache, d.item}] = server;
      if (in > kDropBelow) imports[d.item].push_back({d.cache, in});
    }
    for (const auto& [key, var] : model.export_var) {
      if (values[var] > kDropBelow) exports[key.second].push_back({key.first, values[var]});
    }
    for (auto& [item, in] : imports) {
      DecomposeTransfers(item, exports[item], std::move(in), frac.xhat);
    }
  }
  frac.objective_value = frac.server_flow();
  return frac;
}

FractionalSolution SolveLp(const LpModel& model, const SimplexOptions& options) {
  const SimplexResult result = SolveSimplex(model.program, options);
  if (result.status != SolveStatus::kOptimal) {
    throw NumericalError("tau-LP solve ended with status " + ToString(result.status));
  }
  FractionalSolution frac = ExtractFractional(model, result.x);
  frac.objective_value = result.objective;
  return frac;
}

double TauLpViolation(const Instance& instance, const FractionalSolution& frac) {
  double worst = 0.0;
  std::map<CacheItem, double> external, covered;
  std::vector<double> storage(instance.n() + 1, 0.0);
  for (const auto& [key, v] : frac.yhat) {
    worst = std::max(worst, -v);
    if (key.first >= 1 && key.first <= instance.n()) storage[key.first] += v;
  }
  for (const auto& [route, v] : frac.xhat) {
    worst = std::max(worst, -v);
    const int64_t r = instance.demand(route.requester, route.item);
    if (r == 0) worst = std::max(worst, std::abs(v));
    covered[{route.requester, route.item}] += v;
    if (route.source == 0) continue;
    worst = std::max(worst, v - static_cast<double>(r) * frac.y(route.source, route.item));
    if (route.source != route.requester) external[{route.source, route.item}] += v;
  }
  for (const auto& [key, v] : external) {
    worst = std::max(worst, v - instance.tau(key.first).value() * frac.y(key.first, key.second));
  }
  for (const CacheSpec& c : instance.caches()) {
    worst = std::max(worst, storage[c.id] - static_cast<double>(c.s));
  }
  for (const Demand& d : instance.demands()) {
    auto it = covered.find({d.cache, d.item});
    const double got = it == covered.end() ? 0.0 : it->second;
    worst = std::max(worst, std::abs(got - static_cast<double>(d.count)));
  }
  return worst;
}

}  // namespace coopcache
