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

#include "coopcache/verify.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace coopcache {

Instance RandomTinyInstance(uint64_t seed, const TinyParams& params) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
  };
  const int n = static_cast<int>(pick(1, params.max_n));
  const int m = static_cast<int>(pick(1, params.max_m));
  std::vector<CacheSpec> caches;
  for (int i = 1; i <= n; ++i) {
    CacheSpec c;
    c.id = i;
    c.s = pick(0, params.max_s);
    c.u = pick(0, params.max_u);
    c.d = pick(0, 8);
    c.alpha = 2;
    c.beta = 1;
    caches.push_back(c);
  }
  const int64_t total = pick(1, params.max_total);
  std::vector<Demand> demands;
  for (int64_t t = 0; t < total; ++t) {
    demands.push_back({static_cast<int>(pick(1, n)), static_cast<int>(pick(0, m - 1)), 1});
  }
  return Instance(ServerSpec{pick(0, 3), 1}, std::move(caches), m, std::move(demands));
}

std::vector<std::string> CheckPlacementBounds(const Instance& instance,
                                              const PlacementResult& result, double factor) {
  std::vector<std::string> out;
  const double limit = factor * result.fractional_objective + 1e-6;
  if (result.rounded_objective > limit) {
    std::ostringstream os;
    os << "objective " << result.rounded_objective << " > " << factor << " x "
       << result.fractional_objective;
    out.push_back(os.str());
  }
  const double tau_max = instance.tau_max().value();
  for (const CacheSpec& c : instance.caches()) {
    const int64_t used = result.solution.storage_used(c.id);
    if (used > 5 * c.s + 2) {
      std::ostringstream os;
      os << "cache " << c.id << " storage " << used << " > 5*" << c.s << "+2";
      out.push_back(os.str());
    }
    const double up = static_cast<double>(result.solution.upload(c.id));
    if (up > 8.0 * static_cast<double>(c.u) + 4.0 * tau_max + 1e-9) {
      std::ostringstream os;
      os << "cache " << c.id << " upload " << up << " > 8*" << c.u << "+4*" << tau_max;
      out.push_back(os.str());
    }
  }
  for (const Violation& v : Validate(instance, result.solution)) out.push_back(v.Describe());
  return out;
}

namespace {

// Drops every cache-to-cache route of the residual part and sends it to the
// server instead.
void InjectFault(PlacementResult& result) {
  std::map<Route, int64_t> x;
  int64_t moved = 0;
  for (const auto& [route, amount] : result.solution.x) {
    if (route.source == route.requester) {
      x[route] += amount;
      continue;
    }
    x[Route{0, route.requester, route.item}] += amount;
    if (route.source != 0) moved += amount;
  }
  for (const auto& [key, copies] : result.trace.y) {
    (void)copies;
    const auto it = x.find(Route{key.first, key.first, key.second});
    if (it == x.end()) continue;
    x[Route{0, key.first, key.second}] += it->second;
    moved += it->second;
    x.erase(it);
  }
  result.solution.x = std::move(x);
  result.rounded_objective += static_cast<double>(moved);
}

}  // namespace

VerifyReport RunBoundSuite(int count, uint64_t seed, bool inject_fault) {
  VerifyReport report;
  report.seed = seed;
  std::mt19937_64 seeder(seed);
  for (int t = 0; t < count; ++t) {
    const uint64_t s = seeder();
    const Instance instance = RandomTinyInstance(s);
    for (PlacementMode mode : {PlacementMode::kServing, PlacementMode::kPlacement}) {
      PlacementOptions options;
      options.mode = mode;
      PlacementResult result = DataPlacement(instance, nullptr, options);
      if (inject_fault) InjectFault(result);
      const bool serving = mode == PlacementMode::kServing;
      const double factor = serving ? 8.0 : 16.0;
      for (std::string& what : CheckPlacementBounds(instance, result, factor)) {
        report.violations.push_back({s, std::string(serving ? "serving: " : "placement: ") + what});
      }
      if (result.fractional_objective > 1e-9) {
        double& worst = serving ? report.worst_serving_ratio : report.worst_placement_ratio;
        worst = std::max(worst, result.rounded_objective / result.fractional_objective);
      }
      for (const CacheSpec& c : instance.caches()) {
        if (c.s > 0) {
          report.worst_storage_factor =
              std::max(report.worst_storage_factor,
                       static_cast<double>(result.solution.storage_used(c.id)) / c.s);
        }
        if (c.u > 0) {
          report.worst_upload_factor =
              std::max(report.worst_upload_factor,
                       static_cast<double>(result.solution.upload(c.id)) / c.u);
        }
      }
    }
    ++report.instances;
  }
  return report;
}

}  // namespace coopcache
