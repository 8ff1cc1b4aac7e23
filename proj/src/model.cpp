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

#include "coopcache/model.hpp"

#include <algorithm>
#include <sstream>

namespace coopcache {

Rational Rational::Of(int64_t num, int64_t den) {
  if (den <= 0 || num < 0) {
    throw std::invalid_argument("rational must be non-negative with positive denominator");
  }
  const int64_t g = std::gcd(num, den);
  return Rational{num / g, den / g};
}

int64_t Rational::FloorTimes(int64_t k) const { return (num * k) / den; }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const __int128 lhs = static_cast<__int128>(a.num) * b.den;
  const __int128 rhs = static_cast<__int128>(b.num) * a.den;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Instance::Instance(ServerSpec server, std::vector<CacheSpec> caches, int m,
                   std::vector<Demand> demands)
    : server_(server), caches_(std::move(caches)), m_(m) {
  if (m_ < 0) throw InvalidInstance("item count must be non-negative");
  if (server_.u0 < 0 || server_.alpha0 < 0) {
    throw InvalidInstance("server caps and prices must be non-negative");
  }
  for (size_t i = 0; i < caches_.size(); ++i) {
    const CacheSpec& c = caches_[i];
    if (c.id != static_cast<int>(i) + 1) {
      throw InvalidInstance("cache ids must be 1..n in order, got " + std::to_string(c.id));
    }
    if (c.s < 0 || c.u < 0 || c.d < 0 || c.alpha < 0 || c.beta < 0) {
      throw InvalidInstance("cache " + std::to_string(c.id) + " has a negative field");
    }
  }
  std::sort(demands.begin(), demands.end());
  for (const Demand& d : demands) {
    if (d.cache < 1 || d.cache > n()) {
      throw InvalidInstance("demand references unknown cache " + std::to_string(d.cache));
    }
    if (d.item < 0 || d.item >= m_) {
      throw InvalidInstance("demand references item " + std::to_string(d.item) +
                            " outside 0.." + std::to_string(m_ - 1));
    }
    if (d.count < 0) throw InvalidInstance("negative demand count");
    if (d.count == 0) continue;
    if (!demands_.empty() && demands_.back().cache == d.cache && demands_.back().item == d.item) {
      demands_.back().count += d.count;
    } else {
      demands_.push_back(d);
    }
  }
  first_of_cache_.assign(n() + 2, demands_.size());
  for (size_t idx = demands_.size(); idx-- > 0;) {
    first_of_cache_[demands_[idx].cache] = idx;
  }
  for (int c = n(); c >= 0; --c) {
    first_of_cache_[c] = std::min(first_of_cache_[c], first_of_cache_[c + 1]);
  }
}

int64_t Instance::demand(int cache, int item) const {
  if (cache < 1 || cache > n()) return 0;
  auto begin = demands_.begin() + first_of_cache_[cache];
  auto end = demands_.begin() + first_of_cache_[cache + 1];
  auto it = std::lower_bound(begin, end, item,
                             [](const Demand& d, int k) { return d.item < k; });
  return (it != end && it->item == item) ? it->count : 0;
}

std::vector<Demand> Instance::demands_of(int cache) const {
  if (cache < 1 || cache > n()) return {};
  return {demands_.begin() + first_of_cache_[cache],
          demands_.begin() + first_of_cache_[cache + 1]};
}

int64_t Instance::total_demand() const {
  int64_t total = 0;
  for (const Demand& d : demands_) total += d.count;
  return total;
}

int64_t Instance::total_upload_caps() const {
  int64_t total = 0;
  for (const CacheSpec& c : caches_) total += c.u;
  return total;
}

Rational Instance::tau(int cache) const {
  const CacheSpec& c = this->cache(cache);
  if (c.s == 0) return Rational{0, 1};
  return Rational::Of(c.u, c.s);
}

Rational Instance::tau_max() const {
  Rational best{0, 1};
  for (const CacheSpec& c : caches_) best = std::max(best, tau(c.id));
  return best;
}

bool Instance::server_is_cheapest() const {
  return std::all_of(caches_.begin(), caches_.end(),
                     [&](const CacheSpec& c) { return server_.alpha0 < c.alpha; });
}

Instance Instance::WithDemands(std::vector<Demand> demands) const {
  return Instance(server_, caches_, m_, std::move(demands));
}

Instance Instance::WithCaches(std::vector<CacheSpec> caches) const {
  return Instance(server_, std::move(caches), m_, demands_);
}

int64_t Solution::copies(int cache, int item) const {
  auto it = y.find({cache, item});
  return it == y.end() ? 0 : it->second;
}

int64_t Solution::storage_used(int cache) const {
  int64_t total = 0;
  for (auto it = y.lower_bound({cache, 0}); it != y.end() && it->first.first == cache; ++it) {
    total += it->second;
  }
  return total;
}

int64_t Solution::distinct_items(int cache) const {
  int64_t total = 0;
  for (auto it = y.lower_bound({cache, 0}); it != y.end() && it->first.first == cache; ++it) {
    if (it->second >= 1) ++total;
  }
  return total;
}

int64_t Solution::upload(int cache) const {
  int64_t total = 0;
  for (auto it = x.lower_bound(Route{cache, 0, 0}); it != x.end() && it->first.source == cache;
       ++it) {
    if (it->first.requester != cache) total += it->second;
  }
  return total;
}

std::string Violation::Describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::kDemandShortfall:
      out << "DemandShortfall(cache " << requester << ", item " << item << ", missing " << slack
          << ")";
      break;
    case Kind::kDemandExcess:
      out << "DemandExcess(cache " << requester << ", item " << item << ", extra " << slack << ")";
      break;
    case Kind::kUnbackedRoute:
      out << "UnbackedRoute(" << source << "," << requester << "," << item << ")";
      break;
    case Kind::kBadIndex:
      out << "BadIndex(" << source << "," << requester << "," << item << ")";
      break;
    case Kind::kNegative:
      out << "Negative(" << source << "," << requester << "," << item << ", " << slack << ")";
      break;
  }
  return out.str();
}

std::vector<Violation> Validate(const Instance& instance, const Solution& sol) {
  std::vector<Violation> out;
  const int n = instance.n();
  const int m = instance.m();
  for (const auto& [key, count] : sol.y) {
    const auto [cache, item] = key;
    if (cache < 1 || cache > n || item < 0 || item >= m) {
      out.push_back({Violation::Kind::kBadIndex, cache, -1, item, 0});
    } else if (count < 0) {
      out.push_back({Violation::Kind::kNegative, cache, -1, item, count});
    }
  }
  std::map<CacheItem, int64_t> served;
  for (const auto& [route, count] : sol.x) {
    if (route.source < 0 || route.source > n || route.requester < 1 || route.requester > n ||
        route.item < 0 || route.item >= m) {
      out.push_back({Violation::Kind::kBadIndex, route.source, route.requester, route.item, 0});
      continue;
    }
    if (count < 0) {
      out.push_back({Violation::Kind::kNegative, route.source, route.requester, route.item, count});
      continue;
    }
    if (count == 0) continue;
    if (route.source != 0 && sol.copies(route.source, route.item) < 1) {
      out.push_back({Violation::Kind::kUnbackedRoute, route.source, route.requester, route.item,
                     count});
    }
    served[{route.requester, route.item}] += count;
  }
  for (const Demand& d : instance.demands()) {
    const int64_t got = served.count({d.cache, d.item}) ? served[{d.cache, d.item}] : 0;
    if (got < d.count) {
      out.push_back({Violation::Kind::kDemandShortfall, -1, d.cache, d.item, d.count - got});
    } else if (got > d.count) {
      out.push_back({Violation::Kind::kDemandExcess, -1, d.cache, d.item, got - d.count});
    }
  }
  for (const auto& [key, got] : served) {
    if (instance.demand(key.first, key.second) == 0) {
      out.push_back({Violation::Kind::kDemandExcess, -1, key.first, key.second, got});
    }
  }
  return out;
}

EpochState EpochState::Empty(int n) {
  EpochState state;
  state.held.assign(n + 1, {});
  return state;
}

bool EpochState::Holds(int cache, int item) const {
  if (cache < 0 || cache >= static_cast<int>(held.size())) return false;
  return held[cache].count(item) > 0;
}

EpochState EpochState::FromSolution(const Solution& sol, int n, int epoch) {
  EpochState state = Empty(n);
  state.epoch = epoch;
  for (const auto& [key, count] : sol.y) {
    if (count >= 1 && key.first >= 1 && key.first <= n) state.held[key.first].insert(key.second);
  }
  return state;
}

int64_t CostReport::download_penalty_total() const {
  int64_t total = 0;
  for (int64_t p : download_penalties) total += p;
  return total;
}

int64_t CostReport::total() const {
  return server_penalty + download_penalty_total() + (charge_placement ? placement_cost : 0);
}

namespace {
std::string JoinViolations(const std::vector<Violation>& violations) {
  std::string msg = "invalid solution:";
  for (size_t i = 0; i < violations.size() && i < 8; ++i) msg += " " + violations[i].Describe();
  if (violations.size() > 8) msg += " ...";
  return msg;
}
}  // namespace

InvalidSolution::InvalidSolution(std::vector<Violation> violations)
    : std::runtime_error(JoinViolations(violations)), violations_(std::move(violations)) {}

CostReport EvaluateCost(const Instance& instance, const Solution& sol, const EpochState* prev,
                        bool charge_placement) {
  std::vector<Violation> violations = Validate(instance, sol);
  if (!violations.empty()) throw InvalidSolution(std::move(violations));

  const int n = instance.n();
  CostReport report;
  report.charge_placement = charge_placement;
  report.hat_d.assign(n + 1, 0);
  report.hat_u.assign(n + 1, 0);
  report.download_penalties.assign(n + 1, 0);
  report.upload_overages.assign(n + 1, 0);

  for (const auto& [route, count] : sol.x) {
    if (route.source == route.requester) continue;  // local service is free
    report.hat_u[route.source] += count;
    report.hat_d[route.requester] += count;
  }
  report.simplified_objective = report.hat_u[0];
  const ServerSpec& server = instance.server();
  report.server_penalty = server.alpha0 * std::max<int64_t>(0, report.hat_u[0] - server.u0);
  report.upload_overages[0] = std::max<int64_t>(0, report.hat_u[0] - server.u0);
  for (const CacheSpec& c : instance.caches()) {
    report.download_penalties[c.id] = c.beta * std::max<int64_t>(0, report.hat_d[c.id] - c.d);
    report.upload_overages[c.id] = std::max<int64_t>(0, report.hat_u[c.id] - c.u);
  }
  for (const auto& [key, count] : sol.y) {
    if (count < 1) continue;
    if (prev == nullptr || !prev->Holds(key.first, key.second)) ++report.placement_cost;
  }
  return report;
}

}  // namespace coopcache
