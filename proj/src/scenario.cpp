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

#include "coopcache/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "coopcache/cluster.hpp"

namespace coopcache {

namespace {

using Rng = std::mt19937_64;

int64_t UniformInt(Rng& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

bool Chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

int PoissonCount(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

void CheckParams(const ScenarioParams& p) {
  if (p.n < 0 || p.m < 0 || p.n_users < 0 || p.n_pop_items < 0 || p.n_shares < 0 ||
      p.n_friends < 0 || p.n_assoc < 0) {
    throw std::invalid_argument("scenario counts must be non-negative");
  }
  if (p.u_min < 0 || p.u_max < p.u_min) throw std::invalid_argument("bad upload range");
  if (p.tau.num <= 0 || p.tau.den <= 0) throw std::invalid_argument("tau must be positive");
  if (p.region_size < 1) throw std::invalid_argument("region size must be positive");
}

std::vector<CacheSpec> MakeCaches(const ScenarioParams& p, int n, Rng& rng) {
  std::vector<CacheSpec> caches;
  for (int i = 1; i <= n; ++i) {
    CacheSpec c;
    c.id = i;
    c.u = UniformInt(rng, p.u_min, p.u_max);
    // ceil(u / tau) with tau = num / den.
    c.s = (c.u * p.tau.den + p.tau.num - 1) / p.tau.num;
    c.d = p.download_cap;
    c.alpha = p.alpha;
    c.beta = p.beta;
    caches.push_back(c);
  }
  return caches;
}

ServerSpec MakeServer(const ScenarioParams& p) { return ServerSpec{p.u0, p.alpha0}; }

// Users with weighted cache associations; requests go to one associated
// cache picked by weight.
struct Population {
  std::vector<std::vector<int>> caches;
  std::vector<std::vector<double>> weights;
};

int PickCache(const Population& pop, int user, Rng& rng) {
  const auto& w = pop.weights[user];
  std::discrete_distribution<size_t> pick(w.begin(), w.end());
  return pop.caches[user][pick(rng)];
}

Instance MawsCore(const ScenarioParams& p, int n, const Population& pop, Rng& rng,
                  std::vector<CacheSpec> caches) {
  const int m = p.m;
  const int users = static_cast<int>(pop.caches.size());
  const int regions = n == 0 ? 0 : (n + p.region_size - 1) / p.region_size;
  auto region_of = [&](int cache) { return (cache - 1) / p.region_size; };

  std::vector<std::vector<int>> mapped(regions);
  for (int r = 0; r < regions && m > 0; ++r) {
    std::vector<int> all(m);
    for (int k = 0; k < m; ++k) all[k] = k;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(m, p.items_per_region));
    mapped[r] = std::move(all);
  }

  std::vector<Demand> demands;
  for (int u = 0; u < users; ++u) {
    if (pop.caches[u].empty() || m == 0) continue;
    const int want = std::min(PoissonCount(rng, p.n_pop_items), m);
    std::set<int> chosen;
    for (int attempt = 0; static_cast<int>(chosen.size()) < want && attempt < 20 * want + 20; ++attempt) {
      int item;
      const int home = pop.caches[u][UniformInt(rng, 0, static_cast<int64_t>(pop.caches[u].size()) - 1)];
      const auto& local = mapped[region_of(home)];
      if (!local.empty() && Chance(rng, p.request_locality)) {
        item = local[UniformInt(rng, 0, static_cast<int64_t>(local.size()) - 1)];
      } else {
        item = static_cast<int>(UniformInt(rng, 0, m - 1));
      }
      chosen.insert(item);
    }
    for (int item : chosen) demands.push_back({PickCache(pop, u, rng), item, 1});
  }

  // Sharing: each user publishes items that friends then request.
  if (p.n_shares > 0 && p.n_friends > 0 && users > 1 && m > 0) {
    std::vector<std::vector<int>> users_at(n + 1);
    for (int u = 0; u < users; ++u) {
      for (int c : pop.caches[u]) users_at[c].push_back(u);
    }
    for (int u = 0; u < users; ++u) {
      if (pop.caches[u].empty()) continue;
      std::vector<int> shared;
      for (int t = 0; t < p.n_shares; ++t) shared.push_back(static_cast<int>(UniformInt(rng, 0, m - 1)));
      std::set<int> friends;
      for (int attempt = 0; static_cast<int>(friends.size()) < p.n_friends && attempt < 20 * p.n_friends;
           ++attempt) {
        int f;
        if (Chance(rng, p.friend_locality)) {
          const int c = pop.caches[u][UniformInt(rng, 0, static_cast<int64_t>(pop.caches[u].size()) - 1)];
          const auto& there = users_at[c];
          f = there[UniformInt(rng, 0, static_cast<int64_t>(there.size()) - 1)];
        } else {
          f = static_cast<int>(UniformInt(rng, 0, users - 1));
        }
        if (f != u && !pop.caches[f].empty()) friends.insert(f);
      }
      for (int f : friends) {
        for (int item : shared) demands.push_back({PickCache(pop, f, rng), item, 1});
      }
    }
  }
  return Instance(MakeServer(p), std::move(caches), m, std::move(demands));
}

}  // namespace

Instance GenSans(const ScenarioParams& p) {
  CheckParams(p);
  Rng rng(p.seed);
  std::vector<CacheSpec> caches = MakeCaches(p, p.n, rng);
  std::vector<Demand> demands;
  if (p.n > 0 && p.m > 0) {
    std::vector<int> all(p.m);
    for (int k = 0; k < p.m; ++k) all[k] = k;
    for (int u = 0; u < p.n_users; ++u) {
      const int cache = static_cast<int>(UniformInt(rng, 1, p.n));
      const int want = std::min(PoissonCount(rng, p.n_pop_items), p.m);
      // Partial Fisher-Yates for a uniform subset.
      for (int t = 0; t < want; ++t) {
        std::swap(all[t], all[UniformInt(rng, t, p.m - 1)]);
        demands.push_back({cache, all[t], 1});
      }
    }
  }
  return Instance(MakeServer(p), std::move(caches), p.m, std::move(demands));
}

Instance GenMaws(const ScenarioParams& p) {
  CheckParams(p);
  Rng rng(p.seed);
  std::vector<CacheSpec> caches = MakeCaches(p, p.n, rng);
  Population pop;
  pop.caches.resize(p.n_users);
  pop.weights.resize(p.n_users);
  for (int u = 0; u < p.n_users && p.n > 0; ++u) {
    const int primary = static_cast<int>(UniformInt(rng, 1, p.n));
    const int count = std::min(p.n, 1 + PoissonCount(rng, std::max(0.0, p.n_assoc - 1.0)));
    std::set<int> assoc{primary};
    // Extra associations stay near the primary cache.
    const int region_lo = (primary - 1) / p.region_size * p.region_size + 1;
    const int region_hi = std::min(p.n, region_lo + p.region_size - 1);
    for (int attempt = 0; static_cast<int>(assoc.size()) < count && attempt < 20 * count; ++attempt) {
      const bool nearby = region_hi > region_lo && attempt < 10 * count;
      assoc.insert(static_cast<int>(nearby ? UniformInt(rng, region_lo, region_hi) : UniformInt(rng, 1, p.n)));
    }
    pop.caches[u].assign(assoc.begin(), assoc.end());
    pop.weights[u].assign(assoc.size(), 1.0);
  }
  return MawsCore(p, p.n, pop, rng, std::move(caches));
}

Instance GenMawsFromTrace(const ScenarioParams& params, const std::vector<Association>& trace) {
  CheckParams(params);
  std::map<int64_t, int> cache_index, user_index;
  for (const Association& a : trace) {
    cache_index[a.cache] = 0;
    user_index[a.user] = 0;
  }
  int next = 0;
  for (auto& [id, index] : cache_index) index = ++next;
  next = 0;
  for (auto& [id, index] : user_index) index = next++;
  const int n = static_cast<int>(cache_index.size());
  Population pop;
  pop.caches.resize(user_index.size());
  pop.weights.resize(user_index.size());
  for (const Association& a : trace) {
    const int u = user_index.at(a.user);
    pop.caches[u].push_back(cache_index.at(a.cache));
    pop.weights[u].push_back(static_cast<double>(a.count));
  }
  Rng rng(params.seed);
  std::vector<CacheSpec> caches = MakeCaches(params, n, rng);
  return MawsCore(params, n, pop, rng, std::move(caches));
}

Instance Generator::Generate(uint64_t seed) const {
  ScenarioParams p = params;
  p.seed = seed;
  switch (workload) {
    case Workload::kSans: return GenSans(p);
    case Workload::kMaws: return GenMaws(p);
    case Workload::kTrace: return GenMawsFromTrace(p, trace);
  }
  throw std::logic_error("unknown workload");
}

Instance EvolveDemands(const Instance& instance, const Generator& generator, uint64_t seed,
                       std::vector<int>* replaced) {
  const int m = instance.m();
  int count = static_cast<int>(std::floor(generator.params.churn * m + 1e-9));
  if (count == 0 && m >= 20) count = 1;
  Rng rng(seed);
  std::vector<int> items(m);
  for (int k = 0; k < m; ++k) items[k] = k;
  std::shuffle(items.begin(), items.end(), rng);
  items.resize(count);
  std::sort(items.begin(), items.end());
  if (replaced != nullptr) *replaced = items;
  if (count == 0) return instance;

  // A fresh world from a derived seed supplies the new demand columns.
  const uint64_t fresh_seed = std::uniform_int_distribution<uint64_t>()(rng);
  const Instance fresh = generator.Generate(fresh_seed);
  if (fresh.n() != instance.n() || fresh.m() != m) {
    throw std::invalid_argument("generator shape does not match the instance being evolved");
  }
  const std::set<int> churned(items.begin(), items.end());
  std::vector<Demand> demands;
  for (const Demand& d : instance.demands()) {
    if (!churned.count(d.item)) demands.push_back(d);
  }
  for (const Demand& d : fresh.demands()) {
    if (churned.count(d.item)) demands.push_back(d);
  }
  return instance.WithDemands(std::move(demands));
}

std::vector<Instance> DemandStream(const Generator& generator, uint64_t seed, int epochs,
                                   bool churn) {
  std::vector<Instance> stream;
  if (epochs <= 0) return stream;
  stream.push_back(generator.Generate(seed));
  for (int t = 1; t < epochs; ++t) {
    if (!churn) {
      stream.push_back(stream.back());
      continue;
    }
    const uint64_t epoch_seed = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(t));
    stream.push_back(EvolveDemands(stream.back(), generator, epoch_seed));
  }
  return stream;
}

std::vector<Association> IngestTrace(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw TraceParseError(1, "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "user_id,cache_id,timestamp") {
    throw TraceParseError(lineno, "expected header user_id,cache_id,timestamp");
  }
  std::map<std::pair<int64_t, int64_t>, int64_t> counts;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 3 || fields[2].empty()) {
      throw TraceParseError(lineno, "expected 3 fields");
    }
    int64_t ids[2];
    for (int f = 0; f < 2; ++f) {
      size_t used = 0;
      try {
        ids[f] = std::stoll(fields[f], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != fields[f].size()) {
        throw TraceParseError(lineno, "bad integer '" + fields[f] + "'");
      }
    }
    ++counts[{ids[0], ids[1]}];
  }
  std::vector<Association> table;
  for (const auto& [key, count] : counts) table.push_back({key.first, key.second, count});
  return table;
}

std::vector<Association> IngestTraceFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path);
  return IngestTrace(in);
}

Instance PartitionInstance(const PartitionSpec& spec) {
  const int m = static_cast<int>(spec.weights.size());
  if (spec.t < 0 || spec.t >= m) throw std::invalid_argument("partition needs 0 <= t < n");
  int64_t total = 0;
  for (int64_t w : spec.weights) {
    if (w < 1) throw std::invalid_argument("partition weights must be positive");
    total += w;
  }
  // The server's free uploads are spent on the m placement fetches in the
  // original reduction; fetches are not counted here, so its cap is zero.
  ServerSpec server{0, 1};
  std::vector<CacheSpec> caches = {
      CacheSpec{1, 0, 0, 2 * total, 1, 1},
      CacheSpec{2, spec.t, total, spec.t, 1, 1},
      CacheSpec{3, m - spec.t, total, m - spec.t, 1, 1},
  };
  std::vector<Demand> demands;
  for (int k = 0; k < m; ++k) demands.push_back({1, k, 2 * spec.weights[k]});
  return Instance(server, std::move(caches), m, std::move(demands));
}

bool HasEqualPartition(const PartitionSpec& spec) {
  const int m = static_cast<int>(spec.weights.size());
  int64_t total = 0;
  for (int64_t w : spec.weights) total += w;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (std::popcount(mask) != spec.t) continue;
    int64_t sum = 0;
    for (int k = 0; k < m; ++k) {
      if ((mask >> k) & 1u) sum += spec.weights[k];
    }
    if (2 * sum == total) return true;
  }
  return false;
}

double MeanPairwiseJaccard(const Instance& instance) {
  std::vector<std::set<int>> sets;
  for (const CacheSpec& c : instance.caches()) {
    std::set<int> items;
    for (const Demand& d : instance.demands_of(c.id)) items.insert(d.item);
    sets.push_back(std::move(items));
  }
  double sum = 0.0;
  int64_t pairs = 0;
  for (size_t a = 0; a < sets.size(); ++a) {
    for (size_t b = a + 1; b < sets.size(); ++b) {
      sum += Jaccard(sets[a], sets[b]);
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

}  // namespace coopcache
