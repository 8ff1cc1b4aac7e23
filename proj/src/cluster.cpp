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

#include "coopcache/cluster.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

namespace coopcache {

namespace {

size_t IntersectionSize(const std::set<int>& a, const std::set<int>& b) {
  size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

struct Similarity {
  size_t common = 0;
  size_t joint = 0;  // |a | b|

  // Exact comparison of common / joint, with 0/0 = 0.
  bool operator>(const Similarity& other) const {
    return common * std::max<size_t>(other.joint, 1) > other.common * std::max<size_t>(joint, 1);
  }
};

Similarity Measure(const std::set<int>& a, const std::set<int>& b) {
  const size_t common = IntersectionSize(a, b);
  return {common, a.size() + b.size() - common};
}

// Cluster-local instance over the given global cache ids, renumbered 1..c.
Instance SubInstance(const Instance& instance, const std::vector<int>& ids) {
  std::vector<CacheSpec> caches;
  std::vector<Demand> demands;
  for (size_t t = 0; t < ids.size(); ++t) {
    CacheSpec spec = instance.cache(ids[t]);
    spec.id = static_cast<int>(t) + 1;
    caches.push_back(spec);
    for (const Demand& d : instance.demands_of(ids[t])) {
      demands.push_back({spec.id, d.item, d.count});
    }
  }
  return Instance(instance.server(), std::move(caches), instance.m(), std::move(demands));
}

}  // namespace

double Jaccard(const std::set<int>& a, const std::set<int>& b) {
  const Similarity s = Measure(a, b);
  return s.joint == 0 ? 0.0 : static_cast<double>(s.common) / static_cast<double>(s.joint);
}

ClusterSet Cluster(const Instance& instance, int k) {
  if (k < 1) throw std::invalid_argument("cluster size must be at least 1");
  ClusterSet out;
  out.k = k;
  for (const CacheSpec& c : instance.caches()) {
    out.clusters.push_back({c.id});
    std::set<int> items;
    for (const Demand& d : instance.demands_of(c.id)) items.insert(d.item);
    out.requests.push_back(std::move(items));
  }
  while (true) {
    // Clusters stay ordered by smallest member, so the first strict maximum
    // in (a, b) scan order is the lexicographic tie-break.
    int best_a = -1, best_b = -1;
    Similarity best;
    for (size_t a = 0; a < out.clusters.size(); ++a) {
      for (size_t b = a + 1; b < out.clusters.size(); ++b) {
        if (out.clusters[a].size() + out.clusters[b].size() > static_cast<size_t>(k)) continue;
        const Similarity s = Measure(out.requests[a], out.requests[b]);
        if (best_a < 0 || s > best) {
          best = s;
          best_a = static_cast<int>(a);
          best_b = static_cast<int>(b);
        }
      }
    }
    if (best_a < 0 || best.common == 0) break;
    auto& into = out.clusters[best_a];
    into.insert(into.end(), out.clusters[best_b].begin(), out.clusters[best_b].end());
    std::sort(into.begin(), into.end());
    out.requests[best_a].insert(out.requests[best_b].begin(), out.requests[best_b].end());
    out.clusters.erase(out.clusters.begin() + best_b);
    out.requests.erase(out.requests.begin() + best_b);
  }
  out.cluster_of.assign(instance.n() + 1, -1);
  for (size_t c = 0; c < out.clusters.size(); ++c) {
    for (int id : out.clusters[c]) out.cluster_of[id] = static_cast<int>(c);
  }
  return out;
}

PlacementResult SolveClustered(const Instance& instance, const ClusterSet& clusters,
                               const EpochState* prev, const PlacementOptions& options) {
  const ResidualProblem problem = ReserveTopItems(instance);
  FractionalSolution merged;
  double objective = 0.0;
  for (const std::vector<int>& ids : clusters.clusters) {
    const Instance sub = SubInstance(problem.residual, ids);
    std::set<CacheItem> free_pairs;
    EpochState sub_prev = EpochState::Empty(static_cast<int>(ids.size()));
    for (size_t t = 0; t < ids.size(); ++t) {
      const int local = static_cast<int>(t) + 1;
      if (prev != nullptr) sub_prev.held[local] = prev->held[ids[t]];
      auto it = problem.reserved.find(ids[t]);
      if (it == problem.reserved.end()) continue;
      for (int item : it->second) free_pairs.insert({local, item});
    }
    FractionalSolution frac;
    if (options.mode == PlacementMode::kServing) {
      frac = SolveLp(BuildTauLpAuto(sub), options.simplex);
      objective += frac.objective_value;
    } else {
      const ConcaveModel model =
          BuildConcaveModel(sub, prev != nullptr ? &sub_prev : nullptr, free_pairs);
      const ConcaveResult result = SolveConcave(model, options.concave);
      frac = result.solution;
      objective += result.solution.objective_value;
    }
    for (const auto& [key, v] : frac.yhat) merged.yhat[{ids[key.first - 1], key.second}] = v;
    for (const auto& [route, v] : frac.xhat) {
      const int source = route.source == 0 ? 0 : ids[route.source - 1];
      merged.xhat[Route{source, ids[route.requester - 1], route.item}] = v;
    }
  }
  merged.objective_value = merged.server_flow();
  return FinishPlacement(instance, prev, problem, std::move(merged), objective, options.mode);
}

PlacementResult SolveClustered(const Instance& instance, int k, const EpochState* prev,
                               const PlacementOptions& options) {
  return SolveClustered(instance, Cluster(instance, k), prev, options);
}

void WriteClusterCsv(std::ostream& out, const ClusterSet& clusters) {
  out << "cache_id,cluster_id\n";
  for (size_t id = 1; id < clusters.cluster_of.size(); ++id) {
    out << id << ',' << clusters.cluster_of[id] << '\n';
  }
}

}  // namespace coopcache
