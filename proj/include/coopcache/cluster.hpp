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

#ifndef COOPCACHE_CLUSTER_HPP_
#define COOPCACHE_CLUSTER_HPP_

#include <iosfwd>
#include <set>
#include <vector>

#include "coopcache/model.hpp"
#include "coopcache/rounding.hpp"

namespace coopcache {

// |a & b| / |a | b|, and 0 when both are empty.
double Jaccard(const std::set<int>& a, const std::set<int>& b);

struct ClusterSet {
  int k = 0;
  std::vector<std::vector<int>> clusters;  // sorted cache ids, ordered by smallest id
  std::vector<std::set<int>> requests;     // item ids demanded anywhere in the cluster
  std::vector<int> cluster_of;             // by cache id, [0] unused

  size_t size() const { return clusters.size(); }
};

// Greedy bottom-up merging by request-set similarity with cluster size <= k.
ClusterSet Cluster(const Instance& instance, int k);

// Solves each cluster's relaxation separately and rounds the union once.
PlacementResult SolveClustered(const Instance& instance, const ClusterSet& clusters,
                               const EpochState* prev, const PlacementOptions& options = {});
PlacementResult SolveClustered(const Instance& instance, int k, const EpochState* prev,
                               const PlacementOptions& options = {});

void WriteClusterCsv(std::ostream& out, const ClusterSet& clusters);

}  // namespace coopcache

#endif  // COOPCACHE_CLUSTER_HPP_
