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

#include "coopcache/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coopcache {

namespace {

constexpr double kSnap = 1e-9;
constexpr double kInputTolerance = 1e-6;

double SnapToInteger(double v) {
  const double r = std::round(v);
  return std::abs(v - r) <= kSnap ? r : v;
}

bool IsIntegral(double v) { return std::abs(v - std::round(v)) <= kSnap; }

struct Edge {
  int a;  // row node
  int b;  // column or sink node
  double value;
  double cost;
  int row;
  int col;  // -1 for the slack edge
};

class CycleCanceler {
 public:
  CycleCanceler(std::vector<Edge> edges, int num_nodes)
      : edges_(std::move(edges)), adj_(num_nodes), pos_(num_nodes, -1) {
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
      edges_[e].value = SnapToInteger(edges_[e].value);
      if (IsIntegral(edges_[e].value)) continue;
      adj_[edges_[e].a].push_back(e);
      adj_[edges_[e].b].push_back(e);
    }
  }

  std::vector<Edge> Run() {
    size_t next = 0;
    while (true) {
      if (nodes_.empty()) {
        while (next < edges_.size() && IsIntegral(edges_[next].value)) ++next;
        if (next == edges_.size()) break;
        Push(edges_[next].a, -1);
      }
      const int u = nodes_.back();
      const int prev = path_.empty() ? -1 : path_.back();
      const int e = NextEdge(u, prev);
      if (e < 0) {
        // Only possible through round-off: the lone fractional edge is
        // within tolerance of an integer.
        if (prev < 0) {
          Reset();
          continue;
        }
        Edge& stuck = edges_[prev];
        if (std::abs(stuck.value - std::round(stuck.value)) > kInputTolerance) {
          throw GapInfeasible("fractional support has a dangling edge; totals not integral");
        }
        stuck.value = std::round(stuck.value);
        Reset();
        continue;
      }
      const int v = edges_[e].a == u ? edges_[e].b : edges_[e].a;
      if (pos_[v] < 0) {
        Push(v, e);
        continue;
      }
      std::vector<int> cycle(path_.begin() + pos_[v], path_.end());
      cycle.push_back(e);
      Cancel(cycle);
      // Keep the path prefix up to the first edge that became integral.
      size_t keep = path_.size();
      for (size_t t = pos_[v]; t < path_.size(); ++t) {
        if (IsIntegral(edges_[path_[t]].value)) {
          keep = t;
          break;
        }
      }
      while (path_.size() > keep) {
        path_.pop_back();
        pos_[nodes_.back()] = -1;
        nodes_.pop_back();
      }
    }
    for (Edge& edge : edges_) edge.value = std::round(edge.value);
    return std::move(edges_);
  }

 private:
  void Push(int node, int edge) {
    pos_[node] = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (edge >= 0) path_.push_back(edge);
  }

  void Reset() {
    for (int node : nodes_) pos_[node] = -1;
    nodes_.clear();
    path_.clear();
  }

  int NextEdge(int u, int prev) {
    std::vector<int>& list = adj_[u];
    for (size_t t = 0; t < list.size();) {
      const int e = list[t];
      if (IsIntegral(edges_[e].value)) {
        list[t] = list.back();
        list.pop_back();
        continue;
      }
      if (e != prev) return e;
      ++t;
    }
    return -1;
  }

  void Cancel(const std::vector<int>& cycle) {
    double signed_cost = 0.0;
    for (size_t t = 0; t < cycle.size(); ++t) {
      signed_cost += (t % 2 == 0 ? 1.0 : -1.0) * edges_[cycle[t]].cost;
    }
    const double dir = signed_cost <= 0.0 ? 1.0 : -1.0;
    double eps = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < cycle.size(); ++t) {
      const double v = edges_[cycle[t]].value;
      const double s = dir * (t % 2 == 0 ? 1.0 : -1.0);
      eps = std::min(eps, s > 0 ? std::ceil(v) - v : v - std::floor(v));
    }
    for (size_t t = 0; t < cycle.size(); ++t) {
      Edge& edge = edges_[cycle[t]];
      const double s = dir * (t % 2 == 0 ? 1.0 : -1.0);
      edge.value = SnapToInteger(edge.value + s * eps);
    }
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> pos_;
  std::vector<int> nodes_;
  std::vector<int> path_;
};

}  // namespace

std::map<Cell, int64_t> GapRound(const GapInput& input) {
  const int rows = static_cast<int>(input.q.size());
  const int cols = static_cast<int>(input.p.size());
  std::vector<double> load(rows, 0.0), column(cols, 0.0);
  std::vector<Edge> edges;
  for (const auto& [cell, v] : input.zhat) {
    const auto [i, j] = cell;
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw GapInfeasible("cell (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    }
    if (v < -kInputTolerance) throw GapInfeasible("negative fractional entry");
    if (v <= 0.0) continue;
    load[i] += v;
    column[j] += v;
    auto c = input.cost.find(cell);
    edges.push_back({i, rows + j, v, c == input.cost.end() ? 0.0 : c->second, i, j});
  }
  for (int j = 0; j < cols; ++j) {
    if (input.p[j] < 0 || std::abs(column[j] - static_cast<double>(input.p[j])) >
                              kInputTolerance * std::max(1.0, static_cast<double>(input.p[j]))) {
      throw GapInfeasible("column " + std::to_string(j) + " sums to " + std::to_string(column[j]) +
                          ", expected " + std::to_string(input.p[j]));
    }
  }
  const int sink = rows + cols;
  for (int i = 0; i < rows; ++i) {
    if (load[i] > input.q[i] + kInputTolerance * std::max(1.0, input.q[i])) {
      throw GapInfeasible("row " + std::to_string(i) + " load " + std::to_string(load[i]) +
                          " exceeds capacity " + std::to_string(input.q[i]));
    }
    const double top = std::ceil(SnapToInteger(load[i]));
    const double slack = top - load[i];
    if (slack > kSnap) edges.push_back({i, sink, slack, 0.0, i, -1});
  }
  std::vector<Edge> done = CycleCanceler(std::move(edges), rows + cols + 1).Run();
  std::map<Cell, int64_t> z;
  for (const Edge& edge : done) {
    if (edge.col < 0 || edge.value <= 0.0) continue;
    z[{edge.row, edge.col}] += static_cast<int64_t>(edge.value);
  }
  return z;
}

double GapCost(const std::map<Cell, double>& cost, const std::map<Cell, double>& z) {
  double total = 0.0;
  for (const auto& [cell, v] : z) {
    auto it = cost.find(cell);
    if (it != cost.end()) total += it->second * v;
  }
  return total;
}

double GapCost(const std::map<Cell, double>& cost, const std::map<Cell, int64_t>& z) {
  double total = 0.0;
  for (const auto& [cell, v] : z) {
    auto it = cost.find(cell);
    if (it != cost.end()) total += it->second * static_cast<double>(v);
  }
  return total;
}

}  // namespace coopcache
