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

#ifndef COOPCACHE_GAP_HPP_
#define COOPCACHE_GAP_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coopcache {

using Cell = std::pair<int, int>;  // (row, column)

// Fractional assignment with integral column totals.
struct GapInput {
  std::vector<int64_t> p;          // column totals
  std::vector<double> q;           // row capacities
  std::map<Cell, double> zhat;     // zero cells may be omitted
  std::map<Cell, double> cost;     // optional; missing cells cost 0
};

class GapInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rounds every cell to its floor or ceiling so that column sums equal p
// exactly and row sums stay within ceil(row load). Cost does not increase.
std::map<Cell, int64_t> GapRound(const GapInput& input);

double GapCost(const std::map<Cell, double>& cost, const std::map<Cell, double>& z);
double GapCost(const std::map<Cell, double>& cost, const std::map<Cell, int64_t>& z);

}  // namespace coopcache

#endif  // COOPCACHE_GAP_HPP_
