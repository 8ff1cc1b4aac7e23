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

// Sparse bounded-variable primal simplex.
//
// Rows are ranged (lower <= a.x <= upper), variables carry box bounds. The
// solver keeps one logical variable per row, factorizes the basis with a
// sparse LU and applies product-form updates between refactorizations.
// Reduced costs are updated from the pivot row each iteration. Pricing is
// segmented Dantzig with lowest-index tie breaks; after a run of
// degenerate pivots it switches to Bland's rule until progress resumes, so
// every solve terminates and is deterministic.

#ifndef COOPCACHE_SIMPLEX_HPP_
#define COOPCACHE_SIMPLEX_HPP_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace coopcache {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class LinearProgram {
 public:
  struct Entry {
    int row;
    double value;
  };

  int AddVariable(double lower, double upper, double cost, std::string name = {});
  int AddRow(double lower, double upper, std::string name = {});
  // Accumulates into an existing coefficient.
  void AddCoefficient(int row, int var, double value);

  void set_cost(int var, double cost) { cost_[var] = cost; }
  void set_bounds(int var, double lower, double upper) {
    lower_[var] = lower;
    upper_[var] = upper;
  }
  void set_objective_offset(double offset) { offset_ = offset; }

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(row_lower_.size()); }
  int64_t num_nonzeros() const;

  double cost(int var) const { return cost_[var]; }
  double lower(int var) const { return lower_[var]; }
  double upper(int var) const { return upper_[var]; }
  double row_lower(int row) const { return row_lower_[row]; }
  double row_upper(int row) const { return row_upper_[row]; }
  double objective_offset() const { return offset_; }
  const std::vector<Entry>& column(int var) const { return columns_[var]; }
  const std::string& variable_name(int var) const { return var_names_[var]; }
  const std::string& row_name(int row) const { return row_names_[row]; }

  double Objective(const std::vector<double>& x) const;
  std::vector<double> RowActivities(const std::vector<double>& x) const;
  // Largest violation of any row or variable bound.
  double MaxViolation(const std::vector<double>& x) const;

  // CPLEX LP text format, for cross-checking with external solvers.
  void WriteLpFormat(std::ostream& out) const;

 private:
  std::vector<double> cost_, lower_, upper_;
  std::vector<std::vector<Entry>> columns_;
  std::vector<double> row_lower_, row_upper_;
  std::vector<std::string> var_names_, row_names_;
  double offset_ = 0.0;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string ToString(SolveStatus status);

struct SimplexOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  int refactor_interval = 200;
  // Columns are priced in this many segments (fewer on small programs).
  int pricing_segments = 8;
  int degenerate_run_before_bland = 50;
  int64_t max_iterations = 50'000'000;
};

// Status of each structural then each row logical, as left by a solve.
enum class BasisStatus : uint8_t { kBasic, kLower, kUpper, kFree };

struct SimplexResult {
  SolveStatus status = SolveStatus::kIterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_activity;
  int64_t iterations = 0;
  double max_violation = 0.0;
  std::vector<BasisStatus> basis;  // empty unless optimal
  bool warm_started = false;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Minimizes c.x. Throws NumericalError when the final point violates a
// constraint by more than 1e-7 after refactorization.
// A warm basis from an earlier solve of a program with the same rows and
// variables is used when it is still primal feasible; otherwise ignored.
SimplexResult SolveSimplex(const LinearProgram& lp, const SimplexOptions& options = {},
                           const std::vector<BasisStatus>* warm = nullptr);

}  // namespace coopcache

#endif  // COOPCACHE_SIMPLEX_HPP_
