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

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "coopcache/lp.hpp"
#include "coopcache/oracle.hpp"
#include "coopcache/simplex.hpp"
#include "coopcache/verify.hpp"
#include "test_util.hpp"

using namespace coopcache;
using coopcache::testing::Cache;
using coopcache::testing::Make;

namespace {

// Minimum over all vertices of a tiny box-bounded LP: every choice of nv
// tight constraints (row sides or variable bounds) is solved by Gaussian
// elimination and kept when feasible.
double VertexOracle(const LinearProgram& lp, bool* feasible) {
  const int nv = lp.num_variables();
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (int r = 0; r < lp.num_rows(); ++r) {
    std::vector<double> a(nv, 0.0);
    for (int j = 0; j < nv; ++j) {
      for (const auto& e : lp.column(j)) {
        if (e.row == r) a[j] += e.value;
      }
    }
    if (std::isfinite(lp.row_lower(r))) planes.push_back({a, lp.row_lower(r)});
    if (std::isfinite(lp.row_upper(r))) planes.push_back({a, lp.row_upper(r)});
  }
  for (int j = 0; j < nv; ++j) {
    std::vector<double> a(nv, 0.0);
    a[j] = 1.0;
    if (std::isfinite(lp.lower(j))) planes.push_back({a, lp.lower(j)});
    if (std::isfinite(lp.upper(j))) planes.push_back({a, lp.upper(j)});
  }
  double best = INFINITY;
  *feasible = false;
  const int np = static_cast<int>(planes.size());
  std::vector<int> pick(nv);
  std::function<void(int, int)> rec = [&](int depth, int start) {
    if (depth == nv) {
      std::vector<std::vector<double>> m(nv, std::vector<double>(nv + 1));
      for (int r = 0; r < nv; ++r) {
        for (int c = 0; c < nv; ++c) m[r][c] = planes[pick[r]].a[c];
        m[r][nv] = planes[pick[r]].b;
      }
      for (int c = 0; c < nv; ++c) {
        int piv = c;
        for (int r = c + 1; r < nv; ++r) {
          if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        }
        if (std::abs(m[piv][c]) < 1e-12) return;
        std::swap(m[piv], m[c]);
        for (int r = 0; r < nv; ++r) {
          if (r == c) continue;
          const double f = m[r][c] / m[c][c];
          for (int k = c; k <= nv; ++k) m[r][k] -= f * m[c][k];
        }
      }
      std::vector<double> x(nv);
      for (int c = 0; c < nv; ++c) x[c] = m[c][nv] / m[c][c];
      if (lp.MaxViolation(x) > 1e-9) return;
      *feasible = true;
      best = std::min(best, lp.Objective(x));
      return;
    }
    for (int p = start; p < np; ++p) {
      pick[depth] = p;
      rec(depth + 1, p + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("simplex matches vertex enumeration on random bounded programs") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(-3, 3);
  int solved = 0;
  for (int t = 0; t < 400; ++t) {
    LinearProgram lp;
    const int nv = 1 + static_cast<int>(rng() % 3);
    const int nr = 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < nv; ++j) {
      const double lo = (rng() % 4 == 0) ? -2.0 : 0.0;
      lp.AddVariable(lo, lo + 1 + static_cast<double>(rng() % 4), coef(rng));
    }
    for (int r = 0; r < nr; ++r) {
      const int kind = static_cast<int>(rng() % 3);
      const double b = coef(rng);
      if (kind == 0) lp.AddRow(-kInfinity, b);
      if (kind == 1) lp.AddRow(b, kInfinity);
      if (kind == 2) lp.AddRow(b, b);
      for (int j = 0; j < nv; ++j) {
        const int a = coef(rng);
        if (a != 0) lp.AddCoefficient(r, j, a);
      }
    }
    bool feasible = false;
    const double expected = VertexOracle(lp, &feasible);
    const SimplexResult got = SolveSimplex(lp);
    if (!feasible) {
      CHECK(got.status == SolveStatus::kInfeasible);
      continue;
    }
    REQUIRE(got.status == SolveStatus::kOptimal);
    CHECK(got.objective == doctest::Approx(expected).epsilon(1e-9));
    CHECK(got.max_violation <= 1e-7);
    ++solved;
  }
  CHECK(solved > 150);
}

TEST_CASE("simplex warm start from an optimal basis needs no iterations") {
  LinearProgram lp;
  const int a = lp.AddVariable(0, 4, -1);
  const int b = lp.AddVariable(0, 4, -2);
  const int r = lp.AddRow(-kInfinity, 5);
  lp.AddCoefficient(r, a, 1);
  lp.AddCoefficient(r, b, 1);
  const SimplexResult first = SolveSimplex(lp);
  REQUIRE(first.status == SolveStatus::kOptimal);
  CHECK(first.objective == doctest::Approx(-9));
  const SimplexResult again = SolveSimplex(lp, {}, &first.basis);
  CHECK(again.warm_started);
  CHECK(again.iterations == 0);
  CHECK(again.objective == doctest::Approx(-9));
}

TEST_CASE("lp text dump names every row") {
  LinearProgram lp;
  const int a = lp.AddVariable(0, 1, 1, "ya");
  const int r = lp.AddRow(1, kInfinity, "cover");
  lp.AddCoefficient(r, a, 1);
  std::ostringstream os;
  lp.WriteLpFormat(os);
  CHECK(os.str().find("cover_lo: + 1 ya >= 1") != std::string::npos);
}

TEST_CASE("tau-LP sizes: one cache, one item") {
  const Instance inst = Make({Cache(1, 1, 0)}, 1, {{1, 0, 3}});
  const LpModel model = BuildTauLp(inst);
  CHECK(model.y_var.size() == 1);
  CHECK(model.x_var.size() == 2);
  CHECK(model.program.num_variables() == 3);
  CHECK(model.program.num_rows() == 4);
}

TEST_CASE("tau-LP sizes: (n+1)|D| routing variables") {
  const Instance inst = Make({Cache(1, 1, 1), Cache(2, 2, 1), Cache(3, 1, 0)}, 3,
                             {{1, 0, 2}, {2, 0, 1}, {3, 2, 4}, {3, 1, 1}});
  const LpModel model = BuildTauLp(inst);
  CHECK(model.x_var.size() == 4u * 4u);
  for (const Demand& d : inst.demands()) CHECK(model.x_var.count(Route{0, d.cache, d.item}) == 1);
}

TEST_CASE("tau-LP: zero demand gives zero") {
  const Instance inst = Make({Cache(1, 1, 1)}, 2, {});
  const FractionalSolution frac = SolveLp(BuildTauLp(inst));
  CHECK(frac.objective_value == doctest::Approx(0.0));
  CHECK(frac.yhat.empty());
}

TEST_CASE("tau-LP: all-local instance costs nothing") {
  const Instance inst = Make({Cache(1, 2, 0), Cache(2, 1, 0)}, 3, {{1, 0, 4}, {1, 1, 1}, {2, 2, 6}});
  CHECK(SolveLp(BuildTauLpAuto(inst)).objective_value == doctest::Approx(0.0));
}

TEST_CASE("tau-LP: one slot, two items, no upload") {
  const Instance inst = Make({Cache(1, 1, 0)}, 2, {{1, 0, 5}, {1, 1, 2}});
  const FractionalSolution frac = SolveLp(BuildTauLp(inst));
  CHECK(frac.objective_value == doctest::Approx(2.0));
  CHECK(frac.y(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("tau-LP lies below the integral tau optimum and compact form agrees") {
  TinyParams small;
  small.max_total = 12;
  for (uint64_t seed = 0; seed < 120; ++seed) {
    const Instance inst = RandomTinyInstance(seed, small);
    const FractionalSolution full = SolveLp(BuildTauLp(inst));
    CHECK(TauLpViolation(inst, full) <= 1e-7);
    const TauOracleResult exact = ExactTauOpt(inst);
    CHECK(full.objective_value <= static_cast<double>(exact.server_requests) + 1e-7);
    if (CompactFormIsExact(inst)) {
      const FractionalSolution compact = SolveLp(BuildCompactTauLp(inst));
      CHECK(compact.objective_value == doctest::Approx(full.objective_value).epsilon(1e-9));
      CHECK(TauLpViolation(inst, compact) <= 1e-7);
    }
  }
}

TEST_CASE("tau-LP solves are deterministic") {
  const Instance inst = RandomTinyInstance(99);
  const FractionalSolution a = SolveLp(BuildTauLpAuto(inst));
  const FractionalSolution b = SolveLp(BuildTauLpAuto(inst));
  CHECK(a.yhat == b.yhat);
  CHECK(a.xhat == b.xhat);
}

TEST_CASE("concave: single item placed at its charge") {
  const Instance inst = Make({Cache(1, 1, 0)}, 1, {{1, 0, 3}});
  const ConcaveResult result = SolveConcave(BuildConcaveModel(inst, nullptr));
  CHECK(result.status == ConcaveStatus::kOptimal);
  CHECK(result.solution.objective_value == doctest::Approx(0.5));
  CHECK(result.solution.y(1, 0) == doctest::Approx(1.0));
  CHECK(result.solution.server_flow() == doctest::Approx(0.0));
}

TEST_CASE("concave: items held before are not charged") {
  const Instance inst = Make({Cache(1, 1, 0), Cache(2, 2, 1)}, 2, {{1, 0, 3}, {2, 0, 1}, {2, 1, 2}});
  EpochState prev = EpochState::Empty(2);
  prev.held[1] = {0};
  prev.held[2] = {0, 1};
  const ConcaveModel model = BuildConcaveModel(inst, &prev);
  CHECK(model.chargeable.count({1, 0}) == 0);
  CHECK(model.chargeable.count({2, 0}) == 0);
  CHECK(model.chargeable.count({2, 1}) == 0);
  const ConcaveResult result = SolveConcave(model);
  CHECK(result.solution.objective_value == doctest::Approx(0.0));
}

TEST_CASE("concave: zero demand") {
  const Instance inst = Make({Cache(1, 2, 1)}, 2, {});
  const ConcaveResult result = SolveConcave(BuildConcaveModel(inst, nullptr));
  CHECK(result.solution.objective_value == doctest::Approx(0.0));
}

TEST_CASE("concave objective of an integral point is exact") {
  const Instance inst = Make({Cache(1, 2, 1), Cache(2, 1, 0)}, 2, {{1, 0, 2}, {2, 0, 1}, {2, 1, 3}});
  const ConcaveModel model = BuildConcaveModel(inst, nullptr);
  FractionalSolution point;
  point.yhat[{1, 0}] = 2.0;
  point.yhat[{2, 1}] = 1.0;
  point.xhat[Route{1, 1, 0}] = 2.0;
  point.xhat[Route{0, 2, 0}] = 1.0;
  point.xhat[Route{2, 2, 1}] = 3.0;
  CHECK(ConcaveObjective(model, point) == doctest::Approx(1.0 + 2.0 / 3.0 + 0.5));
}

TEST_CASE("concave optimum is no worse than integral and LP points") {
  for (uint64_t seed = 200; seed < 260; ++seed) {
    const Instance inst = RandomTinyInstance(seed);
    const ConcaveModel model = BuildConcaveModel(inst, nullptr);
    const ConcaveResult result = SolveConcave(model);
    CHECK(result.lower_bound <= result.solution.objective_value + 1e-9);
    CHECK(TauLpViolation(inst, result.solution) <= 1e-7);
    if (result.status != ConcaveStatus::kOptimal) continue;
    const TauOracleResult exact = ExactTauOpt(inst);
    FractionalSolution integral;
    for (const auto& [key, c] : exact.solution.y) integral.yhat[key] = static_cast<double>(c);
    for (const auto& [r, c] : exact.solution.x) integral.xhat[r] = static_cast<double>(c);
    CHECK(result.solution.objective_value <= ConcaveObjective(model, integral) + 1e-7);
    const FractionalSolution lp = SolveLp(BuildTauLp(inst));
    CHECK(result.solution.objective_value <= ConcaveObjective(model, lp) + 1e-7);
  }
}
