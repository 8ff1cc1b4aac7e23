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

#include "coopcache/simplex.hpp"

#include <klu.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace coopcache {

int LinearProgram::AddVariable(double lower, double upper, double cost, std::string name) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  columns_.emplace_back();
  var_names_.push_back(name.empty() ? "v" + std::to_string(cost_.size() - 1) : std::move(name));
  return num_variables() - 1;
}

int LinearProgram::AddRow(double lower, double upper, std::string name) {
  row_lower_.push_back(lower);
  row_upper_.push_back(upper);
  row_names_.push_back(name.empty() ? "r" + std::to_string(row_lower_.size() - 1)
                                    : std::move(name));
  return num_rows() - 1;
}

void LinearProgram::AddCoefficient(int row, int var, double value) {
  auto& col = columns_[var];
  for (Entry& e : col) {
    if (e.row == row) {
      e.value += value;
      return;
    }
  }
  col.push_back({row, value});
}

int64_t LinearProgram::num_nonzeros() const {
  int64_t total = 0;
  for (const auto& col : columns_) total += static_cast<int64_t>(col.size());
  return total;
}

double LinearProgram::Objective(const std::vector<double>& x) const {
  double total = offset_;
  for (int j = 0; j < num_variables(); ++j) total += cost_[j] * x[j];
  return total;
}

std::vector<double> LinearProgram::RowActivities(const std::vector<double>& x) const {
  std::vector<double> act(num_rows(), 0.0);
  for (int j = 0; j < num_variables(); ++j) {
    if (x[j] == 0.0) continue;
    for (const Entry& e : columns_[j]) act[e.row] += e.value * x[j];
  }
  return act;
}

double LinearProgram::MaxViolation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max({worst, lower_[j] - x[j], x[j] - upper_[j]});
  }
  const std::vector<double> act = RowActivities(x);
  for (int r = 0; r < num_rows(); ++r) {
    worst = std::max({worst, row_lower_[r] - act[r], act[r] - row_upper_[r]});
  }
  return worst;
}

void LinearProgram::WriteLpFormat(std::ostream& out) const {
  out << "Minimize\n obj:";
  bool any = false;
  for (int j = 0; j < num_variables(); ++j) {
    if (cost_[j] == 0.0) continue;
    out << (cost_[j] < 0 ? " - " : " + ") << std::abs(cost_[j]) << " " << var_names_[j];
    any = true;
  }
  if (!any) out << " 0 " << (num_variables() > 0 ? var_names_[0] : "dummy");
  out << "\nSubject To\n";
  std::vector<std::vector<std::pair<int, double>>> rows(num_rows());
  for (int j = 0; j < num_variables(); ++j) {
    for (const Entry& e : columns_[j]) rows[e.row].push_back({j, e.value});
  }
  auto write_lhs = [&](int r) {
    if (rows[r].empty()) out << " 0 " << (num_variables() > 0 ? var_names_[0] : "dummy");
    for (const auto& [j, v] : rows[r]) {
      out << (v < 0 ? " - " : " + ") << std::abs(v) << " " << var_names_[j];
    }
  };
  for (int r = 0; r < num_rows(); ++r) {
    const double lo = row_lower_[r], hi = row_upper_[r];
    if (lo == hi) {
      out << " " << row_names_[r] << ":";
      write_lhs(r);
      out << " = " << lo << "\n";
      continue;
    }
    if (std::isfinite(lo)) {
      out << " " << row_names_[r] << "_lo:";
      write_lhs(r);
      out << " >= " << lo << "\n";
    }
    if (std::isfinite(hi)) {
      out << " " << row_names_[r] << "_hi:";
      write_lhs(r);
      out << " <= " << hi << "\n";
    }
  }
  out << "Bounds\n";
  for (int j = 0; j < num_variables(); ++j) {
    out << " ";
    if (std::isfinite(lower_[j])) out << lower_[j]; else out << "-inf";
    out << " <= " << var_names_[j] << " <= ";
    if (std::isfinite(upper_[j])) out << upper_[j]; else out << "+inf";
    out << "\n";
  }
  out << "End\n";
}

std::string ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

enum class VarState : uint8_t { kBasic, kLower, kUpper, kFree };

// Strictly triangular part of a factor in compressed sparse columns.
struct Triangle {
  std::vector<int> p, i;
  std::vector<double> x;
};

Triangle Transpose(const Triangle& t, int n) {
  Triangle out;
  out.p.assign(n + 1, 0);
  for (int idx : t.i) ++out.p[idx + 1];
  for (int k = 0; k < n; ++k) out.p[k + 1] += out.p[k];
  out.i.resize(t.i.size());
  out.x.resize(t.x.size());
  std::vector<int> next(out.p.begin(), out.p.end() - 1);
  for (int j = 0; j < n; ++j) {
    for (int q = t.p[j]; q < t.p[j + 1]; ++q) {
      const int slot = next[t.i[q]]++;
      out.i[slot] = j;
      out.x[slot] = t.x[q];
    }
  }
  return out;
}

// Sparse LU of the basis. KLU factors (no block triangular form, no row
// scaling); the factors are then extracted so that solves can follow only
// the reach of a sparse right-hand side.
class BasisFactor {
 public:
  BasisFactor() {
    klu_defaults(&common_);
    common_.btf = 0;
    common_.scale = 0;
  }

  void Factor(int n, std::vector<int>& ap, std::vector<int>& ai, std::vector<double>& ax) {
    n_ = n;
    klu_symbolic* symbolic = klu_analyze(n, ap.data(), ai.data(), &common_);
    if (symbolic == nullptr) throw NumericalError("basis analysis failed");
    klu_numeric* numeric = klu_factor(ap.data(), ai.data(), ax.data(), symbolic, &common_);
    if (numeric == nullptr || common_.status != KLU_OK) {
      if (numeric != nullptr) klu_free_numeric(&numeric, &common_);
      klu_free_symbolic(&symbolic, &common_);
      throw NumericalError("basis factorization failed (KLU status " +
                           std::to_string(common_.status) + ")");
    }
    std::vector<int> lp(n + 1), li(numeric->lnz), up(n + 1), ui(numeric->unz);
    std::vector<double> lx(numeric->lnz), ux(numeric->unz);
    p_.resize(n);
    q_.resize(n);
    const int ok = klu_extract(numeric, symbolic, lp.data(), li.data(), lx.data(), up.data(),
                               ui.data(), ux.data(), nullptr, nullptr, nullptr, p_.data(),
                               q_.data(), nullptr, nullptr, &common_);
    klu_free_numeric(&numeric, &common_);
    klu_free_symbolic(&symbolic, &common_);
    if (!ok) throw NumericalError("basis factor extraction failed");

    l_ = Strict(lp, li, lx, nullptr);
    udiag_.assign(n, 0.0);
    u_ = Strict(up, ui, ux, &udiag_);
    for (double d : udiag_) {
      if (d == 0.0) throw NumericalError("singular basis");
    }
    lt_ = Transpose(l_, n);
    ut_ = Transpose(u_, n);
    pinv_.resize(n);
    qinv_.resize(n);
    for (int k = 0; k < n; ++k) {
      pinv_[p_[k]] = k;
      qinv_[q_[k]] = k;
    }
    work_.assign(n, 0.0);
    mark_.assign(n, 0);
    stamp_ = 0;
  }

  // B x = b. `v` holds b (by row) with nonzeros inside `nz`; on return it
  // holds x (by basis position) and `nz` covers its nonzeros.
  void Solve(std::vector<double>& v, std::vector<int>& nz) {
    Gather(v, nz, pinv_);
    Substitute(l_, nullptr, true);
    Substitute(u_, udiag_.data(), false);
    Scatter(v, nz, q_);
  }

  // B^T x = b, with b by basis position and x by row.
  void SolveTransposed(std::vector<double>& v, std::vector<int>& nz) {
    Gather(v, nz, qinv_);
    Substitute(ut_, udiag_.data(), true);
    Substitute(lt_, nullptr, false);
    Scatter(v, nz, p_);
  }

 private:
  static Triangle Strict(const std::vector<int>& p, const std::vector<int>& i,
                         const std::vector<double>& x, std::vector<double>* diag) {
    Triangle t;
    const int n = static_cast<int>(p.size()) - 1;
    t.p.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) {
      for (int q = p[j]; q < p[j + 1]; ++q) {
        if (i[q] == j) {
          if (diag != nullptr) (*diag)[j] = x[q];
          continue;
        }
        t.i.push_back(i[q]);
        t.x.push_back(x[q]);
      }
      t.p[j + 1] = static_cast<int>(t.i.size());
    }
    return t;
  }

  void Gather(std::vector<double>& v, const std::vector<int>& nz, const std::vector<int>& perm) {
    list_.clear();
    for (int r : nz) {
      if (v[r] == 0.0) continue;
      const int k = perm[r];
      work_[k] = v[r];
      v[r] = 0.0;
      list_.push_back(k);
    }
  }

  void Scatter(std::vector<double>& v, std::vector<int>& nz, const std::vector<int>& perm) {
    nz.clear();
    for (int k : list_) {
      if (work_[k] == 0.0) continue;
      const int r = perm[k];
      v[r] = work_[k];
      work_[k] = 0.0;
      nz.push_back(r);
    }
  }

  // Column-oriented triangular solve on work_ restricted to list_. Dense
  // sweeps are used once the right-hand side is no longer sparse.
  void Substitute(const Triangle& t, const double* diag, bool lower) {
    if (list_.size() * 10 > static_cast<size_t>(n_)) {
      order_.clear();
      for (int s = 0; s < n_; ++s) {
        const int j = lower ? s : n_ - 1 - s;
        double xj = work_[j];
        if (xj == 0.0) continue;
        if (diag != nullptr) xj /= diag[j];
        work_[j] = xj;
        order_.push_back(j);
        for (int q = t.p[j]; q < t.p[j + 1]; ++q) work_[t.i[q]] -= t.x[q] * xj;
      }
      list_.swap(order_);
      return;
    }
    Reach(t);
    for (int j : order_) {
      double xj = work_[j];
      if (xj == 0.0) continue;
      if (diag != nullptr) xj /= diag[j];
      work_[j] = xj;
      for (int q = t.p[j]; q < t.p[j + 1]; ++q) work_[t.i[q]] -= t.x[q] * xj;
    }
    list_.swap(order_);
  }

  // Nodes reachable from list_ in the graph of t, in topological order.
  void Reach(const Triangle& t) {
    if (++stamp_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      stamp_ = 1;
    }
    order_.clear();
    for (int s : list_) {
      if (mark_[s] == stamp_) continue;
      mark_[s] = stamp_;
      stack_.assign(1, {s, t.p[s]});
      while (!stack_.empty()) {
        auto& [j, q] = stack_.back();
        bool descended = false;
        while (q < t.p[j + 1]) {
          const int i = t.i[q++];
          if (mark_[i] == stamp_) continue;
          mark_[i] = stamp_;
          stack_.push_back({i, t.p[i]});
          descended = true;
          break;
        }
        if (!descended) {
          order_.push_back(stack_.back().first);
          stack_.pop_back();
        }
      }
    }
    std::reverse(order_.begin(), order_.end());
  }

  klu_common common_;
  int n_ = 0;
  Triangle l_, u_, lt_, ut_;
  std::vector<double> udiag_;
  std::vector<int> p_, q_, pinv_, qinv_;
  std::vector<double> work_;
  std::vector<int> list_, order_;
  std::vector<unsigned> mark_;
  unsigned stamp_ = 0;
  std::vector<std::pair<int, int>> stack_;
};

struct Eta {
  int pivot_row;
  double pivot;
  std::vector<std::pair<int, double>> others;  // (row, w_row), row != pivot_row
};

// Working copy of the problem in the form [A -I art] z = 0.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt)
      : lp_(lp), opt_(opt), m_(lp.num_rows()), nv_(lp.num_variables()) {
    row_start_.assign(m_ + 1, 0);
    for (int j = 0; j < nv_; ++j) {
      for (const auto& e : lp_.column(j)) ++row_start_[e.row + 1];
    }
    for (int r = 0; r < m_; ++r) row_start_[r + 1] += row_start_[r];
    row_col_.resize(row_start_[m_]);
    row_val_.resize(row_start_[m_]);
    std::vector<int> next(row_start_.begin(), row_start_.end() - 1);
    for (int j = 0; j < nv_; ++j) {
      for (const auto& e : lp_.column(j)) {
        row_col_[next[e.row]] = j;
        row_val_[next[e.row]++] = e.value;
      }
    }
  }

  SimplexResult Run(const std::vector<BasisStatus>* warm);

 private:
  int total() const { return static_cast<int>(lo_.size()); }

  template <typename Fn>
  void ForEachEntry(int j, Fn&& fn) const {
    if (j < nv_) {
      for (const auto& e : lp_.column(j)) fn(e.row, e.value);
    } else if (j < nv_ + m_) {
      fn(j - nv_, -1.0);
    } else {
      const Artificial& a = artificials_[j - nv_ - m_];
      fn(a.row, a.sign);
    }
  }

  void Setup();
  bool SetupFromBasis(const std::vector<BasisStatus>& warm);
  void Refactor();
  void Ftran(std::vector<double>& v, std::vector<int>& nz);
  void Btran(std::vector<double>& v, std::vector<int>& nz);
  void RecomputeBasics();
  void RecomputeDuals(const std::vector<double>& cost);
  int Price() const;
  void SyncSign(int j);
  // Returns false when the phase is optimal.
  bool Iterate(const std::vector<double>& cost, SolveStatus* status);

  struct Artificial {
    int row;
    double sign;
  };

  const LinearProgram& lp_;
  SimplexOptions opt_;
  int m_, nv_;
  std::vector<int> row_start_, row_col_;  // structural entries by row
  std::vector<double> row_val_;
  std::vector<double> lo_, up_, x_;
  std::vector<VarState> state_;
  std::vector<int> head_;  // basis position -> variable
  std::vector<int> pos_;   // variable -> basis position or -1
  std::vector<Artificial> artificials_;
  std::vector<int> artificial_of_row_;
  BasisFactor lu_;
  std::vector<Eta> etas_;
  std::vector<double> d_;  // reduced costs, zero on basics
  std::vector<double> sign_;  // +1 at lower, -1 at upper, 0 basic/fixed/free
  std::vector<int> free_;
  mutable int segment_ = 0;
  bool duals_fresh_ = false;
  // Scratch kept zero between uses.
  std::vector<double> w_, rho_, alpha_;
  std::vector<int> w_nz_, rho_nz_, alpha_nz_;
  std::vector<unsigned> mark_;
  unsigned stamp_ = 0;
  int64_t iterations_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
};

void Simplex::Setup() {
  const int base = nv_ + m_;
  lo_.resize(base);
  up_.resize(base);
  x_.assign(base, 0.0);
  state_.assign(base, VarState::kLower);
  for (int j = 0; j < nv_; ++j) {
    lo_[j] = lp_.lower(j);
    up_[j] = lp_.upper(j);
    if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j];
      state_[j] = VarState::kLower;
    } else if (std::isfinite(up_[j])) {
      x_[j] = up_[j];
      state_[j] = VarState::kUpper;
    } else {
      x_[j] = 0.0;
      state_[j] = VarState::kFree;
    }
  }
  std::vector<double> act(m_, 0.0);
  for (int j = 0; j < nv_; ++j) {
    if (x_[j] == 0.0) continue;
    for (const auto& e : lp_.column(j)) act[e.row] += e.value * x_[j];
  }
  head_.assign(m_, -1);
  artificial_of_row_.assign(m_, -1);
  for (int r = 0; r < m_; ++r) {
    const int s = nv_ + r;
    lo_[s] = lp_.row_lower(r);
    up_[s] = lp_.row_upper(r);
    if (act[r] >= lo_[s] - opt_.feasibility_tolerance &&
        act[r] <= up_[s] + opt_.feasibility_tolerance) {
      head_[r] = s;
      state_[s] = VarState::kBasic;
      x_[s] = act[r];
      continue;
    }
    // Logical sits at the violated bound; an artificial absorbs the gap.
    const bool below = act[r] < lo_[s];
    x_[s] = below ? lo_[s] : up_[s];
    state_[s] = below ? VarState::kLower : VarState::kUpper;
    const int a = total();
    artificial_of_row_[r] = a;
    artificials_.push_back({r, below ? 1.0 : -1.0});
    lo_.push_back(0.0);
    up_.push_back(kInfinity);
    x_.push_back(std::abs(act[r] - x_[s]));
    state_.push_back(VarState::kBasic);
    head_[r] = a;
  }
  pos_.assign(total(), -1);
  for (int r = 0; r < m_; ++r) pos_[head_[r]] = r;
}

bool Simplex::SetupFromBasis(const std::vector<BasisStatus>& warm) {
  const int base = nv_ + m_;
  if (static_cast<int>(warm.size()) != base) return false;
  lo_.resize(base);
  up_.resize(base);
  x_.assign(base, 0.0);
  state_.assign(base, VarState::kLower);
  artificial_of_row_.assign(m_, -1);
  head_.clear();
  for (int j = 0; j < base; ++j) {
    lo_[j] = j < nv_ ? lp_.lower(j) : lp_.row_lower(j - nv_);
    up_[j] = j < nv_ ? lp_.upper(j) : lp_.row_upper(j - nv_);
    switch (warm[j]) {
      case BasisStatus::kBasic:
        state_[j] = VarState::kBasic;
        head_.push_back(j);
        break;
      case BasisStatus::kLower:
        if (!std::isfinite(lo_[j])) return false;
        state_[j] = VarState::kLower;
        x_[j] = lo_[j];
        break;
      case BasisStatus::kUpper:
        if (!std::isfinite(up_[j])) return false;
        state_[j] = VarState::kUpper;
        x_[j] = up_[j];
        break;
      case BasisStatus::kFree:
        if (std::isfinite(lo_[j]) || std::isfinite(up_[j])) return false;
        state_[j] = VarState::kFree;
        break;
    }
  }
  if (static_cast<int>(head_.size()) != m_) return false;
  pos_.assign(base, -1);
  for (int r = 0; r < m_; ++r) pos_[head_[r]] = r;
  try {
    Refactor();
  } catch (const NumericalError&) {
    return false;
  }
  RecomputeBasics();
  for (int b : head_) {
    if (x_[b] < lo_[b] - opt_.feasibility_tolerance || x_[b] > up_[b] + opt_.feasibility_tolerance) {
      return false;
    }
  }
  return true;
}

void Simplex::Refactor() {
  std::vector<int> ap(m_ + 1, 0), ai;
  std::vector<double> ax;
  ai.reserve(static_cast<size_t>(m_) * 3);
  ax.reserve(static_cast<size_t>(m_) * 3);
  for (int p = 0; p < m_; ++p) {
    ForEachEntry(head_[p], [&](int row, double v) {
      ai.push_back(row);
      ax.push_back(v);
    });
    ap[p + 1] = static_cast<int>(ai.size());
  }
  lu_.Factor(m_, ap, ai, ax);
  etas_.clear();
  w_.assign(m_, 0.0);
  rho_.assign(m_, 0.0);
  alpha_.assign(total(), 0.0);
  mark_.assign(m_, 0);
  stamp_ = 0;
}

void Simplex::Ftran(std::vector<double>& v, std::vector<int>& nz) {
  lu_.Solve(v, nz);
  if (etas_.empty()) return;
  ++stamp_;
  for (int p : nz) mark_[p] = stamp_;
  for (const Eta& e : etas_) {
    double xp = v[e.pivot_row];
    if (xp == 0.0) continue;
    xp /= e.pivot;
    v[e.pivot_row] = xp;
    for (const auto& [row, w] : e.others) {
      if (mark_[row] != stamp_) {
        mark_[row] = stamp_;
        nz.push_back(row);
      }
      v[row] -= w * xp;
    }
  }
}

void Simplex::Btran(std::vector<double>& v, std::vector<int>& nz) {
  if (!etas_.empty()) {
    ++stamp_;
    for (int p : nz) mark_[p] = stamp_;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = v[it->pivot_row];
      for (const auto& [row, w] : it->others) acc -= w * v[row];
      acc /= it->pivot;
      if (acc != 0.0 && mark_[it->pivot_row] != stamp_) {
        mark_[it->pivot_row] = stamp_;
        nz.push_back(it->pivot_row);
      }
      v[it->pivot_row] = acc;
    }
  }
  lu_.SolveTransposed(v, nz);
}

void Simplex::RecomputeBasics() {
  std::vector<double> rhs(m_, 0.0);
  for (int j = 0; j < total(); ++j) {
    if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
    const double xj = x_[j];
    ForEachEntry(j, [&](int row, double v) { rhs[row] -= v * xj; });
  }
  std::vector<int> nz;
  for (int r = 0; r < m_; ++r) {
    if (rhs[r] != 0.0) nz.push_back(r);
  }
  Ftran(rhs, nz);
  for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
}

void Simplex::RecomputeDuals(const std::vector<double>& cost) {
  std::vector<double> pi(m_, 0.0);
  std::vector<int> nz;
  for (int p = 0; p < m_; ++p) {
    pi[p] = cost[head_[p]];
    if (pi[p] != 0.0) nz.push_back(p);
  }
  Btran(pi, nz);
  d_.assign(total(), 0.0);
  sign_.assign(total(), 0.0);
  free_.clear();
  for (int j = 0; j < total(); ++j) {
    SyncSign(j);
    if (state_[j] == VarState::kFree) free_.push_back(j);
    if (state_[j] == VarState::kBasic) continue;
    double d = cost[j];
    ForEachEntry(j, [&](int row, double v) { d -= pi[row] * v; });
    d_[j] = d;
  }
  duals_fresh_ = true;
}

void Simplex::SyncSign(int j) {
  const VarState st = state_[j];
  if (st == VarState::kBasic || st == VarState::kFree || lo_[j] == up_[j]) {
    sign_[j] = 0.0;
  } else {
    sign_[j] = st == VarState::kLower ? 1.0 : -1.0;
  }
}

int Simplex::Price() const {
  const double tol = opt_.optimality_tolerance;
  int entering = -1;
  double best = tol;
  const int n = total();
  const double* d = d_.data();
  const double* sign = sign_.data();
  if (bland_) {
    for (int j = 0; j < n; ++j) {
      if (-d[j] * sign[j] > tol) {
        entering = j;
        break;
      }
    }
  } else {
    // Partial pricing: whole segments are scanned, starting where the last
    // call stopped, until one yields a candidate.
    const int segments = std::max(1, std::min(opt_.pricing_segments, n / 1000));
    const int width = (n + segments - 1) / segments;
    for (int k = 0; k < segments && entering < 0; ++k) {
      const int seg = (segment_ + k) % segments;
      const int end = std::min(n, (seg + 1) * width);
      for (int j = seg * width; j < end; ++j) {
        const double score = -d[j] * sign[j];
        if (score > best) {
          best = score;
          entering = j;
        }
      }
      if (entering >= 0) segment_ = (seg + 1) % segments;
    }
  }
  // Nonbasic free variables price on |d|.
  for (int j : free_) {
    if (state_[j] != VarState::kFree || lo_[j] == up_[j]) continue;
    const double score = std::abs(d_[j]);
    if (score <= tol) continue;
    if (bland_ ? (entering < 0 || j < entering) : score > best) {
      best = score;
      entering = j;
    }
  }
  return entering;
}

bool Simplex::Iterate(const std::vector<double>& cost, SolveStatus* status) {
  if (etas_.size() >= static_cast<size_t>(opt_.refactor_interval)) {
    Refactor();
    RecomputeBasics();
    RecomputeDuals(cost);
  }
  int entering = Price();
  if (entering < 0 && !duals_fresh_) {
    // Confirm optimality against duals computed from scratch.
    RecomputeDuals(cost);
    entering = Price();
  }
  if (entering < 0) {
    *status = SolveStatus::kOptimal;
    return false;
  }
  const double direction = state_[entering] == VarState::kUpper ||
                                   (state_[entering] == VarState::kFree && d_[entering] > 0)
                               ? -1.0
                               : 1.0;

  w_nz_.clear();
  ForEachEntry(entering, [&](int row, double v) {
    if (w_[row] == 0.0) w_nz_.push_back(row);
    w_[row] += v;
  });
  Ftran(w_, w_nz_);

  // Harris two-pass ratio test. Basic p moves at rate -direction * w[p].
  const double ftol = opt_.feasibility_tolerance;
  double relaxed = up_[entering] - lo_[entering];
  for (int p : w_nz_) {
    if (std::abs(w_[p]) <= opt_.pivot_tolerance) continue;
    const int b = head_[p];
    const double rate = -direction * w_[p];
    double t;
    if (rate < 0) {
      if (!std::isfinite(lo_[b])) continue;
      t = (x_[b] - lo_[b] + ftol) / -rate;
    } else {
      if (!std::isfinite(up_[b])) continue;
      t = (up_[b] - x_[b] + ftol) / rate;
    }
    relaxed = std::min(relaxed, t);
  }
  if (!std::isfinite(relaxed)) {
    for (int p : w_nz_) w_[p] = 0.0;
    *status = SolveStatus::kUnbounded;
    return false;
  }
  int leave = -1;
  double step = 0.0;
  double best_pivot = 0.0;
  for (int p : w_nz_) {
    if (std::abs(w_[p]) <= opt_.pivot_tolerance) continue;
    const int b = head_[p];
    const double rate = -direction * w_[p];
    double t;
    if (rate < 0) {
      if (!std::isfinite(lo_[b])) continue;
      t = (x_[b] - lo_[b]) / -rate;
    } else {
      if (!std::isfinite(up_[b])) continue;
      t = (up_[b] - x_[b]) / rate;
    }
    if (t > relaxed) continue;
    const bool better = bland_ ? (leave < 0 || t < step - 1e-12 ||
                                  (t <= step + 1e-12 && b < head_[leave]))
                               : (std::abs(w_[p]) > best_pivot ||
                                  (std::abs(w_[p]) == best_pivot && p < leave));
    if (better) {
      leave = p;
      step = std::max(t, 0.0);
      best_pivot = std::abs(w_[p]);
    }
  }
  const double flip = up_[entering] - lo_[entering];
  ++iterations_;
  if (leave < 0 || flip <= step) {
    // Bound flip: entering moves to its opposite bound, basis unchanged.
    step = flip;
    x_[entering] = direction > 0 ? up_[entering] : lo_[entering];
    state_[entering] = direction > 0 ? VarState::kUpper : VarState::kLower;
    SyncSign(entering);
    for (int p : w_nz_) {
      x_[head_[p]] -= direction * step * w_[p];
      w_[p] = 0.0;
    }
    degenerate_run_ = 0;
    bland_ = false;
    return true;
  }

  // Pivot row of B^-1 A, used to update the reduced costs.
  rho_nz_.assign(1, leave);
  rho_[leave] = 1.0;
  Btran(rho_, rho_nz_);
  alpha_nz_.clear();
  auto add_alpha = [&](int j, double v) {
    if (alpha_[j] == 0.0) alpha_nz_.push_back(j);
    alpha_[j] += v;
    if (alpha_[j] == 0.0) alpha_[j] = 1e-300;  // keep j listed once
  };
  for (int r : rho_nz_) {
    const double rr = rho_[r];
    rho_[r] = 0.0;
    if (rr == 0.0) continue;
    for (int q = row_start_[r]; q < row_start_[r + 1]; ++q) add_alpha(row_col_[q], rr * row_val_[q]);
    add_alpha(nv_ + r, -rr);
    if (artificial_of_row_[r] >= 0) {
      add_alpha(artificial_of_row_[r], rr * artificials_[artificial_of_row_[r] - nv_ - m_].sign);
    }
  }
  const double theta_d = d_[entering] / w_[leave];
  for (int j : alpha_nz_) {
    if (state_[j] != VarState::kBasic) d_[j] -= theta_d * alpha_[j];
    alpha_[j] = 0.0;
  }
  duals_fresh_ = false;

  for (int p : w_nz_) x_[head_[p]] -= direction * step * w_[p];
  x_[entering] += direction * step;
  const int out = head_[leave];
  const double rate = -direction * w_[leave];
  if (rate < 0) {
    x_[out] = lo_[out];
    state_[out] = VarState::kLower;
  } else {
    x_[out] = up_[out];
    state_[out] = VarState::kUpper;
  }
  if (lo_[out] == up_[out]) state_[out] = VarState::kLower;
  pos_[out] = -1;
  head_[leave] = entering;
  pos_[entering] = leave;
  state_[entering] = VarState::kBasic;
  d_[entering] = 0.0;
  d_[out] = -theta_d;
  SyncSign(entering);
  SyncSign(out);

  Eta eta{leave, w_[leave], {}};
  for (int p : w_nz_) {
    if (p != leave && w_[p] != 0.0) eta.others.push_back({p, w_[p]});
    w_[p] = 0.0;
  }
  etas_.push_back(std::move(eta));

  if (step <= 1e-12) {
    if (++degenerate_run_ >= opt_.degenerate_run_before_bland) bland_ = true;
  } else {
    degenerate_run_ = 0;
    bland_ = false;
  }
  return true;
}

SimplexResult Simplex::Run(const std::vector<BasisStatus>* warm) {
  SimplexResult result;
  result.warm_started = warm != nullptr && SetupFromBasis(*warm);
  if (!result.warm_started) {
    artificials_.clear();
    Setup();
    Refactor();
  }

  SolveStatus status = SolveStatus::kOptimal;
  if (!artificials_.empty()) {
    std::vector<double> phase1(total(), 0.0);
    for (int j = nv_ + m_; j < total(); ++j) phase1[j] = 1.0;
    RecomputeDuals(phase1);
    while (iterations_ < opt_.max_iterations && Iterate(phase1, &status)) {
    }
    if (iterations_ >= opt_.max_iterations) status = SolveStatus::kIterationLimit;
    if (status != SolveStatus::kOptimal) {
      result.status = status == SolveStatus::kUnbounded ? SolveStatus::kInfeasible : status;
      result.iterations = iterations_;
      return result;
    }
    Refactor();
    RecomputeBasics();
    double infeasibility = 0.0;
    for (int j = nv_ + m_; j < total(); ++j) infeasibility += std::max(0.0, x_[j]);
    if (infeasibility > 1e-7) {
      result.status = SolveStatus::kInfeasible;
      result.iterations = iterations_;
      return result;
    }
    for (int j = nv_ + m_; j < total(); ++j) {
      up_[j] = 0.0;
      if (state_[j] != VarState::kBasic) {
        x_[j] = 0.0;
        state_[j] = VarState::kLower;
      }
    }
    degenerate_run_ = 0;
    bland_ = false;
  }

  std::vector<double> phase2(total(), 0.0);
  for (int j = 0; j < nv_; ++j) phase2[j] = lp_.cost(j);
  RecomputeDuals(phase2);
  while (iterations_ < opt_.max_iterations && Iterate(phase2, &status)) {
  }
  if (iterations_ >= opt_.max_iterations) status = SolveStatus::kIterationLimit;
  result.status = status;
  result.iterations = iterations_;
  if (status != SolveStatus::kOptimal) return result;

  Refactor();
  RecomputeBasics();
  result.x.assign(x_.begin(), x_.begin() + nv_);
  // Snap values that sit on a bound within tolerance.
  for (int j = 0; j < nv_; ++j) {
    double& v = result.x[j];
    if (std::abs(v - lo_[j]) <= opt_.feasibility_tolerance) v = lo_[j];
    if (std::abs(v - up_[j]) <= opt_.feasibility_tolerance) v = up_[j];
  }
  result.basis.resize(nv_ + m_);
  for (int j = 0; j < nv_ + m_; ++j) {
    switch (state_[j]) {
      case VarState::kBasic: result.basis[j] = BasisStatus::kBasic; break;
      case VarState::kLower: result.basis[j] = BasisStatus::kLower; break;
      case VarState::kUpper: result.basis[j] = BasisStatus::kUpper; break;
      case VarState::kFree: result.basis[j] = BasisStatus::kFree; break;
    }
  }
  // A basic artificial at zero cannot be handed back; drop the basis then.
  for (int p = 0; p < m_; ++p) {
    if (head_[p] >= nv_ + m_) {
      result.basis.clear();
      break;
    }
  }
  result.row_activity = lp_.RowActivities(result.x);
  result.objective = lp_.Objective(result.x);
  result.max_violation = lp_.MaxViolation(result.x);
  if (result.max_violation > 1e-7) {
    throw NumericalError("simplex solution violates constraints by " +
                         std::to_string(result.max_violation));
  }
  return result;
}

}  // namespace

SimplexResult SolveSimplex(const LinearProgram& lp, const SimplexOptions& options,
                           const std::vector<BasisStatus>* warm) {
  if (lp.num_rows() == 0) {
    // Without rows every variable sits at its cheaper bound.
    SimplexResult result;
    result.status = SolveStatus::kOptimal;
    result.x.resize(lp.num_variables());
    for (int j = 0; j < lp.num_variables(); ++j) {
      const double c = lp.cost(j);
      const double bound = c > 0 ? lp.lower(j) : (c < 0 ? lp.upper(j) : (std::isfinite(lp.lower(j)) ? lp.lower(j) : (std::isfinite(lp.upper(j)) ? lp.upper(j) : 0.0)));
      if (!std::isfinite(bound)) {
        result.status = SolveStatus::kUnbounded;
        return result;
      }
      result.x[j] = bound;
    }
    result.objective = lp.Objective(result.x);
    return result;
  }
  Simplex simplex(lp, options);
  return simplex.Run(warm);
}

}  // namespace coopcache
