#ifndef LINKSYNTH_CC_ILP_HPP
#define LINKSYNTH_CC_ILP_HPP

//===========================================================================
// ILP stage for intersecting CC sets: intervalize integer columns at CC cut
// points, bin the distinct R1 signatures, build a sparse 0/1 system over
// (bin x combo) variables, minimize the L1 residual with an embedded
// branch-and-bound, then fill view rows greedily from the solution.
//===========================================================================

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "linksynth/cc_exact.hpp"

namespace linksynth {

enum class MarginalMode : uint8_t { AllWay, Modified, None };

inline const char* marginalModeName(MarginalMode m) {
  switch (m) {
    case MarginalMode::AllWay: return "all-way";
    case MarginalMode::Modified: return "modified";
    case MarginalMode::None: return "none";
  }
  return "?";
}

//-------------------------------------------------------------- intervalize

// Elementary intervals per integer column: starts s0<s1<...; interval i is
// [s_i, s_{i+1}-1] and the last one is open-ended. CC interval endpoints
// contribute starts at lo and hi+1, so no elementary interval straddles a CC
// boundary and an interval is inside a CC range iff its start is.
struct Intervalization {
  std::vector<std::string> cols;                 // A-columns, R1 schema order
  std::vector<int> colIdx;                       // R1 schema indices
  std::vector<ColumnKind> kinds;
  std::vector<std::vector<int64_t>> starts;      // integer columns only
};

inline Intervalization intervalize(const std::vector<LinearCC>& ccs, const Schema& r1) {
  Intervalization iv;
  for (int c = 0; c < r1.size(); ++c) {
    if (c == r1.pkIndex() || c == r1.fkIndex()) continue;
    iv.cols.push_back(r1.columns()[c].name);
    iv.colIdx.push_back(c);
    iv.kinds.push_back(r1.columns()[c].kind);
    std::vector<int64_t> s{std::numeric_limits<int64_t>::min()};
    if (r1.columns()[c].kind == ColumnKind::Integer) {
      for (const auto& cc : ccs) {
        auto it = cc.r1Conds.find(r1.columns()[c].name);
        if (it == cc.r1Conds.end()) continue;
        const ColumnCond& cond = it->second;
        if (cond.lo != std::numeric_limits<int64_t>::min()) s.push_back(cond.lo);
        if (cond.hi != std::numeric_limits<int64_t>::max()) s.push_back(cond.hi + 1);
      }
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    iv.starts.push_back(std::move(s));
  }
  return iv;
}

// Start of the elementary interval holding v.
inline int64_t intervalStartOf(const std::vector<int64_t>& starts, int64_t v) {
  auto it = std::upper_bound(starts.begin(), starts.end(), v);
  return *(it - 1);
}

//------------------------------------------------------------------ BinSpace

// Bins are the distinct signatures of the rows still open for assignment:
// integer columns collapse to their elementary-interval start, categorical
// columns keep their value. Variables are (bin, combo) pairs in combo-major
// order; each is bounded by its bin's member count.
struct BinSpace {
  Intervalization iv;
  std::vector<std::vector<Value>> binSig;     // per bin, per A-column (sorted lexicographically)
  std::vector<int64_t> memberCounts;
  std::vector<std::vector<size_t>> binRows;   // view rows per bin, ascending key
  std::vector<std::vector<Value>> combos;     // active-column combos (pool order)
  std::vector<std::string> comboCols;

  size_t binCount() const { return binSig.size(); }
  size_t varCount() const { return binSig.size() * std::max<size_t>(1, combos.size()); }
  int varOf(size_t bin, size_t combo) const { return static_cast<int>(combo * binSig.size() + bin); }
  size_t binOfVar(int v) const { return static_cast<size_t>(v) % binSig.size(); }
  size_t comboOfVar(int v) const { return static_cast<size_t>(v) / binSig.size(); }

  // Does the bin's signature satisfy a CC's R1 side?
  bool binMatches(size_t bin, const CondMap& conds) const {
    for (const auto& [col, cond] : conds) {
      for (size_t i = 0; i < iv.cols.size(); ++i)
        if (iv.cols[i] == col) {
          if (!cond.satisfied(binSig[bin][i])) return false;
          break;
        }
    }
    return true;
  }
};

// conds on the combo side, empty set satisfied by anything
inline bool comboSatisfies(const CondMap& r2Conds, const std::vector<std::string>& cols,
                           const std::vector<Value>& combo) {
  for (const auto& [col, cond] : r2Conds) {
    for (size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == col) {
        if (!cond.satisfied(combo[i])) return false;
        break;
      }
  }
  return true;
}

inline BinSpace buildBinSpace(const std::vector<LinearCC>& s2ccs, const JoinView& view,
                              const ComboPool& pool) {
  BinSpace bs;
  bs.iv = intervalize(s2ccs, view.r1().schema());
  bs.combos = pool.all;
  bs.comboCols = pool.columns;

  std::unordered_map<std::vector<Value>, int, ValueVecHash> index;
  std::vector<Value> sig(bs.iv.cols.size());
  for (size_t row : detail::rowsByKey(view)) {
    if (detail::rowTouched(view, pool.bIndex, row)) continue;
    for (size_t c = 0; c < bs.iv.cols.size(); ++c) {
      const Value& v = view.r1().row(row)[bs.iv.colIdx[c]];
      sig[c] = bs.iv.kinds[c] == ColumnKind::Integer
                   ? Value::ofInt(intervalStartOf(bs.iv.starts[c], v.asInt()))
                   : v;
    }
    auto [it, inserted] = index.emplace(sig, static_cast<int>(bs.binSig.size()));
    if (inserted) {
      bs.binSig.push_back(sig);
      bs.memberCounts.push_back(0);
      bs.binRows.push_back({});
    }
    ++bs.memberCounts[it->second];
    bs.binRows[it->second].push_back(row);
  }

  // deterministic bin order: lexicographic signature
  std::vector<int> perm(bs.binSig.size());
  for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  std::sort(perm.begin(), perm.end(), [&](int a, int b) {
    return std::lexicographical_compare(bs.binSig[a].begin(), bs.binSig[a].end(),
                                        bs.binSig[b].begin(), bs.binSig[b].end());
  });
  BinSpace out;
  out.iv = std::move(bs.iv);
  out.combos = std::move(bs.combos);
  out.comboCols = std::move(bs.comboCols);
  for (int p : perm) {
    out.binSig.push_back(std::move(bs.binSig[p]));
    out.memberCounts.push_back(bs.memberCounts[p]);
    out.binRows.push_back(std::move(bs.binRows[p]));
  }
  return out;
}

//-------------------------------------------------------------- LinearSystem

struct SysRow {
  enum class Kind : uint8_t { Marginal, CC } kind = Kind::CC;
  std::string label;
  std::vector<int> vars;  // ascending
  int64_t target = 0;
};

struct LinearSystem {
  size_t nVars = 0;
  std::vector<int64_t> ub;  // per variable
  std::vector<SysRow> rows;
};

namespace detail {

// conjunction of two canonical conditions; false when empty
inline bool intersectConds(const ColumnCond& a, const ColumnCond& b, ColumnCond& out) {
  if (a.kind != b.kind) return false;
  out = a;
  if (a.kind == ColumnKind::Integer) {
    out.lo = std::max(a.lo, b.lo);
    out.hi = std::min(a.hi, b.hi);
    return out.lo <= out.hi;
  }
  if (b.eq) {
    if (out.eq && !(*out.eq == *b.eq)) return false;
    out.eq = b.eq;
  }
  for (const auto& v : b.ne) {
    auto it = std::lower_bound(out.ne.begin(), out.ne.end(), v);
    if (it == out.ne.end() || !(*it == v)) out.ne.insert(it, v);
  }
  return !out.empty();
}

inline bool intersectCondMaps(const CondMap& a, const CondMap& b, CondMap& out) {
  out = a;
  for (const auto& [col, cond] : b) {
    auto it = out.find(col);
    if (it == out.end()) {
      out.emplace(col, cond);
      continue;
    }
    ColumnCond merged;
    if (!intersectConds(it->second, cond, merged)) return false;
    it->second = merged;
  }
  return true;
}

}  // namespace detail

// System rows: marginals per the requested mode plus one row per input CC.
// Modified mode adds all-way marginal rows only over the overlap regions of
// intersecting pairs, refined to elementary-cell granularity; cells absent
// from the data keep an empty variable list and their (zero) target.
inline LinearSystem buildSystem(const BinSpace& bs, const std::vector<LinearCC>& s2ccs,
                                MarginalMode mode, const Relation& r1ForDomains) {
  LinearSystem sys;
  sys.nVars = bs.varCount();
  sys.ub.resize(sys.nVars);
  size_t nBins = bs.binCount(), nCombos = std::max<size_t>(1, bs.combos.size());
  for (size_t c = 0; c < nCombos; ++c)
    for (size_t b = 0; b < nBins; ++b) sys.ub[bs.varOf(b, c)] = bs.memberCounts[b];

  auto allCombosOfBin = [&](size_t bin) {
    std::vector<int> vars;
    for (size_t c = 0; c < nCombos; ++c) vars.push_back(bs.varOf(bin, c));
    std::sort(vars.begin(), vars.end());
    return vars;
  };

  if (mode == MarginalMode::AllWay) {
    for (size_t b = 0; b < nBins; ++b) {
      SysRow row;
      row.kind = SysRow::Kind::Marginal;
      row.label = "marg:bin" + std::to_string(b);
      row.vars = allCombosOfBin(b);
      row.target = bs.memberCounts[b];
      sys.rows.push_back(std::move(row));
    }
  } else if (mode == MarginalMode::Modified) {
    // overlap regions of intersecting pairs on the R1 side
    std::vector<CondMap> regions;
    auto matrix = classifyAll(s2ccs);
    for (size_t i = 0; i < s2ccs.size(); ++i)
      for (size_t j = i + 1; j < s2ccs.size(); ++j) {
        if (matrix[i][j] != PairKind::Intersecting) continue;
        CondMap merged;
        if (detail::intersectCondMaps(s2ccs[i].r1Conds, s2ccs[j].r1Conds, merged))
          regions.push_back(std::move(merged));
      }
    // refined cells = product of elementary intervals / active values
    std::vector<std::vector<Value>> options;
    size_t cellCount = 1;
    for (size_t c = 0; c < bs.iv.cols.size(); ++c) {
      std::vector<Value> opts;
      if (bs.iv.kinds[c] == ColumnKind::Integer)
        for (int64_t s : bs.iv.starts[c]) opts.push_back(Value::ofInt(s));
      else
        opts = r1ForDomains.activeDomain(bs.iv.colIdx[c]);
      cellCount *= std::max<size_t>(1, opts.size());
      if (cellCount > 1000000) fail(Errc::InstanceTooLarge, "marginal cell space over 1e6");
      options.push_back(std::move(opts));
    }
    std::unordered_map<std::vector<Value>, int, ValueVecHash> binIndex;
    for (size_t b = 0; b < nBins; ++b) binIndex.emplace(bs.binSig[b], static_cast<int>(b));

    std::vector<Value> cell(bs.iv.cols.size());
    int cellSeq = 0;
    std::function<void(size_t)> rec = [&](size_t d) {
      if (d == cell.size()) {
        bool inRegion = false;
        for (const auto& region : regions) {
          bool ok = true;
          for (const auto& [col, cond] : region) {
            for (size_t c = 0; c < bs.iv.cols.size(); ++c)
              if (bs.iv.cols[c] == col) {
                if (!cond.satisfied(cell[c])) ok = false;
                break;
              }
            if (!ok) break;
          }
          if (ok) {
            inRegion = true;
            break;
          }
        }
        if (!inRegion) return;
        SysRow row;
        row.kind = SysRow::Kind::Marginal;
        row.label = "marg:cell" + std::to_string(cellSeq++);
        auto it = binIndex.find(cell);
        if (it != binIndex.end()) {
          row.vars = allCombosOfBin(it->second);
          row.target = bs.memberCounts[it->second];
        }
        sys.rows.push_back(std::move(row));
        return;
      }
      for (const auto& v : options[d]) {
        cell[d] = v;
        rec(d + 1);
      }
    };
    if (!regions.empty()) rec(0);
  }

  for (const auto& cc : s2ccs) {
    SysRow row;
    row.kind = SysRow::Kind::CC;
    row.label = cc.id;
    for (size_t b = 0; b < nBins; ++b) {
      if (!bs.binMatches(b, cc.r1Conds)) continue;
      for (size_t c = 0; c < nCombos; ++c) {
        if (!bs.combos.empty() && !comboSatisfies(cc.r2Conds, bs.comboCols, bs.combos[c])) continue;
        row.vars.push_back(bs.varOf(b, c));
      }
    }
    std::sort(row.vars.begin(), row.vars.end());
    row.target = cc.target;
    sys.rows.push_back(std::move(row));
  }
  return sys;
}

//-------------------------------------------------------------------- solver

struct SolverBudget {
  int64_t maxNodes = 10000000;
  double maxSeconds = 60.0;
};

struct IntegerSolution {
  std::vector<int64_t> x;
  int64_t residual = 0;
  bool exact = false;  // search finished, so residual is the true optimum
  int64_t nodes = 0;
};

// Pluggable solver seam; the library ships the branch-and-bound below.
class SystemSolver {
 public:
  virtual ~SystemSolver() = default;
  virtual IntegerSolution solve(const LinearSystem& sys, const SolverBudget& budget) = 0;
};

// Depth-first branch and bound over variables in descending row-coverage
// order. Pass 1 never lets a row exceed its target (complete for residual-0
// systems); pass 2 lifts that restriction and relies on an admissible L1
// bound: overshoot already incurred plus unreachable demand.
class BranchBoundSolver : public SystemSolver {
 public:
  IntegerSolution solve(const LinearSystem& sys, const SolverBudget& budget) override {
    n_ = sys.nVars;
    ub_ = &sys.ub;
    varRows_.assign(n_, {});
    for (size_t r = 0; r < sys.rows.size(); ++r)
      for (int v : sys.rows[r].vars) varRows_[v].push_back(static_cast<int>(r));

    // variables no row mentions stay 0: they cannot change the residual but
    // would otherwise hand out combos (and blow up the search space)
    order_.clear();
    for (size_t i = 0; i < n_; ++i)
      if (!varRows_[i].empty()) order_.push_back(static_cast<int>(i));
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return varRows_[a].size() > varRows_[b].size();
    });

    best_.assign(n_, 0);
    cur_.assign(n_, 0);
    bestResidual_ = 0;
    remaining_.assign(sys.rows.size(), 0);
    cap_.assign(sys.rows.size(), 0);
    for (size_t r = 0; r < sys.rows.size(); ++r) {
      remaining_[r] = sys.rows[r].target;
      bestResidual_ += sys.rows[r].target;  // all-zero fallback
      for (int v : sys.rows[r].vars) cap_[r] += sys.ub[v];
    }
    nodes_ = 0;
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(budget.maxSeconds));
    budget_ = budget;
    outOfBudget_ = false;

    complete_ = true;
    dfsPass1(0);
    bool pass1Complete = complete_ && !outOfBudget_;

    bool pass2Complete = true;
    if (bestResidual_ > 0 && !outOfBudget_) {
      complete_ = true;
      std::fill(cur_.begin(), cur_.end(), 0);
      for (size_t r = 0; r < sys.rows.size(); ++r) {
        remaining_[r] = sys.rows[r].target;
        cap_[r] = 0;
        for (int v : sys.rows[r].vars) cap_[r] += sys.ub[v];
      }
      dfsPass2(0);
      pass2Complete = complete_ && !outOfBudget_;
    }

    IntegerSolution sol;
    sol.x = best_;
    sol.residual = bestResidual_;
    // zero residual is optimal by definition even if the search was cut short
    sol.exact = bestResidual_ == 0 || (pass1Complete && pass2Complete);
    sol.nodes = nodes_;
    return sol;
  }

 private:
  bool spendNode() {
    if (++nodes_ >= budget_.maxNodes) {
      outOfBudget_ = true;
      return false;
    }
    if ((nodes_ & 4095) == 0 && std::chrono::steady_clock::now() > deadline_) {
      outOfBudget_ = true;
      return false;
    }
    return true;
  }

  int64_t lowerBound(bool allowOvershoot) const {
    int64_t lb = 0;
    for (size_t r = 0; r < remaining_.size(); ++r) {
      if (remaining_[r] < 0) {
        if (allowOvershoot) lb += -remaining_[r];
      } else if (remaining_[r] > cap_[r]) {
        lb += remaining_[r] - cap_[r];
      }
    }
    return lb;
  }

  void commit(int v, int64_t val) {
    cur_[v] = val;
    for (int r : varRows_[v]) {
      remaining_[r] -= val;
      cap_[r] -= (*ub_)[v];
    }
  }
  void uncommit(int v, int64_t val) {
    cur_[v] = 0;
    for (int r : varRows_[v]) {
      remaining_[r] += val;
      cap_[r] += (*ub_)[v];
    }
  }

  void recordLeaf() {
    int64_t res = 0;
    for (int64_t r : remaining_) res += std::llabs(r);
    if (res < bestResidual_) {
      bestResidual_ = res;
      best_ = cur_;
    }
  }

  void dfsPass1(size_t depth) {
    if (bestResidual_ == 0 || outOfBudget_) return;
    if (lowerBound(false) >= bestResidual_) return;
    if (depth == order_.size()) {
      recordLeaf();
      return;
    }
    int v = order_[depth];
    int64_t cap = (*ub_)[v];
    for (int r : varRows_[v]) cap = std::min(cap, std::max<int64_t>(0, remaining_[r]));
    for (int64_t val = cap; val >= 0; --val) {
      if (!spendNode()) {
        complete_ = false;
        return;
      }
      commit(v, val);
      dfsPass1(depth + 1);
      uncommit(v, val);
      if (bestResidual_ == 0 || outOfBudget_) {
        if (outOfBudget_) complete_ = false;
        return;
      }
    }
  }

  void dfsPass2(size_t depth) {
    if (bestResidual_ == 0 || outOfBudget_) return;
    if (lowerBound(true) >= bestResidual_) return;
    if (depth == order_.size()) {
      recordLeaf();
      return;
    }
    int v = order_[depth];
    int64_t greedy = (*ub_)[v];
    for (int r : varRows_[v]) greedy = std::min(greedy, std::max<int64_t>(0, remaining_[r]));
    // greedy value first, then the rest descending down to zero
    for (int64_t k = -1; k <= (*ub_)[v]; ++k) {
      int64_t val = k < 0 ? greedy : (*ub_)[v] - k;
      if (k >= 0 && val == greedy) continue;
      if (!spendNode()) {
        complete_ = false;
        return;
      }
      commit(v, val);
      dfsPass2(depth + 1);
      uncommit(v, val);
      if (bestResidual_ == 0 || outOfBudget_) {
        if (outOfBudget_) complete_ = false;
        return;
      }
    }
  }

  size_t n_ = 0;
  const std::vector<int64_t>* ub_ = nullptr;
  std::vector<std::vector<int>> varRows_;
  std::vector<int> order_;
  std::vector<int64_t> cur_, best_, remaining_, cap_;
  int64_t bestResidual_ = 0, nodes_ = 0;
  SolverBudget budget_;
  std::chrono::steady_clock::time_point deadline_;
  bool outOfBudget_ = false, complete_ = true;
};

inline IntegerSolution solveInteger(const LinearSystem& sys, const SolverBudget& budget = {}) {
  BranchBoundSolver solver;
  return solver.solve(sys, budget);
}

//--------------------------------------------------------------- greedy fill

// Walk variables grouped by bin (ascending), combos in pool order within a
// bin; give each variable's combo to up to x rows of the bin, rows by
// ascending key, never overwriting.
inline void greedyFill(JoinView& view, const BinSpace& bs, const ComboPool& pool,
                       const IntegerSolution& sol) {
  if (bs.combos.empty()) return;
  for (size_t b = 0; b < bs.binCount(); ++b) {
    for (size_t c = 0; c < bs.combos.size(); ++c) {
      int64_t want = sol.x[bs.varOf(b, c)];
      if (want <= 0) continue;
      for (size_t row : bs.binRows[b]) {
        if (want == 0) break;
        if (detail::rowTouched(view, pool.bIndex, row)) continue;
        for (size_t i = 0; i < pool.bIndex.size(); ++i)
          view.setB(row, pool.bIndex[i], bs.combos[c][i]);
        --want;
      }
    }
  }
}

//------------------------------------------------------------------ dump-lp

inline std::string dumpSystem(const LinearSystem& sys, const BinSpace& bs) {
  std::string out = "\\ minimize sum |row - target|\n";
  for (size_t v = 0; v < sys.nVars; ++v) {
    size_t b = bs.binOfVar(static_cast<int>(v)), c = bs.comboOfVar(static_cast<int>(v));
    out += "\\ x" + std::to_string(v) + " = bin" + std::to_string(b) + "{";
    for (size_t i = 0; i < bs.iv.cols.size(); ++i) {
      if (i) out += ",";
      out += bs.iv.cols[i] + "=" + bs.binSig[b][i].toText();
    }
    out += "}";
    if (!bs.combos.empty()) {
      out += " x combo{";
      for (size_t i = 0; i < bs.comboCols.size(); ++i) {
        if (i) out += ",";
        out += bs.comboCols[i] + "=" + bs.combos[c][i].toText();
      }
      out += "}";
    }
    out += "\n";
  }
  for (const auto& row : sys.rows) {
    out += row.label + ":";
    for (int v : row.vars) out += " x" + std::to_string(v);
    out += " = " + std::to_string(row.target) + "\n";
  }
  for (size_t v = 0; v < sys.nVars; ++v)
    out += "0 <= x" + std::to_string(v) + " <= " + std::to_string(sys.ub[v]) + "\n";
  return out;
}

}  // namespace linksynth

#endif
