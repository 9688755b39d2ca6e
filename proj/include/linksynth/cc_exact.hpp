#ifndef LINKSYNTH_CC_EXACT_HPP
#define LINKSYNTH_CC_EXACT_HPP

//===========================================================================
// Exact solver for non-intersecting CC sets: bottom-up recursion over each
// containment diagram, then leftover rows are completed from the pool of
// combos no CC cares about.
//===========================================================================

#include <map>
#include <string>
#include <vector>

#include "linksynth/cc_analysis.hpp"

namespace linksynth {

// Cross product of active-domain values over the CC-referenced B columns.
// `unused` keeps the combos that satisfy no CC's (non-empty) R2 condition;
// a CC constraining a subset of the columns rules out every completion.
struct ComboPool {
  std::vector<std::string> columns;      // active B columns, R2 schema order
  std::vector<int> bIndex;               // view B index per column
  std::vector<std::vector<Value>> all;   // lexicographic
  std::vector<std::vector<Value>> unused;
};

inline bool comboMatchesCC(const LinearCC& cc, const std::vector<std::string>& cols,
                           const std::vector<Value>& combo) {
  if (cc.r2Conds.empty()) return false;  // combo choice cannot change an R1-only CC
  for (const auto& [col, cond] : cc.r2Conds) {
    for (size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == col) {
        if (!cond.satisfied(combo[i])) return false;
        break;
      }
  }
  return true;
}

inline ComboPool computeComboPool(const std::vector<LinearCC>& ccs, const Relation& r2,
                                  const JoinView& view) {
  ComboPool pool;
  pool.columns = activeBColumns(ccs, r2.schema());
  std::vector<std::vector<Value>> domains;
  size_t total = 1;
  for (const auto& col : pool.columns) {
    int b = view.bIndexOf(col);
    if (b < 0) fail(Errc::UnknownColumn, "active column " + col + " missing from view");
    pool.bIndex.push_back(b);
    domains.push_back(r2.activeDomain(r2.schema().requireIndex(col)));
    total *= std::max<size_t>(1, domains.back().size());
    if (total > 1000000) fail(Errc::InstanceTooLarge, "combo space over 1e6");
  }
  std::vector<Value> cur(pool.columns.size());
  std::function<void(size_t)> rec = [&](size_t d) {
    if (d == domains.size()) {
      pool.all.push_back(cur);
      return;
    }
    for (const auto& v : domains[d]) {
      cur[d] = v;
      rec(d + 1);
    }
  };
  rec(0);
  for (const auto& combo : pool.all) {
    bool matched = false;
    for (const auto& cc : ccs)
      if (comboMatchesCC(cc, pool.columns, combo)) {
        matched = true;
        break;
      }
    if (!matched) pool.unused.push_back(combo);
  }
  return pool;
}

// What Algorithm-2-style filling did, per CC and per leftover row.
struct FillLedger {
  std::map<std::string, int64_t> assignedPerCC;
  std::map<std::string, int64_t> shortfalls;  // rows we wanted but could not find
  std::vector<size_t> invalidRows;            // leftover rows with an empty pool
  size_t pooledRows = 0;
};

namespace detail {

// A row counts as touched once any active column has a value.
inline bool rowTouched(const JoinView& view, const std::vector<int>& activeB, size_t row) {
  for (int b : activeB)
    if (!view.b(row, b).isNull()) return true;
  return false;
}

// Concrete value a CC's R2 condition pins on one column.
inline Value condValue(const ColumnCond& cond, const std::vector<Value>& domain) {
  if (cond.kind == ColumnKind::Integer) {
    if (cond.lo != std::numeric_limits<int64_t>::min()) return Value::ofInt(cond.lo);
    if (cond.hi != std::numeric_limits<int64_t>::max()) return Value::ofInt(cond.hi);
    return domain.empty() ? Value::null() : domain.front();
  }
  if (cond.eq) return *cond.eq;
  for (const auto& v : domain)
    if (cond.satisfied(v)) return v;
  return Value::null();
}

inline std::vector<size_t> rowsByKey(const JoinView& view) {
  std::vector<size_t> byKey(view.size());
  for (size_t i = 0; i < byKey.size(); ++i) byKey[i] = i;
  std::sort(byKey.begin(), byKey.end(),
            [&](size_t a, size_t b) { return view.key(a) < view.key(b); });
  return byKey;
}

}  // namespace detail

// Completes every row that still misses active-column values. Untouched rows
// cycle through the unused pool (round-robin from comboStart); partially
// assigned rows get the lexicographically first completion that newly matches
// as few CCs as possible (impact checked against the row's R1 side).
inline void fillLeftoverRows(JoinView& view, const ComboPool& pool, size_t comboStart,
                             FillLedger& ledger, const std::vector<LinearCC>* ccs = nullptr) {
  if (pool.columns.empty()) return;
  const Relation& r2 = view.r2();
  std::map<std::string, std::vector<Value>> domains;
  for (const auto& col : pool.columns)
    domains[col] = r2.activeDomain(r2.schema().requireIndex(col));

  size_t next = pool.unused.empty() ? 0 : comboStart % pool.unused.size();
  for (size_t row : detail::rowsByKey(view)) {
    bool anySet = false, anyNull = false;
    for (int b : pool.bIndex)
      (view.b(row, b).isNull() ? anyNull : anySet) = true;
    if (!anyNull) continue;
    if (!anySet) {
      if (pool.unused.empty()) {
        ledger.invalidRows.push_back(row);
        continue;
      }
      const auto& combo = pool.unused[next];
      next = (next + 1) % pool.unused.size();
      for (size_t i = 0; i < pool.bIndex.size(); ++i) view.setB(row, pool.bIndex[i], combo[i]);
      ++ledger.pooledRows;
      continue;
    }

    // partial row: search completions over the missing columns
    std::vector<size_t> missing;
    size_t space = 1;
    for (size_t i = 0; i < pool.bIndex.size(); ++i)
      if (view.b(row, pool.bIndex[i]).isNull()) {
        missing.push_back(i);
        space *= std::max<size_t>(1, domains[pool.columns[i]].size());
      }
    std::vector<Value> base(pool.bIndex.size());
    for (size_t i = 0; i < pool.bIndex.size(); ++i) base[i] = view.b(row, pool.bIndex[i]);

    if (space > 100000) {
      for (size_t i : missing) {
        const auto& dom = domains[pool.columns[i]];
        if (!dom.empty()) view.setB(row, pool.bIndex[i], dom.front());
      }
      continue;
    }

    auto newMatches = [&](const std::vector<Value>& combo) {
      if (!ccs) return 0;
      int n = 0;
      for (const auto& cc : *ccs) {
        if (cc.r2Conds.empty()) continue;
        if (!comboMatchesCC(cc, pool.columns, combo)) continue;
        if (comboMatchesCC(cc, pool.columns, base)) continue;  // already counted
        bool r1ok = true;
        for (const auto& [col, cond] : cc.r1Conds)
          if (!cond.satisfied(view.r1().row(row)[view.r1().schema().indexOf(col)])) {
            r1ok = false;
            break;
          }
        if (r1ok) ++n;
      }
      return n;
    };

    std::vector<Value> best, cur = base;
    int bestScore = -1;
    std::function<void(size_t)> rec = [&](size_t d) {
      if (bestScore == 0) return;
      if (d == missing.size()) {
        int s = newMatches(cur);
        if (bestScore < 0 || s < bestScore) {
          bestScore = s;
          best = cur;
        }
        return;
      }
      for (const auto& v : domains[pool.columns[missing[d]]]) {
        cur[missing[d]] = v;
        rec(d + 1);
        if (bestScore == 0) return;
      }
    };
    rec(0);
    if (!best.empty())
      for (size_t i : missing) view.setB(row, pool.bIndex[i], best[i]);
  }
}

// Bottom-up exact fill. `ccs` must be pairwise non-intersecting and `forest`
// built over exactly these CCs. Rows already holding values are never
// reused. When fillLeftovers is set the pool pass runs here (standalone use);
// the hybrid pipeline runs it after the ILP stage instead.
inline FillLedger solveExact(JoinView& view, const std::vector<LinearCC>& ccs,
                             const HasseForest& forest, const ComboPool& pool,
                             size_t comboStart = 0, bool fillLeftovers = true) {
  FillLedger ledger;
  const Relation& r2 = view.r2();

  std::map<std::string, std::vector<Value>> domains;
  for (const auto& col : pool.columns)
    domains[col] = r2.activeDomain(r2.schema().requireIndex(col));

  const std::vector<size_t> byKey = detail::rowsByKey(view);

  std::function<void(int)> solveNode = [&](int m) {
    int64_t childSum = 0;
    for (int c : forest.children[m]) {
      solveNode(c);
      childSum += ccs[c].target;
    }
    if (ccs[m].r2Conds.empty()) {
      // R1-only CC: its count is fixed by the data, nothing to assign
      ledger.assignedPerCC[ccs[m].id] = 0;
      return;
    }
    int64_t need = std::max<int64_t>(0, ccs[m].target - childSum);

    // values this node writes (one per constrained column)
    std::vector<std::pair<std::string, Value>> writes;
    for (const auto& [col, cond] : ccs[m].r2Conds) {
      Value v = detail::condValue(cond, domains[col]);
      if (v.isNull()) fail(Errc::Internal, "cannot materialize R2 condition on " + col);
      writes.emplace_back(col, v);
    }
    // Remainder rows must satisfy this node but no child, or the children
    // overshoot. A child can only pick up such a row when the values written
    // here already satisfy its whole R2 side; only then does its R1
    // predicate exclude rows. Otherwise the leftover completion pass steers
    // the remaining columns away from the child.
    std::vector<int> guard;
    for (int c : forest.children[m]) {
      if (ccs[c].r2Conds.empty()) continue;
      bool sat = true;
      for (const auto& [col, cond] : ccs[c].r2Conds) {
        bool found = false;
        for (const auto& [wcol, wv] : writes)
          if (wcol == col) {
            found = true;
            if (!cond.satisfied(wv)) sat = false;
            break;
          }
        if (!found) {
          sat = false;
          break;
        }
      }
      if (sat) guard.push_back(c);
    }

    int64_t taken = 0;
    for (size_t row : byKey) {
      if (taken == need) break;
      if (detail::rowTouched(view, pool.bIndex, row)) continue;
      if (!ccs[m].r1Satisfied(view, row)) continue;
      bool childRow = false;
      for (int c : guard)
        if (ccs[c].r1Satisfied(view, row)) {
          childRow = true;
          break;
        }
      if (childRow) continue;
      for (const auto& [col, v] : writes) view.setB(row, view.bIndexOf(col), v);
      ++taken;
    }
    ledger.assignedPerCC[ccs[m].id] = taken;
    if (taken < need) ledger.shortfalls[ccs[m].id] = need - taken;
  };

  // diagrams by ascending id of their maximal element
  std::vector<int> order;
  for (size_t d = 0; d < forest.diagrams.size(); ++d) {
    if (forest.maximals[d].size() != 1)
      fail(Errc::Internal, "diagram without a unique maximal element in exact solver");
    order.push_back(forest.maximals[d][0]);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ccs[a].id < ccs[b].id; });
  for (int m : order) solveNode(m);

  if (fillLeftovers) fillLeftoverRows(view, pool, comboStart, ledger, &ccs);
  return ledger;
}

}  // namespace linksynth

#endif
