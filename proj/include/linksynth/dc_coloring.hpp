#ifndef LINKSYNTH_DC_COLORING_HPP
#define LINKSYNTH_DC_COLORING_HPP

//===========================================================================
// Phase II: turn the filled B-columns into an FK assignment. Rows are
// partitioned by their active-column combo, a conflict hypergraph is built
// per partition from the DC bodies, and a largest-first coloring picks a
// compatible R2 key per row; rows no key can serve get fresh keys backed by
// newly materialized R2 rows.
//===========================================================================

#include <array>
#include <atomic>
#include <cstdint>
#include <set>
#include <thread>
#include <unordered_map>
#include <vector>

#include "linksynth/cc_ilp.hpp"

namespace linksynth {

//---------------------------------------------------------------- partitions

struct Partition {
  std::vector<Value> combo;        // active-column values (empty when no active columns)
  std::vector<size_t> rows;        // view rows, ascending R1 key
  std::vector<int64_t> candidates; // matching R2 keys, ascending
};

// Group assignable rows by their active-column sub-combo. Excluded rows
// (invalid ones without a real combo) are left out. With no active columns
// everything lands in one partition whose candidate list is every R2 key.
inline std::vector<Partition> partitionView(const JoinView& view, const ComboPool& pool,
                                            const std::vector<char>& excluded) {
  std::map<std::vector<Value>, Partition> parts;
  for (size_t row : detail::rowsByKey(view)) {
    if (!excluded.empty() && excluded[row]) continue;
    std::vector<Value> combo;
    combo.reserve(pool.bIndex.size());
    for (int b : pool.bIndex) combo.push_back(view.b(row, b));
    parts[combo].rows.push_back(row);
  }
  const Relation& r2 = view.r2();
  int pk2 = r2.schema().pkIndex();
  std::vector<Partition> out;
  for (auto& [combo, part] : parts) {
    part.combo = combo;
    for (size_t j = 0; j < r2.size(); ++j) {
      bool match = true;
      for (size_t i = 0; i < pool.bIndex.size(); ++i)
        if (!(r2.row(j)[view.bSourceCol(pool.bIndex[i])] == combo[i])) {
          match = false;
          break;
        }
      if (match) part.candidates.push_back(r2.row(j)[pk2].asInt());
    }
    std::sort(part.candidates.begin(), part.candidates.end());
    out.push_back(std::move(part));
  }
  return out;
}

//----------------------------------------------------------- conflict graph

struct ConflictEdge {
  std::vector<int> verts;  // local vertex ids, ascending
  std::string dcId;        // first DC that produced the edge
};

struct ConflictGraph {
  std::vector<size_t> rows;               // vertex -> view row
  std::vector<int64_t> keys;              // vertex -> R1 key (tie-breaking)
  std::vector<ConflictEdge> edges;
  std::vector<std::vector<int>> incident; // vertex -> edge indices
};

// Hyperedge per distinct row set whose members satisfy some DC body under
// at least one ordered binding: those rows cannot all share one household.
// Per-position prefiltering on the unary atoms keeps enumeration tractable.
inline ConflictGraph buildConflictGraph(const JoinView& view, const std::vector<size_t>& rows,
                                        const std::vector<ForeignKeyDC>& dcs) {
  ConflictGraph g;
  g.rows = rows;
  const Relation& r1 = view.r1();
  int pk = r1.schema().pkIndex();
  for (size_t row : rows) g.keys.push_back(r1.row(row)[pk].asInt());
  g.incident.assign(rows.size(), {});

  std::map<std::vector<int>, int> seen;  // sorted verts -> edge index
  std::vector<size_t> tuple;
  std::vector<int> chosen;
  for (const auto& dc : dcs) {
    // unary prefilter per tuple position
    std::vector<std::vector<int>> cand(dc.arity);
    for (int p = 0; p < dc.arity; ++p)
      for (size_t v = 0; v < rows.size(); ++v) {
        bool ok = true;
        for (const auto& atom : dc.body) {
          if (atom.varVar || atom.t != p + 1) continue;
          const Value& cell = r1.row(rows[v])[atom.colIdx];
          if (cell.isNull() || !applyCmp(cell, atom.op, atom.value)) {
            ok = false;
            break;
          }
        }
        if (ok) cand[p].push_back(static_cast<int>(v));
      }

    tuple.assign(dc.arity, 0);
    chosen.assign(dc.arity, 0);
    std::function<void(int)> rec = [&](int p) {
      if (p == dc.arity) {
        if (!evalDCBody(dc, r1, tuple)) return;
        std::vector<int> key = chosen;
        std::sort(key.begin(), key.end());
        auto [it, inserted] = seen.emplace(key, static_cast<int>(g.edges.size()));
        if (!inserted) return;
        ConflictEdge e;
        e.verts = key;
        e.dcId = dc.id;
        for (int v : key) g.incident[v].push_back(it->second);
        g.edges.push_back(std::move(e));
        return;
      }
      for (int v : cand[p]) {
        bool dup = false;
        for (int q = 0; q < p; ++q)
          if (chosen[q] == v) dup = true;
        if (dup) continue;
        chosen[p] = v;
        tuple[p] = rows[v];
        rec(p + 1);
      }
    };
    rec(0);
  }
  return g;
}

//------------------------------------------------------------- largest-first

struct ColoringResult {
  std::vector<int64_t> color;   // per vertex, -1 = skipped
  std::vector<int> skipped;     // vertex ids left uncolored, in visit order
};

// Largest-first greedy: vertices by non-increasing degree, ties by ascending
// R1 key. A color is forbidden for v iff some incident edge has every other
// vertex already in exactly that color; take the smallest allowed candidate.
inline ColoringResult coloringLF(const ConflictGraph& g,
                                 const std::vector<std::vector<int64_t>>& candidates,
                                 std::vector<int64_t> initial = {}) {
  size_t n = g.rows.size();
  ColoringResult res;
  res.color = initial.empty() ? std::vector<int64_t>(n, -1) : std::move(initial);

  std::vector<int> order;
  for (size_t v = 0; v < n; ++v)
    if (res.color[v] == -1) order.push_back(static_cast<int>(v));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    size_t da = g.incident[a].size(), db = g.incident[b].size();
    if (da != db) return da > db;
    return g.keys[a] < g.keys[b];
  });

  for (int v : order) {
    std::set<int64_t> forbidden;
    for (int ei : g.incident[v]) {
      const auto& e = g.edges[ei];
      int64_t c = -1;
      bool uniform = true;
      for (int u : e.verts) {
        if (u == v) continue;
        if (res.color[u] == -1) {
          uniform = false;
          break;
        }
        if (c == -1)
          c = res.color[u];
        else if (c != res.color[u])
          uniform = false;
        if (!uniform) break;
      }
      if (uniform && c != -1) forbidden.insert(c);
    }
    int64_t pick = -1;
    for (int64_t cand : candidates[v])
      if (!forbidden.count(cand)) {
        pick = cand;
        break;
      }
    if (pick == -1)
      res.skipped.push_back(v);
    else
      res.color[v] = pick;
  }
  return res;
}

inline ColoringResult coloringLF(const ConflictGraph& g, const std::vector<int64_t>& uniform) {
  return coloringLF(g, std::vector<std::vector<int64_t>>(g.rows.size(), uniform));
}

//---------------------------------------------------------------- fresh keys

class FreshKeyAllocator {
 public:
  explicit FreshKeyAllocator(int64_t start) : next_(start) {}
  int64_t allocate() { return next_++; }
  int64_t peek() const { return next_; }

 private:
  int64_t next_;
};

inline int64_t maxKey(const Relation& r) {
  int pk = r.schema().pkIndex();
  int64_t m = 0;
  for (size_t i = 0; i < r.size(); ++i) m = std::max(m, r.row(i)[pk].asInt());
  return m;
}

// Fresh R2 row: new key, the partition's combo on the active columns, and the
// smallest active-domain value everywhere else (null when the column has no
// values at all).
inline std::vector<Value> freshR2Row(const Relation& r2, const JoinView& view, int64_t key,
                                     const ComboPool& pool, const std::vector<Value>& combo) {
  const Schema& s = r2.schema();
  std::vector<Value> row(s.size(), Value::null());
  row[s.pkIndex()] = Value::ofInt(key);
  for (int c = 0; c < s.size(); ++c) {
    if (c == s.pkIndex()) continue;
    auto dom = r2.activeDomain(c);
    if (!dom.empty()) row[c] = dom.front();
  }
  for (size_t i = 0; i < pool.bIndex.size(); ++i)
    row[view.bSourceCol(pool.bIndex[i])] = combo[i];
  return row;
}

//----------------------------------------------------------------- completeFK

struct FKConfig {
  int workers = 0;  // <=1 runs partitions sequentially
};

struct FKStats {
  size_t partitions = 0;
  size_t freshRows = 0;
  size_t invalidRows = 0;
  std::vector<std::array<size_t, 2>> shapes;  // per partition: {vertices, edges}
};

namespace detail {

struct PartitionColoring {
  ColoringResult coloring;
  ConflictGraph graph;
  std::vector<int64_t> freshUsed;  // ascending
};

// Color one partition: real candidates first, then (if needed) a second pass
// over the skipped vertices with |skipped| fresh keys, which always succeeds
// because at most |skipped|-1 of them can be forbidden for any vertex.
inline PartitionColoring colorPartition(const JoinView& view, const Partition& part,
                                        const std::vector<ForeignKeyDC>& dcs,
                                        FreshKeyAllocator alloc) {
  PartitionColoring pc;
  pc.graph = buildConflictGraph(view, part.rows, dcs);
  pc.coloring = coloringLF(pc.graph, part.candidates);
  if (!pc.coloring.skipped.empty()) {
    std::vector<int64_t> fresh;
    for (size_t i = 0; i < pc.coloring.skipped.size(); ++i) fresh.push_back(alloc.allocate());
    std::vector<std::vector<int64_t>> cands(part.rows.size());
    for (int v : pc.coloring.skipped) cands[v] = fresh;
    ColoringResult second = coloringLF(pc.graph, cands, pc.coloring.color);
    if (!second.skipped.empty()) fail(Errc::Internal, "fresh-color pass left vertices uncolored");
    pc.coloring = std::move(second);
    std::set<int64_t> used;
    for (size_t v = 0; v < part.rows.size(); ++v)
      if (pc.coloring.color[v] > 0 &&
          std::binary_search(fresh.begin(), fresh.end(), pc.coloring.color[v]))
        used.insert(pc.coloring.color[v]);
    pc.freshUsed.assign(used.begin(), used.end());
  }
  return pc;
}

}  // namespace detail

// Assign a household key to every non-invalid view row and append R2 rows for
// the fresh keys that were actually used. In parallel mode each partition
// pre-reserves a key range as large as the partition so the colorings are
// independent; results are deterministic for a given flag setting either way.
inline FKStats completeFK(const JoinView& view, Relation& r2Hat, std::vector<int64_t>& fk,
                          const std::vector<ForeignKeyDC>& dcs, const ComboPool& pool,
                          const std::vector<char>& invalid, const FKConfig& cfg = {}) {
  std::vector<Partition> parts = partitionView(view, pool, invalid);
  FKStats stats;
  stats.partitions = parts.size();
  fk.assign(view.r1().size(), -1);

  std::vector<detail::PartitionColoring> results(parts.size());
  int64_t base = maxKey(r2Hat) + 1;
  if (cfg.workers > 1) {
    std::vector<int64_t> starts(parts.size());
    int64_t next = base;
    for (size_t p = 0; p < parts.size(); ++p) {
      starts[p] = next;
      next += static_cast<int64_t>(parts[p].rows.size());
    }
    unsigned workers = static_cast<unsigned>(cfg.workers);
    std::vector<std::thread> pool_;
    std::atomic<size_t> cursor{0};
    for (unsigned w = 0; w < workers; ++w)
      pool_.emplace_back([&]() {
        for (size_t p = cursor.fetch_add(1); p < parts.size(); p = cursor.fetch_add(1))
          results[p] = detail::colorPartition(view, parts[p], dcs, FreshKeyAllocator(starts[p]));
      });
    for (auto& t : pool_) t.join();
  } else {
    int64_t next = base;
    for (size_t p = 0; p < parts.size(); ++p) {
      results[p] = detail::colorPartition(view, parts[p], dcs, FreshKeyAllocator(next));
      if (!results[p].freshUsed.empty()) next = results[p].freshUsed.back() + 1;
    }
  }

  for (size_t p = 0; p < parts.size(); ++p) {
    const Partition& part = parts[p];
    const auto& pc = results[p];
    stats.shapes.push_back({part.rows.size(), pc.graph.edges.size()});
    for (size_t v = 0; v < part.rows.size(); ++v) fk[part.rows[v]] = pc.coloring.color[v];
    for (int64_t key : pc.freshUsed) {
      r2Hat.append(freshR2Row(r2Hat, view, key, pool, part.combo));
      ++stats.freshRows;
    }
  }
  return stats;
}

//--------------------------------------------------------- invalid-row repair

// Invalid rows (no combo left in the pool) are fixed one by one, ascending
// key: pick the combo whose adoption moves the total relative CC error least
// (ties to the lexicographically first), then the smallest compatible
// household of that combo, else a fresh one. CC counts update as we go.
inline void solveInvalidTuples(JoinView& view, Relation& r2Hat, std::vector<int64_t>& fk,
                               const ConstraintSet& cs, const ComboPool& pool,
                               const std::vector<char>& invalid, FKStats& stats) {
  std::vector<size_t> todo;
  for (size_t row : detail::rowsByKey(view))
    if (row < invalid.size() && invalid[row]) todo.push_back(row);
  if (todo.empty()) return;
  stats.invalidRows = todo.size();
  if (pool.all.empty()) fail(Errc::Internal, "invalid rows with an empty combo space");

  // current counts; invalid rows have null B cells and never match the R2 side
  std::vector<int64_t> counts(cs.ccs.size(), 0);
  for (size_t i = 0; i < cs.ccs.size(); ++i)
    for (size_t row = 0; row < view.r1().size(); ++row)
      if (cs.ccs[i].r1Satisfied(view, row) && cs.ccs[i].r2Satisfied(view, row)) ++counts[i];

  std::unordered_map<int64_t, std::vector<size_t>> households;
  for (size_t row = 0; row < fk.size(); ++row)
    if (fk[row] >= 0) households[fk[row]].push_back(row);
  int pk2 = r2Hat.schema().pkIndex();

  FreshKeyAllocator alloc(maxKey(r2Hat) + 1);
  for (size_t row : todo) {
    // best combo by exact error delta
    size_t bestCombo = 0;
    double bestDelta = 0;
    std::vector<char> bestMatch;
    for (size_t ci = 0; ci < pool.all.size(); ++ci) {
      double delta = 0;
      std::vector<char> match(cs.ccs.size(), 0);
      for (size_t i = 0; i < cs.ccs.size(); ++i) {
        const LinearCC& cc = cs.ccs[i];
        if (!cc.r1Satisfied(view, row)) continue;
        if (!comboSatisfies(cc.r2Conds, pool.columns, pool.all[ci])) continue;
        match[i] = 1;
        delta += relativeCCError(counts[i] + 1, cc.target) - relativeCCError(counts[i], cc.target);
      }
      if (ci == 0 || delta < bestDelta) {
        bestCombo = ci;
        bestDelta = delta;
        bestMatch = std::move(match);
      }
    }
    const std::vector<Value>& combo = pool.all[bestCombo];
    for (size_t i = 0; i < pool.bIndex.size(); ++i) view.setB(row, pool.bIndex[i], combo[i]);
    for (size_t i = 0; i < cs.ccs.size(); ++i)
      if (bestMatch[i]) ++counts[i];

    // smallest compatible household with that combo
    std::vector<int64_t> keys;
    for (size_t j = 0; j < r2Hat.size(); ++j) {
      bool m = true;
      for (size_t i = 0; i < pool.bIndex.size(); ++i)
        if (!(r2Hat.row(j)[view.bSourceCol(pool.bIndex[i])] == combo[i])) {
          m = false;
          break;
        }
      if (m) keys.push_back(r2Hat.row(j)[pk2].asInt());
    }
    std::sort(keys.begin(), keys.end());

    int64_t chosen = -1;
    for (int64_t key : keys) {
      const auto& members = households[key];
      bool clash = false;
      for (const auto& dc : cs.dcs) {
        std::vector<size_t> all(members);
        all.push_back(row);
        // any ordered tuple of distinct members that includes the new row
        std::vector<size_t> tuple(dc.arity);
        std::function<bool(int, bool)> rec = [&](int p, bool hasNew) -> bool {
          if (p == dc.arity) return hasNew && evalDCBody(dc, view.r1(), tuple);
          for (size_t m : all) {
            bool dup = false;
            for (int q = 0; q < p; ++q)
              if (tuple[q] == m) dup = true;
            if (dup) continue;
            tuple[p] = m;
            if (rec(p + 1, hasNew || m == row)) return true;
          }
          return false;
        };
        if (rec(0, false)) {
          clash = true;
          break;
        }
      }
      if (!clash) {
        chosen = key;
        break;
      }
    }
    if (chosen == -1) {
      chosen = alloc.allocate();
      r2Hat.append(freshR2Row(r2Hat, view, chosen, pool, combo));
      ++stats.freshRows;
    }
    fk[row] = chosen;
    households[chosen].push_back(row);
  }
}

}  // namespace linksynth

#endif
