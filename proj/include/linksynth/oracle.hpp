#ifndef LINKSYNTH_ORACLE_HPP
#define LINKSYNTH_ORACLE_HPP

//===========================================================================
// Ground truth for small instances: an exhaustive decision procedure for the
// completion problem (all DCs hold, every CC count hits its target exactly),
// plus the NAE-3SAT reduction that witnesses its hardness.
//===========================================================================

#include <array>
#include <cstdint>
#include <sstream>
#include <vector>

#include "linksynth/constraints.hpp"
#include "linksynth/io.hpp"

namespace linksynth {

struct OracleResult {
  bool sat = false;
  std::vector<int64_t> fk;  // witness, ordered like r1 rows by ascending key
  uint64_t explored = 0;    // assignments visited (leaves + prefixes)
};

namespace detail {

inline bool condsSatisfiedRow(const CondMap& conds, const Relation& rel, size_t row) {
  for (const auto& [col, cond] : conds) {
    int c = rel.schema().indexOf(col);
    if (c < 0) return false;
    if (!cond.satisfied(rel.row(row)[c])) return false;
  }
  return true;
}

}  // namespace detail

// Exhaustive search over all |r2|^|r1| completions with two prunings: a DC
// check on every prefix and CC count windows (a count already past its target
// or unable to reach it kills the branch). Guarded to 1e8 assignments.
inline OracleResult bruteForceDecide(const Relation& r1, const Relation& r2,
                                     const ConstraintSet& cs) {
  int pk1 = r1.schema().pkIndex(), pk2 = r2.schema().pkIndex();
  std::vector<size_t> rows(r1.size());
  for (size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::sort(rows.begin(), rows.end(), [&](size_t a, size_t b) {
    return r1.row(a)[pk1].asInt() < r1.row(b)[pk1].asInt();
  });
  std::vector<int64_t> keys;
  std::vector<size_t> keyRow;
  {
    std::vector<size_t> order(r2.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return r2.row(a)[pk2].asInt() < r2.row(b)[pk2].asInt();
    });
    for (size_t i : order) {
      keys.push_back(r2.row(i)[pk2].asInt());
      keyRow.push_back(i);
    }
  }

  double space = 1;
  for (size_t i = 0; i < rows.size(); ++i) {
    space *= static_cast<double>(std::max<size_t>(1, keys.size()));
    if (space > 1e8) fail(Errc::InstanceTooLarge, "oracle search space exceeds 1e8");
  }

  // per row/key: which CCs' R1/R2 side holds
  size_t nCC = cs.ccs.size();
  std::vector<std::vector<char>> r1Side(rows.size(), std::vector<char>(nCC, 0));
  std::vector<std::vector<char>> r2Side(keys.size(), std::vector<char>(nCC, 0));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t c = 0; c < nCC; ++c)
      r1Side[i][c] = detail::condsSatisfiedRow(cs.ccs[c].r1Conds, r1, rows[i]);
  for (size_t k = 0; k < keys.size(); ++k)
    for (size_t c = 0; c < nCC; ++c)
      r2Side[k][c] = detail::condsSatisfiedRow(cs.ccs[c].r2Conds, r2, keyRow[k]);
  // how many R1-matching rows remain from depth d on
  std::vector<std::vector<int64_t>> suffix(rows.size() + 1, std::vector<int64_t>(nCC, 0));
  for (size_t d = rows.size(); d-- > 0;)
    for (size_t c = 0; c < nCC; ++c) suffix[d][c] = suffix[d + 1][c] + r1Side[d][c];

  OracleResult res;
  if (rows.empty()) {
    res.sat = true;
    for (size_t c = 0; c < nCC; ++c)
      if (cs.ccs[c].target != 0) res.sat = false;
    return res;
  }
  if (keys.empty()) return res;  // no household to point at

  std::vector<int> choice(rows.size(), -1);
  std::vector<int64_t> counts(nCC, 0);

  std::function<bool(size_t)> dfs = [&](size_t d) -> bool {
    if (d == rows.size()) {
      for (size_t c = 0; c < nCC; ++c)
        if (counts[c] != cs.ccs[c].target) return false;
      return true;
    }
    for (size_t k = 0; k < keys.size(); ++k) {
      ++res.explored;
      choice[d] = static_cast<int>(k);
      // DCs over same-household prefixes that include the new row
      bool ok = true;
      std::vector<size_t> house;
      for (size_t q = 0; q <= d; ++q)
        if (choice[q] == static_cast<int>(k)) house.push_back(rows[q]);
      for (const auto& dc : cs.dcs) {
        if (static_cast<int>(house.size()) < dc.arity) continue;
        std::vector<size_t> tuple(dc.arity);
        std::function<bool(int, bool)> rec = [&](int p, bool hasNew) -> bool {
          if (p == dc.arity) return hasNew && evalDCBody(dc, r1, tuple);
          for (size_t h : house) {
            bool dup = false;
            for (int q = 0; q < p; ++q)
              if (tuple[q] == h) dup = true;
            if (dup) continue;
            tuple[p] = h;
            if (rec(p + 1, hasNew || h == rows[d])) return true;
          }
          return false;
        };
        if (rec(0, false)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        for (size_t c = 0; c < nCC; ++c) {
          if (r1Side[d][c] && r2Side[k][c]) ++counts[c];
          if (counts[c] > cs.ccs[c].target ||
              counts[c] + suffix[d + 1][c] < cs.ccs[c].target)
            ok = false;
        }
        if (ok && dfs(d + 1)) return true;
        for (size_t c = 0; c < nCC; ++c)
          if (r1Side[d][c] && r2Side[k][c]) --counts[c];
      }
      choice[d] = -1;
    }
    return false;
  };

  if (dfs(0)) {
    res.sat = true;
    res.fk.resize(rows.size());
    for (size_t d = 0; d < rows.size(); ++d) res.fk[d] = keys[choice[d]];
  }
  return res;
}

//------------------------------------------------------------------ NAE-3SAT

// literal = +-var, 1-based
struct Nae3SatFormula {
  int vars = 0;
  std::vector<std::array<int, 3>> clauses;
};

inline Nae3SatFormula parseDimacs(const std::string& text) {
  Nae3SatFormula f;
  std::istringstream in(text);
  std::string line;
  int declared = -1;
  std::vector<int> lits;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      ls >> p >> fmt >> f.vars >> declared;
      if (fmt != "cnf" || f.vars < 0) fail(Errc::Parse, "bad DIMACS header");
      continue;
    }
    int lit;
    while (ls >> lit) {
      if (lit == 0) {
        if (lits.size() != 3) fail(Errc::ArityError, "clause is not 3 literals");
        f.clauses.push_back({lits[0], lits[1], lits[2]});
        lits.clear();
      } else {
        if (std::abs(lit) > f.vars) fail(Errc::Parse, "literal out of range");
        lits.push_back(lit);
      }
    }
  }
  if (!lits.empty()) fail(Errc::Parse, "unterminated clause");
  if (declared >= 0 && static_cast<int>(f.clauses.size()) != declared)
    fail(Errc::Parse, "clause count does not match header");
  return f;
}

// Reference semantics: every clause needs at least one true and one false
// literal. Exhaustive over 2^vars, so only for small formulas.
inline bool naeSatisfiable(const Nae3SatFormula& f) {
  if (f.vars > 20) fail(Errc::InstanceTooLarge, "naeSatisfiable limited to 20 variables");
  for (uint32_t m = 0; m < (1u << f.vars); ++m) {
    bool ok = true;
    for (const auto& cl : f.clauses) {
      int t = 0;
      for (int lit : cl) {
        bool v = (m >> (std::abs(lit) - 1)) & 1u;
        if (lit < 0) v = !v;
        t += v;
      }
      if (t == 0 || t == 3) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

struct ReducedInstance {
  Relation r1;
  Relation r2;
  ConstraintSet cs;
};

// One R1 row per literal occurrence (variable, sign, clause) and two truth
// households 0/1. dc1 keeps a variable's signs apart, dc2 caps a clause at
// two rows per household; completions are exactly the NAE assignments.
inline ReducedInstance reduceNae3Sat(const Nae3SatFormula& f) {
  Schema s1("occurrence", {{"oid", ColumnKind::Integer, ColumnRole::PrimaryKey},
                           {"var", ColumnKind::Integer, ColumnRole::Data},
                           {"alpha", ColumnKind::Integer, ColumnRole::Data},
                           {"cls", ColumnKind::Integer, ColumnRole::Data},
                           {"hh", ColumnKind::Integer, ColumnRole::ForeignKey}});
  Schema s2("truth", {{"hid", ColumnKind::Integer, ColumnRole::PrimaryKey}});
  Relation r1(s1), r2(s2);
  int64_t oid = 1;
  for (size_t j = 0; j < f.clauses.size(); ++j)
    for (int lit : f.clauses[j])
      r1.append({Value::ofInt(oid++), Value::ofInt(std::abs(lit)),
                 Value::ofInt(lit > 0 ? 1 : 0), Value::ofInt(static_cast<int64_t>(j) + 1),
                 Value::null()});
  r2.append({Value::ofInt(0)});
  r2.append({Value::ofInt(1)});

  std::string json = R"({
  "ccs": [],
  "dcs": [
    {"id": "dc1", "arity": 2, "body": [
      {"t": 1, "col": "var", "op": "=", "t2": 2, "col2": "var"},
      {"t": 1, "col": "alpha", "op": "!=", "t2": 2, "col2": "alpha"}
    ]},
    {"id": "dc2", "arity": 3, "body": [
      {"t": 1, "col": "cls", "op": "=", "t2": 2, "col2": "cls"},
      {"t": 1, "col": "cls", "op": "=", "t2": 3, "col2": "cls"}
    ]}
  ]
})";
  ReducedInstance out{std::move(r1), std::move(r2),
                      parseConstraints(json, s1, s2)};
  return out;
}

}  // namespace linksynth

#endif
