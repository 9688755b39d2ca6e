#ifndef LINKSYNTH_CONSTRAINTS_HPP
#define LINKSYNTH_CONSTRAINTS_HPP

//===========================================================================
// Cardinality constraints (counts over the join view) and denial constraints
// (forbidden tuple combinations within a household). Includes the JSON DSL
// parser, per-column canonical conditions, evaluation, and error measures.
//===========================================================================

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "linksynth/model.hpp"

namespace linksynth {

enum class CmpOp : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

inline const char* opName(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

inline CmpOp parseOp(const std::string& s) {
  if (s == "=") return CmpOp::Eq;
  if (s == "!=") return CmpOp::Ne;
  if (s == "<") return CmpOp::Lt;
  if (s == "<=") return CmpOp::Le;
  if (s == ">") return CmpOp::Gt;
  if (s == ">=") return CmpOp::Ge;
  fail(Errc::Parse, "unknown operator " + s);
}

// Spelled with < and == only so Value (which defines just those) qualifies.
template <typename T>
inline bool applyCmp(const T& a, CmpOp op, const T& b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return !(a == b);
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return !(b < a);
    case CmpOp::Gt: return b < a;
    case CmpOp::Ge: return !(a < b);
  }
  return false;
}

//------------------------------------------------- canonical column condition

// Conjunction of the predicates a CC places on one column, normalized to a
// closed interval (integer) or a required value plus an excluded set
// (categorical).
struct ColumnCond {
  ColumnKind kind = ColumnKind::Integer;
  int64_t lo = std::numeric_limits<int64_t>::min();
  int64_t hi = std::numeric_limits<int64_t>::max();
  std::optional<Value> eq;
  std::vector<Value> ne;  // kept sorted

  bool empty() const {
    if (kind == ColumnKind::Integer) return lo > hi;
    if (eq) {
      for (const auto& x : ne)
        if (x == *eq) return true;
    }
    return false;
  }

  bool satisfied(const Value& v) const {
    if (v.isNull()) return false;
    if (kind == ColumnKind::Integer) {
      int64_t x = v.asInt();
      return x >= lo && x <= hi;
    }
    if (eq && !(v == *eq)) return false;
    for (const auto& x : ne)
      if (v == x) return false;
    return true;
  }

  bool operator==(const ColumnCond& o) const {
    if (kind != o.kind) return false;
    if (kind == ColumnKind::Integer) return lo == o.lo && hi == o.hi;
    return eq == o.eq && ne == o.ne;
  }

  // Fold in one predicate.
  void apply(CmpOp op, const Value& v) {
    if (kind == ColumnKind::Integer) {
      int64_t x = v.asInt();
      switch (op) {
        case CmpOp::Eq: lo = std::max(lo, x); hi = std::min(hi, x); break;
        case CmpOp::Lt: hi = std::min(hi, x - 1); break;
        case CmpOp::Le: hi = std::min(hi, x); break;
        case CmpOp::Gt: lo = std::max(lo, x + 1); break;
        case CmpOp::Ge: lo = std::max(lo, x); break;
        case CmpOp::Ne:
          // representable only at the interval edges; interior holes would
          // need a union type the classifier does not support
          if (lo == x) ++lo;
          else if (hi == x) --hi;
          else fail(Errc::Parse, "interior != on an integer column is not supported");
          break;
      }
    } else {
      switch (op) {
        case CmpOp::Eq:
          if (eq && !(*eq == v)) {
            // contradictory equalities: exclude the required value so empty()
            // reports the condition as unsatisfiable
            auto it = std::lower_bound(ne.begin(), ne.end(), *eq);
            if (it == ne.end() || !(*it == *eq)) ne.insert(it, *eq);
          } else {
            eq = v;
          }
          break;
        case CmpOp::Ne: {
          auto it = std::lower_bound(ne.begin(), ne.end(), v);
          if (it == ne.end() || !(*it == v)) ne.insert(it, v);
          break;
        }
        default: fail(Errc::Parse, "ordering comparison on a categorical column");
      }
    }
  }
};

// Every value satisfying `inner` also satisfies `outer`. Categorical tests are
// conservative under an open domain.
inline bool condContains(const ColumnCond& outer, const ColumnCond& inner) {
  if (outer.kind != inner.kind) return false;
  if (outer.kind == ColumnKind::Integer) return inner.lo >= outer.lo && inner.hi <= outer.hi;
  if (outer.eq) return inner.eq && *inner.eq == *outer.eq;
  // outer is pure exclusion: inner must rule each exclusion out
  for (const auto& x : outer.ne) {
    if (inner.eq) {
      if (*inner.eq == x) return false;
    } else if (!std::binary_search(inner.ne.begin(), inner.ne.end(), x)) {
      return false;
    }
  }
  return true;
}

inline bool condDisjoint(const ColumnCond& a, const ColumnCond& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == ColumnKind::Integer) return std::max(a.lo, b.lo) > std::min(a.hi, b.hi);
  if (a.eq && b.eq) return !(*a.eq == *b.eq);
  if (a.eq) return std::binary_search(b.ne.begin(), b.ne.end(), *a.eq);
  if (b.eq) return std::binary_search(a.ne.begin(), a.ne.end(), *b.eq);
  return false;
}

// Column name -> condition; std::map keeps iteration deterministic.
using CondMap = std::map<std::string, ColumnCond>;

inline bool condMapEquals(const CondMap& a, const CondMap& b) { return a == b; }

// A whole selection is disjoint from another iff some shared column has
// disjoint conditions.
inline bool selectionsDisjoint(const CondMap& a, const CondMap& b) {
  for (const auto& [col, ca] : a) {
    auto it = b.find(col);
    if (it != b.end() && condDisjoint(ca, it->second)) return true;
  }
  return false;
}

// inner uses at least the attributes of outer and narrows each shared one.
inline bool selectionContains(const CondMap& outer, const CondMap& inner) {
  for (const auto& [col, co] : outer) {
    auto it = inner.find(col);
    if (it == inner.end()) return false;
    if (!condContains(co, it->second)) return false;
  }
  return true;
}

//------------------------------------------------------------------------ CC

// One parsed where-item, kept for round-tripping back to JSON.
struct CCPred {
  std::string col;
  ViewSide side = ViewSide::R1;
  ColumnKind kind = ColumnKind::Integer;
  bool isInterval = false;
  CmpOp op = CmpOp::Eq;
  Value value;
  int64_t lo = 0, hi = 0;
};

struct LinearCC {
  std::string id;
  std::vector<CCPred> preds;
  int64_t target = 0;
  CondMap r1Conds, r2Conds;

  bool samePredicates(const LinearCC& o) const {
    return condMapEquals(r1Conds, o.r1Conds) && condMapEquals(r2Conds, o.r2Conds);
  }
  // Union of both sides (column names never collide across the join).
  CondMap allConds() const {
    CondMap m = r1Conds;
    for (const auto& [k, v] : r2Conds) m.emplace(k, v);
    return m;
  }
  bool r1Satisfied(const JoinView& view, size_t row) const {
    for (const auto& [col, cond] : r1Conds) {
      int idx = view.r1().schema().indexOf(col);
      if (!cond.satisfied(view.r1().row(row)[idx])) return false;
    }
    return true;
  }
  bool r2Satisfied(const JoinView& view, size_t row) const {
    for (const auto& [col, cond] : r2Conds) {
      int b = view.bIndexOf(col);
      if (!cond.satisfied(view.b(row, b))) return false;
    }
    return true;
  }
};

//------------------------------------------------------------------------ DC

struct DCAtom {
  int t = 1;  // 1-based tuple variable
  std::string col;
  CmpOp op = CmpOp::Eq;
  bool varVar = false;
  int t2 = 1;
  std::string col2;
  int64_t offset = 0;
  Value value;  // constant atoms
  // resolved at bind time
  int colIdx = -1, col2Idx = -1;
  ColumnKind kind = ColumnKind::Integer;
};

// Conjunctive body over tuple variables t1..t_arity; the FK-equality atoms are
// implicit and never stored.
struct ForeignKeyDC {
  std::string id;
  int arity = 2;
  std::vector<DCAtom> body;
};

struct ConstraintSet {
  std::vector<LinearCC> ccs;
  std::vector<ForeignKeyDC> dcs;

  const LinearCC* findCC(const std::string& id) const {
    for (const auto& c : ccs)
      if (c.id == id) return &c;
    return nullptr;
  }
};

//----------------------------------------------------------------- DSL parse

inline Value jsonScalar(const nlohmann::json& j, ColumnKind kind) {
  if (kind == ColumnKind::Integer) {
    if (!j.is_number_integer()) fail(Errc::Parse, "expected integer value, got " + j.dump());
    return Value::ofInt(j.get<int64_t>());
  }
  if (!j.is_string()) fail(Errc::Parse, "expected string value, got " + j.dump());
  return Value::ofStr(j.get<std::string>());
}

inline ConstraintSet parseConstraints(const nlohmann::json& root, const Schema& r1, const Schema& r2) {
  if (!root.is_object()) fail(Errc::Parse, "constraint document must be an object");
  ConstraintSet out;
  std::set<std::string> ids;

  auto bindColumn = [&](const std::string& col) -> std::pair<ViewSide, const Column*> {
    int i = r1.indexOf(col);
    if (i >= 0) {
      if (i == r1.fkIndex()) fail(Errc::ForbiddenFKReference, "constraint references FK column " + col);
      return {ViewSide::R1, &r1.columns()[i]};
    }
    int j = r2.indexOf(col);
    if (j >= 0 && j != r2.pkIndex()) return {ViewSide::R2, &r2.columns()[j]};
    fail(Errc::UnknownColumn, "constraint references unknown column " + col);
  };

  for (const auto& cj : root.value("ccs", nlohmann::json::array())) {
    LinearCC cc;
    cc.id = cj.at("id").get<std::string>();
    if (!ids.insert(cc.id).second) fail(Errc::Parse, "duplicate constraint id " + cc.id);
    if (!cj.at("target").is_number_integer() || cj.at("target").get<int64_t>() < 0)
      fail(Errc::Parse, "cc " + cc.id + ": target must be a non-negative integer");
    cc.target = cj.at("target").get<int64_t>();
    for (const auto& pj : cj.value("where", nlohmann::json::array())) {
      CCPred p;
      p.col = pj.at("col").get<std::string>();
      auto [side, colInfo] = bindColumn(p.col);
      p.side = side;
      p.kind = colInfo->kind;
      CondMap& conds = (side == ViewSide::R1) ? cc.r1Conds : cc.r2Conds;
      auto [it, inserted] = conds.emplace(p.col, ColumnCond{});
      if (inserted) it->second.kind = p.kind;
      if (pj.contains("in")) {
        if (p.kind != ColumnKind::Integer)
          fail(Errc::Parse, "cc " + cc.id + ": interval on categorical column " + p.col);
        const auto& arr = pj.at("in");
        if (!arr.is_array() || arr.size() != 2) fail(Errc::Parse, "cc " + cc.id + ": malformed range");
        p.isInterval = true;
        p.lo = arr[0].get<int64_t>();
        p.hi = arr[1].get<int64_t>();
        if (p.lo > p.hi) fail(Errc::Parse, "cc " + cc.id + ": malformed range on " + p.col);
        it->second.apply(CmpOp::Ge, Value::ofInt(p.lo));
        it->second.apply(CmpOp::Le, Value::ofInt(p.hi));
      } else {
        p.op = parseOp(pj.at("op").get<std::string>());
        p.value = jsonScalar(pj.at("value"), p.kind);
        it->second.apply(p.op, p.value);
      }
      if (it->second.empty())
        fail(Errc::Parse, "cc " + cc.id + ": contradictory condition on " + p.col);
      cc.preds.push_back(std::move(p));
    }
    for (const auto& prev : out.ccs)
      if (prev.samePredicates(cc) && prev.target != cc.target)
        fail(Errc::ContradictoryCC, cc.id + " duplicates " + prev.id + " with a different target");
    out.ccs.push_back(std::move(cc));
  }

  for (const auto& dj : root.value("dcs", nlohmann::json::array())) {
    ForeignKeyDC dc;
    dc.id = dj.at("id").get<std::string>();
    if (!ids.insert(dc.id).second) fail(Errc::Parse, "duplicate constraint id " + dc.id);
    dc.arity = dj.at("arity").get<int>();
    if (dc.arity < 2) fail(Errc::ArityError, "dc " + dc.id + ": arity must be >= 2");
    for (const auto& aj : dj.value("body", nlohmann::json::array())) {
      DCAtom a;
      a.t = aj.at("t").get<int>();
      if (a.t < 1 || a.t > dc.arity) fail(Errc::ArityError, "dc " + dc.id + ": tuple var out of range");
      a.col = aj.at("col").get<std::string>();
      int ci = r1.indexOf(a.col);
      if (ci < 0) fail(Errc::UnknownColumn, "dc " + dc.id + ": unknown column " + a.col);
      if (ci == r1.fkIndex()) fail(Errc::ForbiddenFKReference, "dc " + dc.id + " references the FK");
      a.colIdx = ci;
      a.kind = r1.columns()[ci].kind;
      a.op = parseOp(aj.at("op").get<std::string>());
      if (aj.contains("t2")) {
        a.varVar = true;
        a.t2 = aj.at("t2").get<int>();
        if (a.t2 < 1 || a.t2 > dc.arity) fail(Errc::ArityError, "dc " + dc.id + ": tuple var out of range");
        a.col2 = aj.value("col2", a.col);
        int cj2 = r1.indexOf(a.col2);
        if (cj2 < 0) fail(Errc::UnknownColumn, "dc " + dc.id + ": unknown column " + a.col2);
        if (cj2 == r1.fkIndex()) fail(Errc::ForbiddenFKReference, "dc " + dc.id + " references the FK");
        a.col2Idx = cj2;
        if (r1.columns()[cj2].kind != a.kind)
          fail(Errc::TypeMismatch, "dc " + dc.id + ": comparing columns of different kinds");
        a.offset = aj.value("offset", static_cast<int64_t>(0));
        if (a.offset != 0 && a.kind != ColumnKind::Integer)
          fail(Errc::Parse, "dc " + dc.id + ": offset on categorical columns");
      } else {
        a.value = jsonScalar(aj.at("value"), a.kind);
      }
      dc.body.push_back(std::move(a));
    }
    out.dcs.push_back(std::move(dc));
  }
  return out;
}

inline ConstraintSet parseConstraints(const std::string& text, const Schema& r1, const Schema& r2) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Errc::Parse, std::string("constraints: ") + e.what());
  }
  return parseConstraints(j, r1, r2);
}

// String literals would otherwise be ambiguous between the json and
// std::string overloads.
inline ConstraintSet parseConstraints(const char* text, const Schema& r1, const Schema& r2) {
  return parseConstraints(std::string(text), r1, r2);
}

inline nlohmann::json constraintsToJson(const ConstraintSet& cs) {
  nlohmann::json ccs = nlohmann::json::array();
  for (const auto& cc : cs.ccs) {
    nlohmann::json where = nlohmann::json::array();
    for (const auto& p : cc.preds) {
      if (p.isInterval)
        where.push_back({{"col", p.col}, {"in", {p.lo, p.hi}}});
      else if (p.kind == ColumnKind::Integer)
        where.push_back({{"col", p.col}, {"op", opName(p.op)}, {"value", p.value.asInt()}});
      else
        where.push_back({{"col", p.col}, {"op", opName(p.op)}, {"value", p.value.asStr()}});
    }
    ccs.push_back({{"id", cc.id}, {"where", where}, {"target", cc.target}});
  }
  nlohmann::json dcs = nlohmann::json::array();
  for (const auto& dc : cs.dcs) {
    nlohmann::json body = nlohmann::json::array();
    for (const auto& a : dc.body) {
      nlohmann::json aj = {{"t", a.t}, {"col", a.col}, {"op", opName(a.op)}};
      if (a.varVar) {
        aj["t2"] = a.t2;
        aj["col2"] = a.col2;
        if (a.offset != 0) aj["offset"] = a.offset;
      } else if (a.kind == ColumnKind::Integer) {
        aj["value"] = a.value.asInt();
      } else {
        aj["value"] = a.value.asStr();
      }
      body.push_back(aj);
    }
    dcs.push_back({{"id", dc.id}, {"arity", dc.arity}, {"body", body}});
  }
  return {{"ccs", ccs}, {"dcs", dcs}};
}

//---------------------------------------------------------------- evaluation

// Rows of the view matching both sides of the CC; null B-cells never satisfy
// an R2 predicate.
inline int64_t evalCCCount(const LinearCC& cc, const JoinView& view) {
  int64_t n = 0;
  for (size_t i = 0; i < view.size(); ++i)
    if (cc.r1Satisfied(view, i) && cc.r2Satisfied(view, i)) ++n;
  return n;
}

// Body conjunction on concrete rows (rows[k] binds t_{k+1}); the implicit
// FK-equality atoms are the caller's business.
inline bool evalDCBody(const ForeignKeyDC& dc, const Relation& r1, const std::vector<size_t>& rows) {
  for (const auto& a : dc.body) {
    const Value& left = r1.row(rows[a.t - 1])[a.colIdx];
    if (left.isNull()) return false;
    if (a.varVar) {
      const Value& right = r1.row(rows[a.t2 - 1])[a.col2Idx];
      if (right.isNull()) return false;
      if (a.kind == ColumnKind::Integer) {
        if (!applyCmp(left.asInt(), a.op, right.asInt() + a.offset)) return false;
      } else {
        if (!applyCmp(left, a.op, right)) return false;
      }
    } else {
      if (!applyCmp(left, a.op, a.value)) return false;
    }
  }
  return true;
}

//------------------------------------------------------------ error measures

// |achieved - target| / max(10, target); the floor keeps small targets from
// dominating the aggregate.
inline double relativeCCError(int64_t achieved, int64_t target) {
  return static_cast<double>(std::llabs(achieved - target)) /
         static_cast<double>(std::max<int64_t>(10, target));
}

struct DcError {
  size_t violatingTuples = 0;
  size_t totalTuples = 0;
  double fraction() const {
    return totalTuples == 0 ? 0.0 : static_cast<double>(violatingTuples) / static_cast<double>(totalTuples);
  }
};

// Fraction of R1 tuples taking part in at least one violated DC
// instantiation. r1Hat must have a fully assigned FK column.
inline DcError dcErrorFraction(const Relation& r1Hat, const std::vector<ForeignKeyDC>& dcs) {
  DcError out;
  out.totalTuples = r1Hat.size();
  if (r1Hat.size() == 0 || dcs.empty()) return out;
  int fk = r1Hat.schema().fkIndex();
  if (fk < 0) fail(Errc::Parse, "dcErrorFraction needs an FK column");

  std::unordered_map<int64_t, std::vector<size_t>> groups;
  for (size_t i = 0; i < r1Hat.size(); ++i) {
    const Value& f = r1Hat.row(i)[fk];
    if (f.isNull()) fail(Errc::DanglingForeignKey, "null FK in row " + std::to_string(r1Hat.key(i)));
    groups[f.asInt()].push_back(i);
  }

  std::vector<char> violating(r1Hat.size(), 0);
  std::vector<size_t> pick;
  for (const auto& [fkVal, members] : groups) {
    (void)fkVal;
    for (const auto& dc : dcs) {
      if (members.size() < static_cast<size_t>(dc.arity)) continue;
      // ordered tuples of distinct rows
      pick.assign(dc.arity, 0);
      std::vector<size_t> idx(dc.arity, 0);
      std::function<void(int)> rec = [&](int depth) {
        if (depth == dc.arity) {
          if (evalDCBody(dc, r1Hat, pick))
            for (size_t r : pick) violating[r] = 1;
          return;
        }
        for (size_t m : members) {
          bool used = false;
          for (int d = 0; d < depth; ++d)
            if (pick[d] == m) used = true;
          if (used) continue;
          pick[depth] = m;
          rec(depth + 1);
        }
      };
      rec(0);
    }
  }
  for (char v : violating)
    if (v) ++out.violatingTuples;
  return out;
}

// R2 data columns referenced by at least one CC, in R2 schema order. These
// are the columns phase I assigns and phase II partitions on.
inline std::vector<std::string> activeBColumns(const std::vector<LinearCC>& ccs, const Schema& r2) {
  std::set<std::string> used;
  for (const auto& cc : ccs)
    for (const auto& [col, cond] : cc.r2Conds) {
      (void)cond;
      used.insert(col);
    }
  std::vector<std::string> out;
  for (const auto& c : r2.columns())
    if (used.count(c.name)) out.push_back(c.name);
  return out;
}

}  // namespace linksynth

#endif
