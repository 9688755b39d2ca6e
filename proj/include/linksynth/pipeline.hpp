#ifndef LINKSYNTH_PIPELINE_HPP
#define LINKSYNTH_PIPELINE_HPP

//===========================================================================
// End-to-end hybrid solve: classify the CC set, run the exact recursion on
// the clean diagrams, the ILP on the intersecting rest, fill leftovers from
// the unused-combo pool, then color the partitions into an FK assignment.
// checkSolution re-derives every reported number from a finished instance.
//===========================================================================

#include <array>
#include <chrono>
#include <cstdio>

#include "linksynth/dc_coloring.hpp"

namespace linksynth {

struct SolveConfig {
  MarginalMode marginals = MarginalMode::Modified;
  SolverBudget budget;
  int parallelPartitions = 0;
  uint64_t seed = 0;
  bool dumpLp = false;
};

// Wall-clock milliseconds per phase; the one block of the report that is not
// reproducible across runs.
struct Timings {
  double pairwiseComparison = 0, recursion = 0, ilpSolver = 0, coloring = 0, total = 0;
};

struct CCOutcome {
  std::string id;
  int64_t target = 0, achieved = 0;
  double relativeError = 0;
};

struct SolveReport {
  MarginalMode marginals = MarginalMode::Modified;
  uint64_t seed = 0;
  size_t ccCount = 0, dcCount = 0;
  size_t s1 = 0, s2 = 0, diagrams = 0, intersectingPairs = 0;
  std::map<std::string, int64_t> shortfalls;
  bool ilpRan = false;
  size_t ilpVars = 0, ilpRows = 0;
  int64_t ilpResidual = 0, ilpNodes = 0;
  bool ilpExact = true;
  size_t pooledRows = 0, invalidRows = 0;
  size_t partitions = 0, freshRows = 0;
  std::vector<std::array<size_t, 2>> partitionShapes;  // {vertices, edges} each
  std::vector<CCOutcome> cc;
  double ccMax = 0, ccMean = 0, ccMedian = 0;
  DcError dc;
  bool joinConsistent = true;
  Timings timings;
  std::string lpDump;  // only with dumpLp
};

struct SolveResult {
  Relation r1Hat;
  Relation r2Hat;
  SolveReport report;
};

namespace detail {

inline double millis(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - from)
      .count();
}

inline void summarizeCC(const std::vector<CCOutcome>& cc, double& mx, double& mean, double& med) {
  mx = mean = med = 0;
  if (cc.empty()) return;
  std::vector<double> errs;
  for (const auto& o : cc) {
    errs.push_back(o.relativeError);
    mx = std::max(mx, o.relativeError);
    mean += o.relativeError;
  }
  mean /= static_cast<double>(errs.size());
  std::sort(errs.begin(), errs.end());
  size_t n = errs.size();
  med = n % 2 ? errs[n / 2] : (errs[n / 2 - 1] + errs[n / 2]) / 2;
}

}  // namespace detail

inline SolveResult solveHybrid(const Relation& r1, const Relation& r2, const ConstraintSet& cs,
                               const SolveConfig& cfg = {}) {
  if (r1.size() > 0 && r2.size() == 0)
    fail(Errc::CapacityExceeded, "r2 has no rows for the FK to reference");
  auto tTotal = std::chrono::steady_clock::now();

  SolveResult res{r1, r2, {}};
  SolveReport& rep = res.report;
  rep.marginals = cfg.marginals;
  rep.seed = cfg.seed;
  rep.ccCount = cs.ccs.size();
  rep.dcCount = cs.dcs.size();

  JoinView view = initJoinView(res.r1Hat, res.r2Hat);
  ComboPool pool = computeComboPool(cs.ccs, res.r2Hat, view);

  // phase I: classification and split
  auto t0 = std::chrono::steady_clock::now();
  auto matrix = classifyAll(cs.ccs);
  HasseForest forest = buildHasseForest(cs.ccs, matrix);
  HybridSplit split = computeHybridSplit(cs.ccs, forest, matrix);
  rep.s1 = split.s1.size();
  rep.s2 = split.s2.size();
  rep.diagrams = forest.diagrams.size();
  rep.intersectingPairs = split.intersecting.size();
  rep.timings.pairwiseComparison = detail::millis(t0);

  // phase I: exact recursion over the s1 diagrams (leftovers wait for the ILP)
  t0 = std::chrono::steady_clock::now();
  std::vector<LinearCC> s1ccs, s2ccs;
  for (int i : split.s1) s1ccs.push_back(cs.ccs[i]);
  for (int i : split.s2) s2ccs.push_back(cs.ccs[i]);
  FillLedger ledger = solveExact(view, s1ccs, buildHasseForest(s1ccs), pool, cfg.seed, false);
  rep.timings.recursion = detail::millis(t0);

  // phase I: ILP over whatever the recursion left open
  t0 = std::chrono::steady_clock::now();
  if (!s2ccs.empty()) {
    rep.ilpRan = true;
    BinSpace bs = buildBinSpace(s2ccs, view, pool);
    LinearSystem sys = buildSystem(bs, s2ccs, cfg.marginals, res.r1Hat);
    rep.ilpVars = sys.nVars;
    rep.ilpRows = sys.rows.size();
    if (cfg.dumpLp) rep.lpDump = dumpSystem(sys, bs);
    IntegerSolution sol = solveInteger(sys, cfg.budget);
    rep.ilpResidual = sol.residual;
    rep.ilpNodes = sol.nodes;
    rep.ilpExact = sol.exact;
    greedyFill(view, bs, pool, sol);
  }
  rep.timings.ilpSolver = detail::millis(t0);

  // leftover rows take unused combos (or are flagged invalid)
  fillLeftoverRows(view, pool, cfg.seed, ledger, &cs.ccs);
  rep.shortfalls = ledger.shortfalls;
  rep.pooledRows = ledger.pooledRows;
  rep.invalidRows = ledger.invalidRows.size();

  // phase II: conflict coloring per partition, then the invalid stragglers
  t0 = std::chrono::steady_clock::now();
  std::vector<char> invalid(res.r1Hat.size(), 0);
  for (size_t row : ledger.invalidRows) invalid[row] = 1;
  std::vector<int64_t> fk;
  FKStats stats = completeFK(view, res.r2Hat, fk, cs.dcs, pool, invalid,
                             FKConfig{cfg.parallelPartitions});
  solveInvalidTuples(view, res.r2Hat, fk, cs, pool, invalid, stats);
  rep.partitions = stats.partitions;
  rep.freshRows = stats.freshRows;
  rep.partitionShapes = stats.shapes;

  int fkIdx = res.r1Hat.schema().fkIndex();
  for (size_t row = 0; row < res.r1Hat.size(); ++row) {
    if (fk[row] < 0) fail(Errc::Internal, "row left without a household");
    res.r1Hat.setCell(row, fkIdx, Value::ofInt(fk[row]));
  }
  rep.timings.coloring = detail::millis(t0);

  // the real join must agree with every combo phase I committed to
  JoinView joined = materializeJoin(res.r1Hat, res.r2Hat);
  for (size_t row = 0; row < view.size() && rep.joinConsistent; ++row)
    for (int b : pool.bIndex)
      if (!view.b(row, b).isNull() && !(view.b(row, b) == joined.b(row, b))) {
        rep.joinConsistent = false;
        break;
      }

  for (const auto& cc : cs.ccs) {
    CCOutcome o;
    o.id = cc.id;
    o.target = cc.target;
    o.achieved = evalCCCount(cc, joined);
    o.relativeError = relativeCCError(o.achieved, o.target);
    rep.cc.push_back(std::move(o));
  }
  detail::summarizeCC(rep.cc, rep.ccMax, rep.ccMean, rep.ccMedian);
  rep.dc = dcErrorFraction(res.r1Hat, cs.dcs);
  rep.timings.total = detail::millis(tTotal);
  return res;
}

//--------------------------------------------------------------------- check

struct CheckReport {
  bool fkComplete = false;
  bool dangling = false;
  std::vector<CCOutcome> cc;
  double ccMax = 0, ccMean = 0, ccMedian = 0;
  DcError dc;
  bool ok = false;
};

// Recompute CC and DC errors of a finished instance from scratch. ok means:
// FK fully assigned, every reference resolves, zero DC error.
inline CheckReport checkSolution(const Relation& r1Hat, const Relation& r2,
                                 const ConstraintSet& cs) {
  CheckReport rep;
  rep.fkComplete = r1Hat.fkState() == Relation::FkState::AllSet || r1Hat.size() == 0;
  if (!rep.fkComplete) return rep;
  int fkIdx = r1Hat.schema().fkIndex();
  for (size_t i = 0; i < r1Hat.size(); ++i)
    if (r2.findKey(r1Hat.row(i)[fkIdx].asInt()) < 0) {
      rep.dangling = true;
      return rep;
    }
  JoinView joined = materializeJoin(r1Hat, r2);
  for (const auto& cc : cs.ccs) {
    CCOutcome o;
    o.id = cc.id;
    o.target = cc.target;
    o.achieved = evalCCCount(cc, joined);
    o.relativeError = relativeCCError(o.achieved, o.target);
    rep.cc.push_back(std::move(o));
  }
  detail::summarizeCC(rep.cc, rep.ccMax, rep.ccMean, rep.ccMedian);
  rep.dc = dcErrorFraction(r1Hat, cs.dcs);
  rep.ok = rep.dc.fraction() == 0;
  return rep;
}

//------------------------------------------------------------- report output

namespace detail {

inline std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string jstr(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

inline std::string ccBlock(const std::vector<CCOutcome>& cc, double mx, double mean, double med,
                           const std::string& pad) {
  std::string o = "{\n" + pad + "  \"perConstraint\": [";
  for (size_t i = 0; i < cc.size(); ++i) {
    o += i ? ",\n" : "\n";
    o += pad + "    {\"id\": " + jstr(cc[i].id) + ", \"target\": " + std::to_string(cc[i].target) +
         ", \"achieved\": " + std::to_string(cc[i].achieved) +
         ", \"relativeError\": " + f6(cc[i].relativeError) + "}";
  }
  o += cc.empty() ? "],\n" : "\n" + pad + "  ],\n";
  o += pad + "  \"max\": " + f6(mx) + ",\n";
  o += pad + "  \"mean\": " + f6(mean) + ",\n";
  o += pad + "  \"median\": " + f6(med) + "\n" + pad + "}";
  return o;
}

inline std::string dcBlock(const DcError& dc, const std::string& pad) {
  return "{\n" + pad + "  \"violatingTuples\": " + std::to_string(dc.violatingTuples) + ",\n" +
         pad + "  \"totalTuples\": " + std::to_string(dc.totalTuples) + ",\n" + pad +
         "  \"fraction\": " + f6(dc.fraction()) + "\n" + pad + "}";
}

}  // namespace detail

// Hand-rolled so float formatting stays pinned at six decimals; key order is
// fixed, making everything except the timings block reproducible.
inline std::string solveReportJson(const SolveReport& r) {
  using detail::f6;
  using detail::jstr;
  std::string o = "{\n";
  o += "  \"schemaVersion\": 1,\n";
  o += "  \"mode\": \"solve\",\n";
  o += "  \"marginals\": " + jstr(marginalModeName(r.marginals)) + ",\n";
  o += "  \"seed\": " + std::to_string(r.seed) + ",\n";
  o += "  \"phase1\": {\n";
  o += "    \"ccCount\": " + std::to_string(r.ccCount) + ",\n";
  o += "    \"dcCount\": " + std::to_string(r.dcCount) + ",\n";
  o += "    \"s1\": " + std::to_string(r.s1) + ",\n";
  o += "    \"s2\": " + std::to_string(r.s2) + ",\n";
  o += "    \"diagrams\": " + std::to_string(r.diagrams) + ",\n";
  o += "    \"intersectingPairs\": " + std::to_string(r.intersectingPairs) + ",\n";
  o += "    \"shortfalls\": {";
  {
    bool first = true;
    for (const auto& [id, n] : r.shortfalls) {
      o += first ? "" : ", ";
      o += jstr(id) + ": " + std::to_string(n);
      first = false;
    }
  }
  o += "},\n";
  o += "    \"ilp\": {\"ran\": " + std::string(r.ilpRan ? "true" : "false") +
       ", \"vars\": " + std::to_string(r.ilpVars) + ", \"rows\": " + std::to_string(r.ilpRows) +
       ", \"residual\": " + std::to_string(r.ilpResidual) +
       ", \"nodes\": " + std::to_string(r.ilpNodes) +
       ", \"exact\": " + (r.ilpExact ? "true" : "false") + "},\n";
  o += "    \"pooledRows\": " + std::to_string(r.pooledRows) + ",\n";
  o += "    \"invalidRows\": " + std::to_string(r.invalidRows) + "\n";
  o += "  },\n";
  o += "  \"phase2\": {\"partitions\": " + std::to_string(r.partitions) +
       ", \"freshRows\": " + std::to_string(r.freshRows) + ", \"partitionShapes\": [";
  for (size_t i = 0; i < r.partitionShapes.size(); ++i) {
    o += i ? ", " : "";
    o += "[" + std::to_string(r.partitionShapes[i][0]) + ", " +
         std::to_string(r.partitionShapes[i][1]) + "]";
  }
  o += "]},\n";
  o += "  \"cc\": " + detail::ccBlock(r.cc, r.ccMax, r.ccMean, r.ccMedian, "  ") + ",\n";
  o += "  \"dc\": " + detail::dcBlock(r.dc, "  ") + ",\n";
  o += "  \"joinConsistent\": " + std::string(r.joinConsistent ? "true" : "false") + ",\n";
  o += "  \"timings\": {\"pairwiseComparison\": " + f6(r.timings.pairwiseComparison) +
       ", \"recursion\": " + f6(r.timings.recursion) +
       ", \"ilpSolver\": " + f6(r.timings.ilpSolver) +
       ", \"coloring\": " + f6(r.timings.coloring) + ", \"total\": " + f6(r.timings.total) + "}\n";
  o += "}\n";
  return o;
}

inline std::string checkReportJson(const CheckReport& r) {
  std::string o = "{\n";
  o += "  \"schemaVersion\": 1,\n";
  o += "  \"mode\": \"check\",\n";
  o += "  \"fkComplete\": " + std::string(r.fkComplete ? "true" : "false") + ",\n";
  o += "  \"dangling\": " + std::string(r.dangling ? "true" : "false") + ",\n";
  o += "  \"cc\": " + detail::ccBlock(r.cc, r.ccMax, r.ccMean, r.ccMedian, "  ") + ",\n";
  o += "  \"dc\": " + detail::dcBlock(r.dc, "  ") + ",\n";
  o += "  \"ok\": " + std::string(r.ok ? "true" : "false") + "\n";
  o += "}\n";
  return o;
}

}  // namespace linksynth

#endif
