// Acceptance suite for the linksynth pipeline. Each criterion prints exactly
// one PASS/FAIL line; the process exits non-zero if any criterion fails.
//
//  1  running-example reproduction (exact errors, join equality, < 1 s)
//  2  exactness on 100 seeded feasible non-intersecting instances (< 30 s)
//  3  every pipeline run in this suite: zero DC error, join equality, r2Hat
//     extends r2 append-only
//  4  oracle agreement on 200 tiny instances (< 60 s)
//  5  NAE-3SAT reduction equivalence, exhaustive over distinct-variable
//     clauses with <= 4 variables and <= 3 clauses (< 60 s)
//  6  integer solver exactness on seeded feasible systems + the running
//     example's all-way system
//  7  coloring fixture and determinism
//  8  metric formulas
//  9  desk-scale benchmark: scale 1x, good8 DCs, 500 good CCs (< 10 min)

#include <chrono>
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "linksynth/benchgen.hpp"
#include "linksynth/oracle.hpp"
#include "linksynth/pipeline.hpp"

using namespace linksynth;

namespace {

double msSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct Result {
  bool pass = false;
  std::string detail;
};

// Criterion 3 watches every solveHybrid call made anywhere in this suite.
struct PipelineRecorder {
  size_t runs = 0, dcBad = 0, joinBad = 0, r2Bad = 0;
};

SolveResult runPipeline(const Relation& r1, const Relation& r2, const ConstraintSet& cs,
                        PipelineRecorder& rec, const SolveConfig& cfg = {}) {
  SolveResult res = solveHybrid(r1, r2, cs, cfg);
  ++rec.runs;
  if (res.report.dc.fraction() != 0.0) ++rec.dcBad;
  if (!res.report.joinConsistent) ++rec.joinBad;
  bool super = res.r2Hat.size() >= r2.size();
  for (size_t i = 0; super && i < r2.size(); ++i)
    if (!(res.r2Hat.row(i) == r2.row(i))) super = false;
  if (!super) ++rec.r2Bad;
  return res;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

//------------------------------------------------------------- criterion 1

Result criterion1(PipelineRecorder& rec) {
  auto t0 = std::chrono::steady_clock::now();
  testutil::ExampleInstance fi = testutil::loadExample();
  SolveResult res = runPipeline(fi.r1, fi.r2, fi.cs, rec);
  double ms = msSince(t0);

  bool ccExact = res.report.cc.size() == 4;
  for (const auto& o : res.report.cc) ccExact = ccExact && o.relativeError == 0.0;
  bool pass = ccExact && res.report.dc.fraction() == 0.0 && res.report.joinConsistent &&
              ms < 1000.0;
  return {pass, fmt("dcError=%.0f, ccErrors=0 on %zu CCs, join %s, %.1f ms",
                    res.report.dc.fraction(), res.report.cc.size(),
                    res.report.joinConsistent ? "consistent" : "INCONSISTENT", ms)};
}

//------------------------------------------------------------- criterion 2

Result criterion2(PipelineRecorder& rec) {
  auto t0 = std::chrono::steady_clock::now();
  size_t bad = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    BenchConfig cfg;
    cfg.scale = 0.0075;  // 188 persons, 74 households
    cfg.seed = seed;
    cfg.ccCount = 10 + static_cast<int>(seed % 21);  // 10..30
    GeneratedInstance gi = generateInstance(cfg);
    SolveResult res = runPipeline(gi.r1, gi.r2, gi.cs, rec);
    if (res.report.ccMax != 0.0) ++bad;
  }
  double ms = msSince(t0);
  bool pass = bad == 0 && ms < 30000.0;
  return {pass, fmt("100 instances, %zu with a non-zero CC error, %.0f ms", bad, ms)};
}

//------------------------------------------------------------- criterion 4

Result criterion4(PipelineRecorder& rec) {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(424242);
  const char* relNames[3] = {"Owner", "Spouse", "Child"};
  const char* areaNames[2] = {"Chicago", "NYC"};

  nlohmann::json dcPool = nlohmann::json::array();
  dcPool.push_back({{"id", "dx_oo"},
                    {"arity", 2},
                    {"body",
                     {{{"t", 1}, {"col", "Rel"}, {"op", "="}, {"value", "Owner"}},
                      {{"t", 2}, {"col", "Rel"}, {"op", "="}, {"value", "Owner"}}}}});
  dcPool.push_back({{"id", "dx_os"},
                    {"arity", 2},
                    {"body",
                     {{{"t", 1}, {"col", "Rel"}, {"op", "="}, {"value", "Owner"}},
                      {{"t", 2}, {"col", "Rel"}, {"op", "="}, {"value", "Spouse"}},
                      {{"t", 2}, {"col", "Age"}, {"op", "<"}, {"t2", 1}, {"col2", "Age"},
                       {"offset", -10}}}}});
  dcPool.push_back({{"id", "dx_ccc"},
                    {"arity", 3},
                    {"body",
                     {{{"t", 1}, {"col", "Rel"}, {"op", "="}, {"value", "Child"}},
                      {{"t", 2}, {"col", "Rel"}, {"op", "="}, {"value", "Child"}},
                      {{"t", 3}, {"col", "Rel"}, {"op", "="}, {"value", "Child"}}}}});
  dcPool.push_back({{"id", "dx_oc"},
                    {"arity", 2},
                    {"body",
                     {{{"t", 1}, {"col", "Rel"}, {"op", "="}, {"value", "Owner"}},
                      {{"t", 2}, {"col", "Rel"}, {"op", "="}, {"value", "Child"}},
                      {{"t", 2}, {"col", "Age"}, {"op", ">"}, {"t2", 1}, {"col2", "Age"},
                       {"offset", -12}}}}});

  struct CcSpec {
    bool hasAge = false, hasRel = false, hasMl = false, hasArea = false;
    int64_t lo = 0, hi = 0, ml = 0;
    std::string rel, area;
  };

  size_t satNonInt = 0, exactBad = 0, dcBad = 0, oracleSat = 0;
  for (int inst = 0; inst < 200; ++inst) {
    int n = 2 + static_cast<int>(rng() % 7);  // 2..8 persons
    int m = 1 + static_cast<int>(rng() % 4);  // 1..4 households

    Relation r1(testutil::personsSchema());
    std::vector<int64_t> ages, mls;
    std::vector<std::string> rels;
    for (int j = 0; j < n; ++j) {
      ages.push_back(static_cast<int64_t>(rng() % 100));
      rels.push_back(relNames[rng() % 3]);
      mls.push_back(static_cast<int64_t>(rng() % 2));
      r1.append(testutil::person(j + 1, ages[j], rels[j], mls[j]));
    }
    Relation r2(testutil::housingSchema());
    std::vector<std::string> areas;
    for (int j = 0; j < m; ++j) {
      areas.push_back(areaNames[rng() % 2]);
      r2.append(testutil::house(j + 1, areas[j]));
    }

    nlohmann::json doc;
    doc["ccs"] = nlohmann::json::array();
    doc["dcs"] = nlohmann::json::array();
    int dcCount = static_cast<int>(rng() % 4);  // 0..3
    std::vector<int> dcIdx{0, 1, 2, 3};
    for (int j = 3; j > 0; --j) std::swap(dcIdx[j], dcIdx[rng() % (j + 1)]);
    for (int j = 0; j < dcCount; ++j) doc["dcs"].push_back(dcPool[dcIdx[j]]);

    int ccCount = static_cast<int>(rng() % 5);  // 0..4
    std::vector<CcSpec> specs;
    for (int c = 0; c < ccCount; ++c) {
      CcSpec s;
      s.hasAge = rng() % 2;
      s.lo = static_cast<int64_t>(rng() % 80);
      s.hi = s.lo + static_cast<int64_t>(rng() % 30);
      s.hasRel = rng() % 2;
      s.rel = relNames[rng() % 3];
      s.hasMl = rng() % 3 == 0;
      s.ml = static_cast<int64_t>(rng() % 2);
      s.hasArea = rng() % 2;
      s.area = areaNames[rng() % 2];
      if (!s.hasAge && !s.hasRel && !s.hasMl && !s.hasArea) s.hasRel = true;
      specs.push_back(s);
    }

    // half the instances take CC targets from a random completion, so a good
    // share is satisfiable; the rest draw targets blind
    std::vector<int> fkOf(n);
    for (int j = 0; j < n; ++j) fkOf[j] = static_cast<int>(rng() % m);
    auto countFor = [&](const CcSpec& s) {
      int64_t cnt = 0;
      for (int j = 0; j < n; ++j) {
        if (s.hasAge && (ages[j] < s.lo || ages[j] > s.hi)) continue;
        if (s.hasRel && rels[j] != s.rel) continue;
        if (s.hasMl && mls[j] != s.ml) continue;
        if (s.hasArea && areas[fkOf[j]] != s.area) continue;
        ++cnt;
      }
      return cnt;
    };
    std::set<std::string> seenWhere;
    for (size_t c = 0; c < specs.size(); ++c) {
      const CcSpec& s = specs[c];
      nlohmann::json where = nlohmann::json::array();
      if (s.hasAge) where.push_back({{"col", "Age"}, {"in", {s.lo, s.hi}}});
      if (s.hasRel) where.push_back({{"col", "Rel"}, {"op", "="}, {"value", s.rel}});
      if (s.hasMl) where.push_back({{"col", "Multi-ling"}, {"op", "="}, {"value", s.ml}});
      if (s.hasArea) where.push_back({{"col", "Area"}, {"op", "="}, {"value", s.area}});
      // identical selections with clashing targets are rejected by the parser
      if (!seenWhere.insert(where.dump()).second) continue;
      int64_t target =
          inst % 2 == 0 ? countFor(s) : static_cast<int64_t>(rng() % 5);
      doc["ccs"].push_back(
          {{"id", "cc" + std::to_string(c + 1)}, {"where", where}, {"target", target}});
    }

    ConstraintSet cs = parseConstraints(doc, r1.schema(), r2.schema());
    OracleResult od = bruteForceDecide(r1, r2, cs);
    SolveResult res = runPipeline(r1, r2, cs, rec);

    if (res.report.dc.fraction() != 0.0) ++dcBad;
    if (od.sat) ++oracleSat;
    if (od.sat && computeHybridSplit(cs.ccs).s2.empty()) {
      ++satNonInt;
      int64_t total = 0;
      for (const auto& o : res.report.cc) total += std::llabs(o.achieved - o.target);
      if (total != 0) ++exactBad;
    }
  }
  double ms = msSince(t0);
  bool pass = dcBad == 0 && exactBad == 0 && satNonInt >= 20 && ms < 60000.0;
  return {pass, fmt("200 instances, %zu oracle-sat, %zu sat+non-intersecting, "
                    "%zu inexact, %zu with DC error, %.0f ms",
                    oracleSat, satNonInt, exactBad, dcBad, ms)};
}

//------------------------------------------------------------- criterion 5

Result criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  // all clauses over three distinct variables from {1,2,3,4}
  std::vector<std::array<int, 3>> clauses;
  int triples[4][3] = {{1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}};
  for (auto& t : triples)
    for (int s = 0; s < 8; ++s)
      clauses.push_back({s & 1 ? -t[0] : t[0], s & 2 ? -t[1] : t[1], s & 4 ? -t[2] : t[2]});

  size_t formulas = 0, mismatches = 0, naeSat = 0;
  auto checkFormula = [&](const Nae3SatFormula& f) {
    ++formulas;
    bool nae = naeSatisfiable(f);
    if (nae) ++naeSat;
    ReducedInstance ri = reduceNae3Sat(f);
    bool completable = bruteForceDecide(ri.r1, ri.r2, ri.cs).sat;
    if (nae != completable) ++mismatches;
  };

  Nae3SatFormula f;
  f.vars = 4;
  const size_t k = clauses.size();  // 32
  for (size_t a = 0; a < k; ++a) {
    f.clauses = {clauses[a]};
    checkFormula(f);
  }
  for (size_t a = 0; a < k; ++a)
    for (size_t b = 0; b < k; ++b) {
      f.clauses = {clauses[a], clauses[b]};
      checkFormula(f);
    }
  for (size_t a = 0; a < k; ++a)
    for (size_t b = 0; b < k; ++b)
      for (size_t c = 0; c < k; ++c) {
        f.clauses = {clauses[a], clauses[b], clauses[c]};
        checkFormula(f);
      }

  double ms = msSince(t0);
  bool pass = formulas == 33824 && mismatches == 0 && ms < 60000.0;
  return {pass, fmt("%zu formulas, %zu NAE-satisfiable, %zu equivalence mismatches, %.0f ms",
                    formulas, naeSat, mismatches, ms)};
}

//------------------------------------------------------------- criterion 6

int64_t exhaustiveMinResidual(const LinearSystem& sys) {
  std::vector<std::vector<int>> varRows(sys.nVars);
  for (size_t r = 0; r < sys.rows.size(); ++r)
    for (int v : sys.rows[r].vars) varRows[v].push_back(static_cast<int>(r));
  std::vector<int64_t> achieved(sys.rows.size(), 0);
  int64_t best = INT64_MAX;
  std::function<void(size_t)> rec = [&](size_t v) {
    if (v == sys.nVars) {
      int64_t res = 0;
      for (size_t r = 0; r < sys.rows.size(); ++r)
        res += std::llabs(achieved[r] - sys.rows[r].target);
      best = std::min(best, res);
      return;
    }
    for (int64_t val = 0; val <= sys.ub[v]; ++val) {
      for (int r : varRows[v]) achieved[r] += val;
      rec(v + 1);
      for (int r : varRows[v]) achieved[r] -= val;
    }
  };
  rec(0);
  return best;
}

int64_t residualOf(const LinearSystem& sys, const std::vector<int64_t>& x) {
  int64_t res = 0;
  for (const auto& row : sys.rows) {
    int64_t sum = 0;
    for (int v : row.vars) sum += x[v];
    res += std::llabs(sum - row.target);
  }
  return res;
}

Result criterion6() {
  auto t0 = std::chrono::steady_clock::now();

  // the running example's all-way system has a unique solution
  testutil::ExampleInstance fi = testutil::loadExample();
  JoinView view = initJoinView(fi.r1, fi.r2);
  ComboPool pool = computeComboPool(fi.cs.ccs, fi.r2, view);
  BinSpace bs = buildBinSpace(fi.cs.ccs, view, pool);
  LinearSystem figSys = buildSystem(bs, fi.cs.ccs, MarginalMode::AllWay, fi.r1);
  IntegerSolution exSol = solveInteger(figSys);
  bool exampleOk = exSol.residual == 0 && exSol.exact &&
                  exSol.x == std::vector<int64_t>{2, 1, 2, 2, 0, 0, 1, 1};

  std::mt19937_64 rng(6);
  size_t bad = 0, exhaustiveChecked = 0;
  for (int inst = 0; inst < 50; ++inst) {
    LinearSystem sys;
    bool small = inst < 20;
    sys.nVars = small ? 5 + rng() % 6 : 13 + rng() % 38;  // <= 10 / <= 50
    for (size_t v = 0; v < sys.nVars; ++v) sys.ub.push_back(1 + static_cast<int64_t>(rng() % 2));

    std::vector<int64_t> xStar;
    for (size_t v = 0; v < sys.nVars; ++v)
      xStar.push_back(static_cast<int64_t>(rng() % (sys.ub[v] + 1)));

    size_t nRows = 3 + rng() % (small ? 8 : 6);
    for (size_t r = 0; r < nRows; ++r) {
      SysRow row;
      row.label = "row" + std::to_string(r);
      for (size_t v = 0; v < sys.nVars; ++v)
        if (rng() % 10 < 3) row.vars.push_back(static_cast<int>(v));
      if (row.vars.empty()) row.vars.push_back(static_cast<int>(rng() % sys.nVars));
      for (int v : row.vars) row.target += xStar[v];
      sys.rows.push_back(std::move(row));
    }

    IntegerSolution sol = solveInteger(sys);
    bool ok = sol.residual == 0 && sol.exact && residualOf(sys, sol.x) == sol.residual;
    if (ok && small) {
      ++exhaustiveChecked;
      ok = exhaustiveMinResidual(sys) == sol.residual;
    }
    if (!ok) ++bad;
  }
  double ms = msSince(t0);
  bool pass = exampleOk && bad == 0;
  return {pass, fmt("all-way example %s, 50 feasible systems, %zu vs exhaustive optimum, "
                    "%zu failures, %.0f ms",
                    exampleOk ? "exact" : "WRONG", exhaustiveChecked, bad, ms)};
}

//------------------------------------------------------------- criterion 7

Result criterion7() {
  auto colorOnce = [](std::vector<int64_t>& out) {
    testutil::ExampleInstance fi = testutil::loadExample();
    JoinView view = initJoinView(fi.r1, fi.r2);
    ComboPool pool = computeComboPool(fi.cs.ccs, fi.r2, view);
    int area = view.bIndexOf("Area");
    for (size_t row = 0; row < 7; ++row) view.setB(row, area, Value::ofStr("Chicago"));
    view.setB(7, area, Value::ofStr("NYC"));
    view.setB(8, area, Value::ofStr("NYC"));

    auto parts = partitionView(view, pool, {});
    if (parts.size() != 2) return false;
    ConflictGraph chi = buildConflictGraph(view, parts[0].rows, fi.cs.dcs);
    ColoringResult rc = coloringLF(chi, parts[0].candidates);
    ConflictGraph nyc = buildConflictGraph(view, parts[1].rows, fi.cs.dcs);
    ColoringResult rn = coloringLF(nyc, parts[1].candidates);
    if (!rc.skipped.empty() || !rn.skipped.empty()) return false;
    out = rc.color;
    out.insert(out.end(), rn.color.begin(), rn.color.end());
    return true;
  };

  std::vector<int64_t> first, second;
  bool ok = colorOnce(first) && colorOnce(second);
  const std::vector<int64_t> expected{2, 1, 3, 4, 3, 2, 2, 5, 6};
  bool pass = ok && first == expected && second == expected;
  std::string got;
  for (size_t i = 0; i < first.size(); ++i)
    got += (i ? "," : "") + std::to_string(first[i]);
  return {pass, fmt("colors p1..p9 = {%s}, deterministic %s", got.c_str(),
                    first == second ? "yes" : "NO")};
}

//------------------------------------------------------------- criterion 8

Result criterion8() {
  testutil::ExampleInstance fi = testutil::loadExample();
  double rel = relativeCCError(5, 0);
  Relation corrupt = loadRelation(testutil::fixturePath("persons_corrupt.csv"));
  DcError dc = dcErrorFraction(corrupt, fi.cs.dcs);
  bool pass = rel == 0.5 && dc.violatingTuples == 2 && dc.totalTuples == 9;
  return {pass, fmt("relativeCCError(achieved 5, target 0) = %.3f, corrupt fixture DC error "
                    "%zu/%zu",
                    rel, dc.violatingTuples, dc.totalTuples)};
}

//------------------------------------------------------------- criterion 9

Result criterion9(PipelineRecorder& rec) {
  auto t0 = std::chrono::steady_clock::now();
  BenchConfig cfg;
  cfg.scale = 1.0;
  cfg.seed = 1;
  cfg.ccCount = 500;
  GeneratedInstance gi = generateInstance(cfg);
  double genMs = msSince(t0);

  auto t1 = std::chrono::steady_clock::now();
  SolveResult res = runPipeline(gi.r1, gi.r2, gi.cs, rec);
  double solveMs = msSince(t1);

  const Timings& tm = res.report.timings;
  bool timingsOk = tm.pairwiseComparison >= 0 && tm.recursion >= 0 && tm.ilpSolver >= 0 &&
                   tm.coloring >= 0 && tm.total > 0;
  bool pass = res.report.cc.size() == 500 && res.report.ccMedian == 0.0 &&
              res.report.dc.fraction() == 0.0 && timingsOk && solveMs < 600000.0;
  return {pass,
          fmt("%zu persons / %zu households, 500 CCs, ccMedian=%.6f, ccMax=%.6f, dcError=%.0f, "
              "gen %.0f ms, solve %.0f ms (cmp %.0f / rec %.0f / ilp %.0f / color %.0f)",
              gi.r1.size(), gi.r2.size(), res.report.ccMedian, res.report.ccMax,
              res.report.dc.fraction(), genMs, solveMs, tm.pairwiseComparison, tm.recursion,
              tm.ilpSolver, tm.coloring)};
}

}  // namespace

int main() {
  Result results[9];
  PipelineRecorder rec;

  auto step = [](int n, Result r) {
    std::fprintf(stderr, "[acceptance] criterion %d evaluated: %s\n", n,
                 r.pass ? "pass" : "FAIL");
    return r;
  };

  try {
    results[0] = step(1, criterion1(rec));
    results[1] = step(2, criterion2(rec));
    results[3] = step(4, criterion4(rec));
    results[4] = step(5, criterion5());
    results[5] = step(6, criterion6());
    results[6] = step(7, criterion7());
    results[7] = step(8, criterion8());
    results[8] = step(9, criterion9(rec));
  } catch (const Error& e) {
    std::fprintf(stderr, "[acceptance] aborted: %s\n", e.what());
    return 1;
  }

  // criterion 3 summarizes every pipeline run the other criteria made
  results[2].pass = rec.runs > 0 && rec.dcBad == 0 && rec.joinBad == 0 && rec.r2Bad == 0;
  results[2].detail = fmt("%zu pipeline runs, %zu with DC error, %zu join mismatches, "
                          "%zu shrinking r2Hat",
                          rec.runs, rec.dcBad, rec.joinBad, rec.r2Bad);

  bool all = true;
  for (int i = 0; i < 9; ++i) {
    std::printf("criterion %d: %s (%s)\n", i + 1, results[i].pass ? "PASS" : "FAIL",
                results[i].detail.c_str());
    all = all && results[i].pass;
  }
  std::printf("%s\n", all ? "acceptance: all 9 criteria PASS" : "acceptance: FAILURES present");
  return all ? 0 : 1;
}
