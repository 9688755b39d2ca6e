#include <catch2/catch_amalgamated.hpp>

#include <limits>

#include "helpers.hpp"
#include "linksynth/cc_ilp.hpp"

using namespace linksynth;

namespace {

constexpr int64_t kMin = std::numeric_limits<int64_t>::min();

struct IlpFixture {
  testutil::ExampleInstance fi;
  JoinView view;
  ComboPool pool;
  BinSpace bs;

  IlpFixture()
      : fi(testutil::loadExample()),
        view(initJoinView(fi.r1, fi.r2)),
        pool(computeComboPool(fi.cs.ccs, fi.r2, view)),
        bs(buildBinSpace(fi.cs.ccs, view, pool)) {}
};

size_t binOf(const BinSpace& bs, int64_t ageStart, const std::string& rel, int64_t mlStart) {
  std::vector<Value> sig{Value::ofInt(ageStart), Value::ofStr(rel), Value::ofInt(mlStart)};
  for (size_t b = 0; b < bs.binCount(); ++b)
    if (bs.binSig[b] == sig) return b;
  FAIL("no bin with signature (" << ageStart << ", " << rel << ", " << mlStart << ")");
  return 0;
}

size_t comboOf(const BinSpace& bs, const std::string& area) {
  for (size_t c = 0; c < bs.combos.size(); ++c)
    if (bs.combos[c][0].asStr() == area) return c;
  FAIL("no combo for area " << area);
  return 0;
}

int64_t rowSum(const SysRow& row, const std::vector<int64_t>& x) {
  int64_t s = 0;
  for (int v : row.vars) s += x[v];
  return s;
}

}  // namespace

TEST_CASE("intervalize cuts integer columns at CC bounds") {
  auto fi = testutil::loadExample();
  Intervalization iv = intervalize(fi.cs.ccs, fi.r1.schema());
  REQUIRE(iv.cols == std::vector<std::string>{"Age", "Rel", "Multi-ling"});
  CHECK(iv.kinds[0] == ColumnKind::Integer);
  CHECK(iv.kinds[1] == ColumnKind::Categorical);
  // cc3's [0, 24] puts starts at 0 and 25; cc4's Multi-ling = 1 at 1 and 2
  CHECK(iv.starts[0] == std::vector<int64_t>{kMin, 0, 25});
  CHECK(iv.starts[1] == std::vector<int64_t>{kMin});
  CHECK(iv.starts[2] == std::vector<int64_t>{kMin, 1, 2});
}

TEST_CASE("intervalStartOf locates the covering elementary interval") {
  std::vector<int64_t> starts{kMin, 0, 25};
  CHECK(intervalStartOf(starts, -5) == kMin);
  CHECK(intervalStartOf(starts, 0) == 0);
  CHECK(intervalStartOf(starts, 24) == 0);
  CHECK(intervalStartOf(starts, 25) == 25);
  CHECK(intervalStartOf(starts, 114) == 25);
}

TEST_CASE("buildBinSpace groups untouched rows by interval signature") {
  IlpFixture f;
  REQUIRE(f.bs.binCount() == 4);
  REQUIRE(f.bs.combos.size() == 2);
  CHECK(f.bs.varCount() == 8);

  size_t children = binOf(f.bs, 0, "Child", 1);
  size_t spouse = binOf(f.bs, 0, "Spouse", kMin);
  size_t ownersPlain = binOf(f.bs, 25, "Owner", kMin);
  size_t ownersMl = binOf(f.bs, 25, "Owner", 1);
  CHECK(f.bs.memberCounts[children] == 2);
  CHECK(f.bs.memberCounts[spouse] == 1);
  CHECK(f.bs.memberCounts[ownersPlain] == 3);
  CHECK(f.bs.memberCounts[ownersMl] == 3);
  // rows tracked ascending by key: p1, p3, p8 are the plain owners
  CHECK(f.bs.binRows[ownersPlain] == std::vector<size_t>{0, 2, 7});
  CHECK(f.bs.binRows[ownersMl] == std::vector<size_t>{1, 3, 8});

  // bins ordered lexicographically by signature
  CHECK(children < spouse);     // Child sorts before Spouse at equal age start
  CHECK(ownersPlain < ownersMl);  // int-min multi-ling start sorts first
}

TEST_CASE("all-way system on the running example has a unique exact solution") {
  IlpFixture f;
  LinearSystem sys = buildSystem(f.bs, f.fi.cs.ccs, MarginalMode::AllWay, f.fi.r1);
  REQUIRE(sys.rows.size() == 8);  // 4 marginals + 4 CCs

  IntegerSolution sol = solveInteger(sys);
  CHECK(sol.residual == 0);
  CHECK(sol.exact);

  size_t chi = comboOf(f.bs, "Chicago"), nyc = comboOf(f.bs, "NYC");
  auto x = [&](size_t bin, size_t combo) { return sol.x[f.bs.varOf(bin, combo)]; };
  CHECK(x(binOf(f.bs, 0, "Child", 1), chi) == 2);
  CHECK(x(binOf(f.bs, 0, "Spouse", kMin), chi) == 1);
  CHECK(x(binOf(f.bs, 25, "Owner", kMin), chi) == 2);
  CHECK(x(binOf(f.bs, 25, "Owner", 1), chi) == 2);
  CHECK(x(binOf(f.bs, 0, "Child", 1), nyc) == 0);
  CHECK(x(binOf(f.bs, 0, "Spouse", kMin), nyc) == 0);
  CHECK(x(binOf(f.bs, 25, "Owner", kMin), nyc) == 1);
  CHECK(x(binOf(f.bs, 25, "Owner", 1), nyc) == 1);
}

TEST_CASE("greedyFill turns the all-way solution into the known completion") {
  IlpFixture f;
  LinearSystem sys = buildSystem(f.bs, f.fi.cs.ccs, MarginalMode::AllWay, f.fi.r1);
  IntegerSolution sol = solveInteger(sys);
  REQUIRE(sol.residual == 0);
  greedyFill(f.view, f.bs, f.pool, sol);

  CHECK(testutil::allBComplete(f.view));
  int area = f.view.bIndexOf("Area");
  // ascending keys within each bin put p1..p7 in Chicago and p8, p9 in NYC
  for (size_t row = 0; row < 7; ++row) CHECK(f.view.b(row, area).asStr() == "Chicago");
  CHECK(f.view.b(7, area).asStr() == "NYC");
  CHECK(f.view.b(8, area).asStr() == "NYC");
  for (const auto& cc : f.fi.cs.ccs) {
    INFO("cc " << cc.id);
    CHECK(evalCCCount(cc, f.view) == cc.target);
  }
}

TEST_CASE("modified marginals pin only the overlap cells") {
  IlpFixture f;
  LinearSystem sys = buildSystem(f.bs, f.fi.cs.ccs, MarginalMode::Modified, f.fi.r1);

  size_t margRows = 0, margRowsWithVars = 0, ccRows = 0;
  for (const auto& row : sys.rows) {
    if (row.kind == SysRow::Kind::Marginal) {
      ++margRows;
      if (!row.vars.empty()) ++margRowsWithVars;
    } else {
      ++ccRows;
    }
  }
  // every CC pair except (cc1, cc2) intersects; their overlap regions refine
  // into 7 distinct cells, of which only two are populated
  CHECK(margRows == 7);
  CHECK(margRowsWithVars == 2);
  CHECK(ccRows == 4);

  IntegerSolution sol = solveInteger(sys);
  CHECK(sol.residual == 0);
  CHECK(sol.exact);
  for (const auto& row : sys.rows) {
    INFO(row.label);
    CHECK(rowSum(row, sol.x) == row.target);
  }

  greedyFill(f.view, f.bs, f.pool, sol);
  for (const auto& cc : f.fi.cs.ccs) {
    INFO("cc " << cc.id);
    CHECK(evalCCCount(cc, f.view) == cc.target);
  }
}

TEST_CASE("marginal-free mode only promises the CC rows themselves") {
  IlpFixture f;
  LinearSystem sys = buildSystem(f.bs, f.fi.cs.ccs, MarginalMode::None, f.fi.r1);
  REQUIRE(sys.rows.size() == 4);
  IntegerSolution sol = solveInteger(sys);
  CHECK(sol.residual == 0);
  for (const auto& row : sys.rows) CHECK(rowSum(row, sol.x) == row.target);
}

namespace {

// two children, one Chicago household, and a CC asking for five of them
struct TinyInfeasible {
  Relation persons{testutil::personsSchema()};
  Relation housing{testutil::housingSchema()};
  ConstraintSet cs;

  TinyInfeasible() {
    persons.append(testutil::person(1, 5, "Child", 0));
    persons.append(testutil::person(2, 6, "Child", 0));
    housing.append(testutil::house(1, "Chicago"));
    cs = parseConstraints(R"({
      "ccs": [{"id": "big", "where": [{"col": "Age", "in": [0, 10]},
                                       {"col": "Area", "op": "=", "value": "Chicago"}],
               "target": 5}]})",
                          persons.schema(), housing.schema());
  }
};

}  // namespace

TEST_CASE("unreachable targets leave a provably optimal residual") {
  TinyInfeasible t;
  JoinView view = initJoinView(t.persons, t.housing);
  ComboPool pool = computeComboPool(t.cs.ccs, t.housing, view);
  BinSpace bs = buildBinSpace(t.cs.ccs, view, pool);
  LinearSystem sys = buildSystem(bs, t.cs.ccs, MarginalMode::AllWay, t.persons);

  IntegerSolution sol = solveInteger(sys);
  CHECK(sol.residual == 3);  // two rows exist, five were asked for
  CHECK(sol.exact);

  greedyFill(view, bs, pool, sol);
  CHECK(testutil::allBComplete(view));
  CHECK(evalCCCount(t.cs.ccs[0], view) == 2);
}

TEST_CASE("an exhausted node budget is reported as inexact") {
  TinyInfeasible t;
  JoinView view = initJoinView(t.persons, t.housing);
  ComboPool pool = computeComboPool(t.cs.ccs, t.housing, view);
  BinSpace bs = buildBinSpace(t.cs.ccs, view, pool);
  LinearSystem sys = buildSystem(bs, t.cs.ccs, MarginalMode::AllWay, t.persons);

  IntegerSolution sol = solveInteger(sys, SolverBudget{1, 60.0});
  CHECK_FALSE(sol.exact);
}

TEST_CASE("greedyFill never assigns more rows than a bin holds") {
  TinyInfeasible t;
  JoinView view = initJoinView(t.persons, t.housing);
  ComboPool pool = computeComboPool(t.cs.ccs, t.housing, view);
  BinSpace bs = buildBinSpace(t.cs.ccs, view, pool);
  REQUIRE(bs.binCount() == 1);

  IntegerSolution forced;
  forced.x = {5};  // more than the two members
  greedyFill(view, bs, pool, forced);
  CHECK(testutil::allBComplete(view));
  CHECK(evalCCCount(t.cs.ccs[0], view) == 2);
}

TEST_CASE("dumpSystem names every variable, row, and bound") {
  IlpFixture f;
  LinearSystem sys = buildSystem(f.bs, f.fi.cs.ccs, MarginalMode::AllWay, f.fi.r1);
  std::string lp = dumpSystem(sys, f.bs);
  CHECK(lp.find("\\ x0 = bin0{") != std::string::npos);
  CHECK(lp.find("combo{Area=Chicago}") != std::string::npos);
  CHECK(lp.find("marg:bin0:") != std::string::npos);
  CHECK(lp.find("cc1:") != std::string::npos);
  CHECK(lp.find("0 <= x0 <= 2") != std::string::npos);
  CHECK(lp.find("= 4\n") != std::string::npos);  // cc1's target
}
