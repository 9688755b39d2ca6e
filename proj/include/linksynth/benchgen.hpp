#ifndef LINKSYNTH_BENCHGEN_HPP
#define LINKSYNTH_BENCHGEN_HPP

//===========================================================================
// Census-flavored benchmark generator: persons/households instances whose
// ground truth satisfies all twelve household DCs by construction, plus CC
// sets built from the good (chain/disjoint) or bad (overlapping-interval)
// template tables with targets taken from the generated assignment, so
// every instance is feasible.
//===========================================================================

#include <cmath>
#include <random>

#include "linksynth/constraints.hpp"
#include "linksynth/io.hpp"

namespace linksynth {

enum class DcSet : uint8_t { Good8, All12 };
enum class CcSet : uint8_t { Good, Bad };

inline const char* dcSetName(DcSet s) { return s == DcSet::Good8 ? "good8" : "all12"; }
inline const char* ccSetName(CcSet s) { return s == CcSet::Good ? "good" : "bad"; }

struct BenchConfig {
  double scale = 1.0;  // 1x = 25,099 persons / 9,820 households
  uint64_t seed = 1;
  DcSet dcSet = DcSet::Good8;
  CcSet ccSet = CcSet::Good;
  int ccCount = 1001;
  int extraR2Columns = 0;  // 0..8: County, St, Div, Reg, Water, Bath, Fridge, Stove
};

struct GeneratedInstance {
  Relation r1;       // FK column null
  Relation r1Truth;  // FK column holds the generating assignment
  Relation r2;
  ConstraintSet cs;
  nlohmann::json constraintsJson;
};

namespace bench {

constexpr int kNumAreas = 121;
constexpr int kNumTenures = 4;
constexpr int kNumTAUnits = 469;  // of the 484 tenure-area combinations

inline const std::vector<std::string>& tenures() {
  static const std::vector<std::string> v{"Mortgage", "Owned", "Rented", "NoRent"};
  return v;
}

inline const std::vector<std::string>& rels() {
  static const std::vector<std::string> v{
      "Owner",       "Spouse",           "BiologicalChild",   "AdoptedChild",
      "StepChild",   "Sibling",          "FatherMother",      "Grandchild",
      "ParentInLaw", "SonDaughterInLaw", "HousemateRoommate", "UnmarriedPartner",
      "FosterChild"};
  return v;
}

inline std::string areaName(int a) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "A%03d", a);
  return buf;
}

// R1-side CC template: age interval, relationship, optional Multi-ling value.
struct CcTemplate {
  int lo, hi;
  const char* rel;
  int ml;  // -1 = unconstrained
};

// R2-side unit: a (Tenure, Area) pair or a bare Area.
struct Unit {
  int tenure;  // -1 = bare area
  int area;
};

// Good set: five containment chains (emitted once, one tenure-area unit each)
// followed by ten pairwise-disjoint bulk templates cycled over the units.
inline const std::vector<std::vector<CcTemplate>>& goodChains() {
  static const std::vector<std::vector<CcTemplate>> v{
      {{0, 10, "BiologicalChild", -1},
       {6, 10, "BiologicalChild", -1},
       {2, 5, "BiologicalChild", -1},
       {3, 5, "BiologicalChild", -1},
       {3, 5, "BiologicalChild", 0}},
      {{11, 18, "BiologicalChild", -1},
       {11, 13, "BiologicalChild", -1},
       {14, 18, "BiologicalChild", -1}},
      {{19, 30, "BiologicalChild", -1},
       {22, 30, "BiologicalChild", -1},
       {25, 30, "BiologicalChild", 1}},
      {{0, 30, "StepChild", -1}, {0, 20, "StepChild", -1}, {21, 30, "StepChild", 1}},
      {{19, 40, "AdoptedChild", -1}, {25, 40, "AdoptedChild", 1}, {31, 40, "AdoptedChild", 1}}};
  return v;
}

inline const std::vector<CcTemplate>& goodBulk() {
  static const std::vector<CcTemplate> v{
      {18, 114, "Owner", 0},            {18, 114, "Spouse", 1},
      {18, 39, "FatherMother", -1},     {40, 85, "FatherMother", 0},
      {40, 85, "FatherMother", 1},      {15, 85, "HousemateRoommate", 0},
      {15, 85, "HousemateRoommate", 1}, {18, 30, "Grandchild", 0},
      {18, 30, "Grandchild", 1},        {18, 114, "UnmarriedPartner", 1}};
  return v;
}

// Bad set: eight groups several of which contain genuinely intersecting age
// intervals (spouse, grandchild, parent), then six bulk templates.
inline const std::vector<std::vector<CcTemplate>>& badChains() {
  static const std::vector<std::vector<CcTemplate>> v{
      {{18, 114, "Spouse", 1},
       {21, 114, "Spouse", 1},
       {21, 64, "Spouse", 1},
       {18, 39, "Spouse", 1},
       {18, 85, "Spouse", 1},
       {40, 85, "Spouse", 1}},
      {{0, 10, "BiologicalChild", -1},
       {6, 10, "BiologicalChild", -1},
       {2, 5, "BiologicalChild", -1},
       {3, 5, "BiologicalChild", 0}},
      {{11, 18, "BiologicalChild", -1},
       {11, 13, "BiologicalChild", -1},
       {14, 18, "BiologicalChild", -1}},
      {{19, 30, "BiologicalChild", -1}, {22, 30, "BiologicalChild", -1}},
      {{0, 30, "StepChild", -1}, {0, 21, "StepChild", -1}},
      {{19, 39, "AdoptedChild", -1}, {25, 39, "AdoptedChild", 1}, {31, 39, "AdoptedChild", 1}},
      {{0, 39, "Grandchild", 1}, {22, 39, "Grandchild", 1}, {18, 30, "Grandchild", 1}},
      {{40, 85, "FatherMother", 1}, {65, 114, "FatherMother", 1}}};
  return v;
}

inline const std::vector<CcTemplate>& badBulk() {
  static const std::vector<CcTemplate> v{
      {18, 114, "Owner", 0},            {18, 114, "UnmarriedPartner", 1},
      {15, 85, "HousemateRoommate", 0}, {15, 85, "HousemateRoommate", 1},
      {18, 30, "Grandchild", 0},        {40, 85, "FatherMother", 0}};
  return v;
}

// Unit order interleaves tenure-area pairs with bare areas so both CC shapes
// appear early; tenure-area pairs run area-major.
inline std::vector<Unit> unitList() {
  std::vector<Unit> ta, bare, out;
  for (int a = 0; a < kNumAreas && static_cast<int>(ta.size()) < kNumTAUnits; ++a)
    for (int t = 0; t < kNumTenures && static_cast<int>(ta.size()) < kNumTAUnits; ++t)
      ta.push_back({t, a});
  for (int a = 0; a < kNumAreas; ++a) bare.push_back({-1, a});
  size_t i = 0;
  while (i < ta.size() || i < bare.size()) {
    if (i < ta.size()) out.push_back(ta[i]);
    if (i < bare.size()) out.push_back(bare[i]);
    ++i;
  }
  return out;
}

inline double unitReal(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline int randInt(std::mt19937_64& rng, int n) { return static_cast<int>(rng() % n); }

// Template-unit pairs in emission order: chains first (distinct tenure-area
// units so chains stay pairwise R2-disjoint), then bulk over the unit list.
inline std::vector<std::pair<CcTemplate, Unit>> ccDefinitions(CcSet set, int count) {
  const auto& chains = set == CcSet::Good ? goodChains() : badChains();
  const auto& bulk = set == CcSet::Good ? goodBulk() : badBulk();
  std::vector<Unit> units = unitList();
  size_t chainTotal = 0;
  for (const auto& c : chains) chainTotal += c.size();
  size_t capacity = chainTotal + bulk.size() * units.size();
  if (count < 0 || static_cast<size_t>(count) > capacity)
    fail(Errc::CapacityExceeded, "ccCount exceeds the template-unit inventory");
  std::vector<std::pair<CcTemplate, Unit>> defs;
  defs.reserve(count);
  for (size_t c = 0; c < chains.size() && defs.size() < static_cast<size_t>(count); ++c) {
    Unit u{static_cast<int>(c % kNumTenures), static_cast<int>(c)};
    for (const auto& t : chains[c]) {
      if (defs.size() == static_cast<size_t>(count)) break;
      defs.push_back({t, u});
    }
  }
  for (size_t k = 0; defs.size() < static_cast<size_t>(count); ++k)
    defs.push_back({bulk[k % bulk.size()], units[k / bulk.size()]});
  return defs;
}

// Person reduced to the attribute indexes the CC templates mention.
struct PersonLite {
  int age, rel, ml, tenure, area;
};

inline std::vector<PersonLite> liftPersons(const Relation& r1Truth, const Relation& r2) {
  const Schema& s1 = r1Truth.schema();
  const Schema& s2 = r2.schema();
  int cAge = s1.indexOf("Age"), cRel = s1.indexOf("Rel"), cMl = s1.indexOf("Multi-ling");
  int cT = s2.indexOf("Tenure"), cA = s2.indexOf("Area");
  if (cAge < 0 || cRel < 0 || cMl < 0 || s1.fkIndex() < 0 || cT < 0 || cA < 0)
    fail(Errc::UnknownColumn, "constraint templates require the benchmark schemas");
  auto relIdx = [&](const std::string& s) {
    for (size_t k = 0; k < rels().size(); ++k)
      if (rels()[k] == s) return static_cast<int>(k);
    return -1;
  };
  auto tenureIdx = [&](const std::string& s) {
    for (size_t k = 0; k < tenures().size(); ++k)
      if (tenures()[k] == s) return static_cast<int>(k);
    return -1;
  };
  std::vector<PersonLite> out;
  out.reserve(r1Truth.size());
  for (size_t i = 0; i < r1Truth.size(); ++i) {
    const auto& row = r1Truth.row(i);
    const Value& fk = row[s1.fkIndex()];
    if (fk.isNull()) fail(Errc::NullCell, "ground truth must carry a complete FK column");
    long h = r2.findKey(fk.asInt());
    if (h < 0) fail(Errc::DanglingForeignKey, "ground truth FK references a missing household");
    PersonLite p;
    p.age = static_cast<int>(row[cAge].asInt());
    p.rel = relIdx(row[cRel].asStr());
    p.ml = static_cast<int>(row[cMl].asInt());
    p.tenure = tenureIdx(r2.row(static_cast<size_t>(h))[cT].asStr());
    p.area = std::atoi(r2.row(static_cast<size_t>(h))[cA].asStr().c_str() + 1);
    out.push_back(p);
  }
  return out;
}

}  // namespace bench

// Cross the built-in predicate templates with tenure-area units and fill
// targets from the ground-truth linkage.
inline std::vector<LinearCC> instantiateConstraintTemplates(CcSet set, const Relation& r1Truth,
                                                            const Relation& r2, int count) {
  using namespace bench;
  auto defs = ccDefinitions(set, count);
  auto people = liftPersons(r1Truth, r2);
  nlohmann::json ccs = nlohmann::json::array();
  for (size_t ci = 0; ci < defs.size(); ++ci) {
    const CcTemplate& t = defs[ci].first;
    const Unit& u = defs[ci].second;
    int relIdx = -1;
    for (size_t k = 0; k < rels().size(); ++k)
      if (rels()[k] == t.rel) relIdx = static_cast<int>(k);
    int64_t target = 0;
    for (const auto& p : people) {
      if (p.age < t.lo || p.age > t.hi || p.rel != relIdx) continue;
      if (t.ml >= 0 && p.ml != t.ml) continue;
      if (u.tenure >= 0 && p.tenure != u.tenure) continue;
      if (p.area != u.area) continue;
      ++target;
    }
    nlohmann::json where = nlohmann::json::array();
    where.push_back({{"col", "Age"}, {"in", {t.lo, t.hi}}});
    where.push_back({{"col", "Rel"}, {"op", "="}, {"value", t.rel}});
    if (t.ml >= 0) where.push_back({{"col", "Multi-ling"}, {"op", "="}, {"value", t.ml}});
    if (u.tenure >= 0)
      where.push_back({{"col", "Tenure"}, {"op", "="}, {"value", tenures()[u.tenure]}});
    where.push_back({{"col", "Area"}, {"op", "="}, {"value", areaName(u.area)}});
    ccs.push_back(
        {{"id", "cc" + std::to_string(ci + 1)}, {"target", target}, {"where", where}});
  }
  nlohmann::json doc{{"ccs", ccs}, {"dcs", nlohmann::json::array()}};
  return parseConstraints(doc, r1Truth.schema(), r2.schema()).ccs;
}

//------------------------------------------------------------- DC expansion

// The twelve built-in DC rules in conjunctive form: 28 for good8 (age-window
// rules 1-8), 36 for all12 (adding the owner/partner-pair and zero-count
// rules). The child-age windows are keyed on the homeowner's Multi-ling
// value.
inline nlohmann::json benchDcsJson(DcSet set) {
  using nlohmann::json;
  json dcs = json::array();
  auto unaryS = [](int t, const char* col, const char* op, const std::string& v) {
    return json{{"t", t}, {"col", col}, {"op", op}, {"value", v}};
  };
  auto unaryI = [](int t, const char* col, const char* op, int64_t v) {
    return json{{"t", t}, {"col", col}, {"op", op}, {"value", v}};
  };
  auto varAge = [](int t, const char* op, int t2, int64_t offset) {
    return json{{"t", t},   {"col", "Age"},  {"op", op},
                {"t2", t2}, {"col2", "Age"}, {"offset", offset}};
  };
  auto pairRule = [&](const std::string& id, const char* rel, int ownerMl, int64_t lo,
                      int64_t hi) {
    json ownerAtoms = json::array({unaryS(1, "Rel", "=", "Owner")});
    if (ownerMl >= 0) ownerAtoms.push_back(unaryI(1, "Multi-ling", "=", ownerMl));
    json low = ownerAtoms;
    low.push_back(unaryS(2, "Rel", "=", rel));
    low.push_back(varAge(2, "<", 1, lo));
    dcs.push_back({{"id", id + "_low"}, {"arity", 2}, {"body", low}});
    json up = ownerAtoms;
    up.push_back(unaryS(2, "Rel", "=", rel));
    up.push_back(varAge(2, ">", 1, hi));
    dcs.push_back({{"id", id + "_up"}, {"arity", 2}, {"body", up}});
  };

  for (const char* rel : {"BiologicalChild", "AdoptedChild", "StepChild"}) {
    pairRule(std::string("dc_child_ml0_") + rel, rel, 0, -69, -12);
    pairRule(std::string("dc_child_ml1_") + rel, rel, 1, -50, -12);
  }
  pairRule("dc_spouse", "Spouse", -1, -50, 50);
  pairRule("dc_upartner", "UnmarriedPartner", -1, -50, 50);
  pairRule("dc_sibling", "Sibling", -1, -35, 35);
  pairRule("dc_parent", "FatherMother", -1, 12, 115);
  pairRule("dc_parentinlaw", "ParentInLaw", -1, 12, 115);
  pairRule("dc_grandchild", "Grandchild", -1, -115, -30);
  pairRule("dc_childinlaw", "SonDaughterInLaw", -1, -69, -1);
  pairRule("dc_foster", "FosterChild", -1, -69, -12);

  if (set == DcSet::All12) {
    dcs.push_back({{"id", "dc_two_owners"},
                   {"arity", 2},
                   {"body", json::array({unaryS(1, "Rel", "=", "Owner"),
                                         unaryS(2, "Rel", "=", "Owner")})}});
    for (const char* rel : {"Grandchild", "SonDaughterInLaw"})
      dcs.push_back({{"id", std::string("dc_young_owner_") + rel},
                     {"arity", 2},
                     {"body", json::array({unaryS(1, "Rel", "=", "Owner"),
                                           unaryI(1, "Age", "<", 30),
                                           unaryS(2, "Rel", "=", rel)})}});
    for (const char* rel : {"FatherMother", "ParentInLaw"})
      dcs.push_back({{"id", std::string("dc_old_owner_") + rel},
                     {"arity", 2},
                     {"body", json::array({unaryS(1, "Rel", "=", "Owner"),
                                           unaryI(1, "Age", ">", 94),
                                           unaryS(2, "Rel", "=", rel)})}});
    const char* pairRels[3][2] = {{"Spouse", "Spouse"},
                                  {"Spouse", "UnmarriedPartner"},
                                  {"UnmarriedPartner", "UnmarriedPartner"}};
    const char* pairIds[3] = {"dc_two_spouses", "dc_spouse_upartner", "dc_two_upartners"};
    for (int i = 0; i < 3; ++i)
      dcs.push_back({{"id", pairIds[i]},
                     {"arity", 2},
                     {"body", json::array({unaryS(1, "Rel", "=", pairRels[i][0]),
                                           unaryS(2, "Rel", "=", pairRels[i][1])})}});
  }
  return dcs;
}

//----------------------------------------------------------------- generator

inline GeneratedInstance generateInstance(const BenchConfig& cfg) {
  using namespace bench;
  if (cfg.extraR2Columns < 0 || cfg.extraR2Columns > 8)
    fail(Errc::Parse, "extraR2Columns must be in [0,8]");
  int64_t P = std::llround(25099.0 * cfg.scale);
  int64_t H = std::llround(9820.0 * cfg.scale);
  if (P < 1 || H < 1) fail(Errc::Parse, "scale produces an empty instance");
  std::mt19937_64 rng(cfg.seed);

  // household sizes: draw 1..7, then nudge round-robin to hit P exactly
  static const double sizeProb[7] = {0.28, 0.30, 0.18, 0.13, 0.06, 0.03, 0.02};
  std::vector<int> hsize(H);
  int64_t total = 0;
  for (auto& s : hsize) {
    double u = unitReal(rng), acc = 0;
    s = 7;
    for (int k = 0; k < 7; ++k) {
      acc += sizeProb[k];
      if (u < acc) {
        s = k + 1;
        break;
      }
    }
    total += s;
  }
  for (size_t i = 0; total > P; i = (i + 1) % hsize.size())
    if (hsize[i] > 1) {
      --hsize[i];
      --total;
    }
  for (size_t i = 0; total < P; i = (i + 1) % hsize.size())
    if (hsize[i] < 7) {
      ++hsize[i];
      ++total;
    }

  // households
  static const char* extraNames[8] = {"County", "St",   "Div",    "Reg",
                                      "Water",  "Bath", "Fridge", "Stove"};
  std::vector<Column> hcols{{"h_id", ColumnKind::Integer, ColumnRole::PrimaryKey},
                            {"Tenure", ColumnKind::Categorical, ColumnRole::Data},
                            {"Area", ColumnKind::Categorical, ColumnRole::Data}};
  for (int i = 0; i < cfg.extraR2Columns; ++i)
    hcols.push_back({extraNames[i], ColumnKind::Categorical, ColumnRole::Data});
  Schema hschema("households", hcols);
  Relation r2(hschema);

  for (int64_t h = 0; h < H; ++h) {
    std::vector<Value> row{Value::ofInt(h + 1),
                           Value::ofStr(tenures()[randInt(rng, kNumTenures)]),
                           Value::ofStr(areaName(randInt(rng, kNumAreas)))};
    int st = -1;
    for (int i = 0; i < cfg.extraR2Columns; ++i) {
      char buf[8];
      switch (i) {
        case 0: std::snprintf(buf, sizeof buf, "C%02d", randInt(rng, 20)); break;
        case 1:
          st = randInt(rng, 50);
          std::snprintf(buf, sizeof buf, "S%02d", st);
          break;
        case 2: std::snprintf(buf, sizeof buf, "D%d", (st < 0 ? 0 : st % 9) + 1); break;
        case 3: std::snprintf(buf, sizeof buf, "R%d", (st < 0 ? 0 : st % 4) + 1); break;
        default: std::snprintf(buf, sizeof buf, "%s", randInt(rng, 2) ? "Y" : "N"); break;
      }
      row.push_back(Value::ofStr(buf));
    }
    r2.append(std::move(row));
  }

  // persons: one owner per household, members sampled inside the DC windows
  enum Role { Owner, Spouse, Bio, Adopted, Step, Sibling, FM, GC, PIL, SDIL, HR, UP, Foster };
  static const double roleProb[13] = {0,    0.32, 0.34, 0.03, 0.04, 0.04, 0.04,
                                      0.04, 0.02, 0.02, 0.05, 0.03, 0.03};
  struct P4 {
    int age, rel, ml;
    int64_t hid;
  };
  std::vector<P4> persons;
  persons.reserve(P);
  for (int64_t h = 0; h < H; ++h) {
    int A = 18 + randInt(rng, 78);  // owner age in [18,95]
    int ownerMl = unitReal(rng) < 0.3 ? 1 : 0;
    persons.push_back({A, Owner, ownerMl, h + 1});
    bool partnerTaken = false;
    for (int m = 1; m < hsize[h]; ++m) {
      int role = HR;
      for (int tries = 0; tries < 64; ++tries) {
        double u = unitReal(rng), acc = 0;
        int cand = HR;
        for (int k = 1; k < 13; ++k) {
          acc += roleProb[k];
          if (u < acc) {
            cand = k;
            break;
          }
        }
        if ((cand == Spouse || cand == UP) && partnerTaken) continue;
        if ((cand == GC || cand == SDIL) && A < 30) continue;
        if ((cand == FM || cand == PIL) && A > 94) continue;
        role = cand;
        break;
      }
      if ((role == Spouse || role == UP) && partnerTaken) role = HR;
      if (role == Spouse || role == UP) partnerTaken = true;
      int ml = unitReal(rng) < 0.3 ? 1 : 0;
      int lo, hi;
      switch (role) {
        case Bio:
        case Adopted:
        case Step:
          lo = std::max(0, A - (ownerMl ? 50 : 69));
          hi = A - 12;
          break;
        case Foster:
          lo = std::max(0, A - 69);
          hi = A - 12;
          break;
        case Spouse:
        case UP:
          lo = std::max(0, A - 50);
          hi = std::min(115, A + 50);
          break;
        case Sibling:
          lo = std::max(0, A - 35);
          hi = std::min(115, A + 35);
          break;
        case FM:
        case PIL:
          lo = A + 12;
          hi = 115;
          break;
        case GC:
          lo = 0;
          hi = A - 30;
          break;
        case SDIL:
          lo = std::max(0, A - 69);
          hi = A - 1;
          break;
        default:  // housemate
          lo = 15;
          hi = 95;
          break;
      }
      persons.push_back({lo + randInt(rng, hi - lo + 1), role, ml, h + 1});
    }
  }
  for (size_t i = persons.size() - 1; i > 0; --i)
    std::swap(persons[i], persons[randInt(rng, static_cast<int>(i + 1))]);

  Schema pschema("persons", {{"p_id", ColumnKind::Integer, ColumnRole::PrimaryKey},
                             {"Age", ColumnKind::Integer, ColumnRole::Data},
                             {"Rel", ColumnKind::Categorical, ColumnRole::Data},
                             {"Multi-ling", ColumnKind::Integer, ColumnRole::Data},
                             {"h_id", ColumnKind::Integer, ColumnRole::ForeignKey}});
  Relation r1Truth(pschema), r1(pschema);
  for (size_t i = 0; i < persons.size(); ++i) {
    const P4& p = persons[i];
    r1Truth.append({Value::ofInt(static_cast<int64_t>(i) + 1), Value::ofInt(p.age),
                    Value::ofStr(rels()[p.rel]), Value::ofInt(p.ml), Value::ofInt(p.hid)});
    r1.append({Value::ofInt(static_cast<int64_t>(i) + 1), Value::ofInt(p.age),
               Value::ofStr(rels()[p.rel]), Value::ofInt(p.ml), Value::null()});
  }

  ConstraintSet cs;
  cs.ccs = instantiateConstraintTemplates(cfg.ccSet, r1Truth, r2, cfg.ccCount);
  nlohmann::json dcDoc{{"ccs", nlohmann::json::array()}, {"dcs", benchDcsJson(cfg.dcSet)}};
  cs.dcs = parseConstraints(dcDoc, pschema, hschema).dcs;
  nlohmann::json doc = constraintsToJson(cs);
  return GeneratedInstance{std::move(r1), std::move(r1Truth), std::move(r2), std::move(cs),
                           std::move(doc)};
}

inline nlohmann::json benchConfigJson(const BenchConfig& cfg) {
  return nlohmann::json{{"scale", cfg.scale},
                        {"seed", cfg.seed},
                        {"dcSet", dcSetName(cfg.dcSet)},
                        {"ccSet", ccSetName(cfg.ccSet)},
                        {"ccCount", cfg.ccCount},
                        {"extraR2Columns", cfg.extraR2Columns}};
}

}  // namespace linksynth

#endif
