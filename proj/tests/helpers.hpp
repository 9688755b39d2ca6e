#ifndef LINKSYNTH_TEST_HELPERS_HPP
#define LINKSYNTH_TEST_HELPERS_HPP

// Shared fixture loading for the unit and acceptance suites. The running
// example (persons/housing with four CCs and five DCs) lives in
// tests/fixtures and is reused all over the place.

#include <string>

#include "linksynth/io.hpp"
#include "linksynth/pipeline.hpp"

namespace testutil {

inline std::string fixturePath(const std::string& name) {
  return std::string(LINKSYNTH_FIXTURES_DIR) + "/" + name;
}

struct ExampleInstance {
  linksynth::Relation r1;
  linksynth::Relation r2;
  linksynth::ConstraintSet cs;
};

// R1 with the FK column entirely null, R2, and the constraint document.
inline ExampleInstance loadExample() {
  ExampleInstance fi;
  fi.r1 = linksynth::loadRelation(fixturePath("persons.csv"));
  fi.r2 = linksynth::loadRelation(fixturePath("housing.csv"));
  fi.cs = linksynth::parseConstraints(linksynth::readJson(fixturePath("constraints.json")),
                                      fi.r1.schema(), fi.r2.schema());
  return fi;
}

// Same constraints, but R1 is the known-good completion.
inline ExampleInstance loadExampleCompleted() {
  ExampleInstance fi;
  fi.r1 = linksynth::loadRelation(fixturePath("persons_completed.csv"));
  fi.r2 = linksynth::loadRelation(fixturePath("housing.csv"));
  fi.cs = linksynth::parseConstraints(linksynth::readJson(fixturePath("constraints.json")),
                                      fi.r1.schema(), fi.r2.schema());
  return fi;
}

inline linksynth::Schema personsSchema() {
  using namespace linksynth;
  return Schema("persons", {{"p_id", ColumnKind::Integer, ColumnRole::PrimaryKey},
                            {"Age", ColumnKind::Integer, ColumnRole::Data},
                            {"Rel", ColumnKind::Categorical, ColumnRole::Data},
                            {"Multi-ling", ColumnKind::Integer, ColumnRole::Data},
                            {"h_id", ColumnKind::Integer, ColumnRole::ForeignKey}});
}

inline linksynth::Schema housingSchema() {
  using namespace linksynth;
  return Schema("housing", {{"h_id", ColumnKind::Integer, ColumnRole::PrimaryKey},
                            {"Area", ColumnKind::Categorical, ColumnRole::Data}});
}

inline std::vector<linksynth::Value> person(int64_t id, int64_t age, const std::string& rel,
                                            int64_t ml) {
  using linksynth::Value;
  return {Value::ofInt(id), Value::ofInt(age), Value::ofStr(rel), Value::ofInt(ml),
          Value::null()};
}

inline std::vector<linksynth::Value> house(int64_t id, const std::string& area) {
  using linksynth::Value;
  return {Value::ofInt(id), Value::ofStr(area)};
}

// True when every B-cell of every view row has been assigned.
inline bool allBComplete(const linksynth::JoinView& v) {
  for (size_t row = 0; row < v.size(); ++row)
    if (!v.bComplete(row)) return false;
  return true;
}

}  // namespace testutil

#endif
