#ifndef LINKSYNTH_MODEL_HPP
#define LINKSYNTH_MODEL_HPP

//===========================================================================
// Core data model: schemas, relations, and the FK-join view the solver fills.
// R1 carries the single nullable FK column; R2 is the referenced relation.
//===========================================================================

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "linksynth/errors.hpp"
#include "linksynth/value.hpp"

namespace linksynth {

enum class ColumnKind : uint8_t { Integer, Categorical };
enum class ColumnRole : uint8_t { PrimaryKey, ForeignKey, Data };

inline const char* kindName(ColumnKind k) {
  return k == ColumnKind::Integer ? "integer" : "categorical";
}
inline const char* roleName(ColumnRole r) {
  switch (r) {
    case ColumnRole::PrimaryKey: return "primary-key";
    case ColumnRole::ForeignKey: return "foreign-key";
    case ColumnRole::Data: return "data";
  }
  return "?";
}

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Integer;
  ColumnRole role = ColumnRole::Data;
};

// Ordered column list; exactly one primary key, at most one foreign key.
class Schema {
 public:
  Schema() = default;
  Schema(std::string name, std::vector<Column> cols) : name_(std::move(name)), cols_(std::move(cols)) {
    pk_ = fk_ = -1;
    for (int i = 0; i < static_cast<int>(cols_.size()); ++i) {
      const Column& c = cols_[i];
      if (byName_.count(c.name)) fail(Errc::Parse, "duplicate column name " + c.name);
      byName_[c.name] = i;
      if (c.role == ColumnRole::PrimaryKey) {
        if (pk_ >= 0) fail(Errc::Parse, "more than one primary key in " + name_);
        if (c.kind != ColumnKind::Integer) fail(Errc::Parse, "primary key must be integer");
        pk_ = i;
      } else if (c.role == ColumnRole::ForeignKey) {
        if (fk_ >= 0) fail(Errc::Parse, "more than one foreign key in " + name_);
        if (c.kind != ColumnKind::Integer) fail(Errc::Parse, "foreign key must be integer");
        fk_ = i;
      }
    }
    if (pk_ < 0) fail(Errc::Parse, "no primary key in relation " + name_);
  }

  const std::string& name() const { return name_; }
  const std::vector<Column>& columns() const { return cols_; }
  int pkIndex() const { return pk_; }
  int fkIndex() const { return fk_; }
  bool hasFK() const { return fk_ >= 0; }
  int size() const { return static_cast<int>(cols_.size()); }

  int indexOf(const std::string& col) const {
    auto it = byName_.find(col);
    return it == byName_.end() ? -1 : it->second;
  }
  int requireIndex(const std::string& col) const {
    int i = indexOf(col);
    if (i < 0) fail(Errc::UnknownColumn, "no column " + col + " in " + name_);
    return i;
  }

 private:
  std::string name_;
  std::vector<Column> cols_;
  std::unordered_map<std::string, int> byName_;
  int pk_ = -1, fk_ = -1;
};

// Row-oriented relation with a primary-key index. Order of appends is the
// row order everywhere downstream.
class Relation {
 public:
  Relation() = default;
  explicit Relation(Schema schema) : schema_(std::move(schema)) {}

  const Schema& schema() const { return schema_; }
  const std::vector<std::vector<Value>>& rows() const { return rows_; }
  size_t size() const { return rows_.size(); }
  const std::vector<Value>& row(size_t i) const { return rows_[i]; }
  int64_t key(size_t i) const { return rows_[i][schema_.pkIndex()].asInt(); }

  void append(std::vector<Value> cells) {
    if (static_cast<int>(cells.size()) != schema_.size())
      fail(Errc::Parse, "row width mismatch in " + schema_.name());
    for (int c = 0; c < schema_.size(); ++c) {
      const Column& col = schema_.columns()[c];
      const Value& v = cells[c];
      if (v.isNull()) {
        if (col.role != ColumnRole::ForeignKey)
          fail(Errc::NullCell, "null in column " + col.name + " of " + schema_.name());
        continue;
      }
      if (col.kind == ColumnKind::Integer && !v.isInt())
        fail(Errc::TypeMismatch, "non-integer in column " + col.name);
      if (col.kind == ColumnKind::Categorical && !v.isStr())
        fail(Errc::TypeMismatch, "non-string in column " + col.name);
    }
    int64_t k = cells[schema_.pkIndex()].asInt();
    if (!pkIndex_.emplace(k, rows_.size()).second)
      fail(Errc::DuplicatePrimaryKey, schema_.name() + " key " + std::to_string(k));
    rows_.push_back(std::move(cells));
  }

  // Row position by primary key, or -1.
  long findKey(int64_t k) const {
    auto it = pkIndex_.find(k);
    return it == pkIndex_.end() ? -1 : static_cast<long>(it->second);
  }

  void setCell(size_t row, int col, const Value& v) { rows_[row][col] = v; }

  // FK column state: all-null, all-set, or mixed (mixed is rejected on load).
  enum class FkState { NoFk, AllNull, AllSet, Mixed };
  FkState fkState() const {
    if (!schema_.hasFK()) return FkState::NoFk;
    size_t nulls = 0;
    for (const auto& r : rows_)
      if (r[schema_.fkIndex()].isNull()) ++nulls;
    if (nulls == rows_.size()) return FkState::AllNull;
    return nulls == 0 ? FkState::AllSet : FkState::Mixed;
  }

  // Distinct values of a column in first-appearance order, then sorted.
  std::vector<Value> activeDomain(int col) const {
    std::vector<Value> out;
    std::unordered_map<Value, char, ValueHash> seen;
    for (const auto& r : rows_) {
      const Value& v = r[col];
      if (v.isNull()) continue;
      if (seen.emplace(v, 1).second) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  Schema schema_;
  std::vector<std::vector<Value>> rows_;
  std::unordered_map<int64_t, size_t> pkIndex_;
};

// Which side of the join a view column lives on.
enum class ViewSide : uint8_t { R1, R2 };

// The join view: R1 rows in order, each paired with the B-columns of the
// household the row will reference. B-cells start null and get filled by the
// two solver phases. The R1 side is read through the source relation and is
// never written here.
class JoinView {
 public:
  JoinView() = default;

  JoinView(const Relation* r1, const Relation* r2) : r1_(r1), r2_(r2) {
    const Schema& s1 = r1->schema();
    const Schema& s2 = r2->schema();
    if (!s1.hasFK()) fail(Errc::Parse, "R1 has no foreign key column");
    for (int c = 0; c < s2.size(); ++c) {
      if (c == s2.pkIndex()) continue;
      const std::string& n = s2.columns()[c].name;
      if (s1.indexOf(n) >= 0) fail(Errc::ColumnCollision, "column " + n + " exists in both relations");
      bCols_.push_back(c);
      bNames_.push_back(n);
    }
    bCells_.assign(r1->size(), std::vector<Value>(bCols_.size()));
  }

  const Relation& r1() const { return *r1_; }
  const Relation& r2() const { return *r2_; }
  size_t size() const { return bCells_.size(); }
  int64_t key(size_t row) const { return r1_->key(row); }

  const std::vector<std::string>& bNames() const { return bNames_; }
  int bIndexOf(const std::string& name) const {
    for (size_t i = 0; i < bNames_.size(); ++i)
      if (bNames_[i] == name) return static_cast<int>(i);
    return -1;
  }
  // Source column in R2's schema for B column i.
  int bSourceCol(int i) const { return bCols_[i]; }

  const Value& b(size_t row, int i) const { return bCells_[row][i]; }
  const std::vector<Value>& bRow(size_t row) const { return bCells_[row]; }
  void setB(size_t row, int i, const Value& v) { bCells_[row][i] = v; }

  bool bComplete(size_t row) const {
    for (const auto& v : bCells_[row])
      if (v.isNull()) return false;
    return true;
  }

  // Resolve a column name against either side; R1's FK is not addressable.
  struct ColRef {
    ViewSide side;
    int index;         // r1 schema index or b index
    ColumnKind kind;
  };
  std::optional<ColRef> resolve(const std::string& name) const {
    int i = r1_->schema().indexOf(name);
    if (i >= 0 && i != r1_->schema().fkIndex())
      return ColRef{ViewSide::R1, i, r1_->schema().columns()[i].kind};
    int b = bIndexOf(name);
    if (b >= 0) return ColRef{ViewSide::R2, b, r2_->schema().columns()[bCols_[b]].kind};
    return std::nullopt;
  }

  const Value& cell(size_t row, const ColRef& ref) const {
    return ref.side == ViewSide::R1 ? r1_->row(row)[ref.index] : bCells_[row][ref.index];
  }

 private:
  const Relation* r1_ = nullptr;
  const Relation* r2_ = nullptr;
  std::vector<int> bCols_;  // R2 schema indices backing the B columns
  std::vector<std::string> bNames_;
  std::vector<std::vector<Value>> bCells_;
};

// Fresh view over r1/r2 with every B-cell null. r1's FK must be entirely
// unassigned.
inline JoinView initJoinView(const Relation& r1, const Relation& r2) {
  if (r1.fkState() == Relation::FkState::Mixed || r1.fkState() == Relation::FkState::AllSet)
    fail(Errc::Parse, "initJoinView expects an unassigned FK column");
  return JoinView(&r1, &r2);
}

// View of a completed R1 against R2: every FK must resolve.
inline JoinView materializeJoin(const Relation& r1, const Relation& r2) {
  JoinView v(&r1, &r2);
  int fk = r1.schema().fkIndex();
  for (size_t i = 0; i < r1.size(); ++i) {
    const Value& f = r1.row(i)[fk];
    if (f.isNull()) fail(Errc::DanglingForeignKey, "row " + std::to_string(r1.key(i)) + " has null FK");
    long j = r2.findKey(f.asInt());
    if (j < 0)
      fail(Errc::DanglingForeignKey,
           "row " + std::to_string(r1.key(i)) + " references missing key " + f.toText());
    for (size_t b = 0; b < v.bNames().size(); ++b)
      v.setB(i, static_cast<int>(b), r2.row(j)[v.bSourceCol(static_cast<int>(b))]);
  }
  return v;
}

// Row-for-row equality on K1 and all B columns.
inline bool viewsEqual(const JoinView& a, const JoinView& b) {
  if (a.size() != b.size() || a.bNames() != b.bNames()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.key(i) != b.key(i)) return false;
    if (a.bRow(i) != b.bRow(i)) return false;
  }
  return true;
}

}  // namespace linksynth

#endif
