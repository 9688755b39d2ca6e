#ifndef LINKSYNTH_IO_HPP
#define LINKSYNTH_IO_HPP

//===========================================================================
// Relation I/O: RFC-4180 CSV bodies plus a JSON schema sidecar that maps each
// column to {kind, role}. persons.csv pairs with persons.schema.json.
//===========================================================================

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "linksynth/model.hpp"

namespace linksynth {

inline std::string schemaSidecarPath(const std::string& csvPath) {
  auto dot = csvPath.find_last_of('.');
  auto slash = csvPath.find_last_of("/\\");
  std::string stem = (dot == std::string::npos || (slash != std::string::npos && dot < slash))
                         ? csvPath
                         : csvPath.substr(0, dot);
  return stem + ".schema.json";
}

//--------------------------------------------------------------- CSV parsing

// Split a CSV payload into records of fields. Handles quoted fields, doubled
// quotes, embedded separators/newlines, and both LF and CRLF records.
inline std::vector<std::vector<std::string>> parseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, fieldStarted = false;
  size_t i = 0;
  auto endField = [&] {
    rec.push_back(field);
    field.clear();
    fieldStarted = false;
  };
  auto endRecord = [&] {
    endField();
    records.push_back(rec);
    rec.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (fieldStarted && !field.empty()) fail(Errc::Parse, "stray quote inside unquoted field");
        quoted = true;
        fieldStarted = true;
        ++i;
        break;
      case ',':
        endField();
        ++i;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        endRecord();
        ++i;
        break;
      case '\n':
        endRecord();
        ++i;
        break;
      default:
        field += c;
        fieldStarted = true;
        ++i;
        break;
    }
  }
  if (quoted) fail(Errc::Parse, "unterminated quoted field");
  if (fieldStarted || !field.empty() || !rec.empty()) endRecord();
  return records;
}

inline std::string csvQuote(const std::string& s) {
  bool needs = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

//------------------------------------------------------------ schema sidecar

inline Schema parseSchemaJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("columns")) fail(Errc::Parse, "schema json needs a columns array");
  std::vector<Column> cols;
  for (const auto& cj : j.at("columns")) {
    Column c;
    c.name = cj.at("name").get<std::string>();
    std::string kind = cj.at("kind").get<std::string>();
    if (kind == "integer")
      c.kind = ColumnKind::Integer;
    else if (kind == "categorical")
      c.kind = ColumnKind::Categorical;
    else
      fail(Errc::Parse, "unknown column kind " + kind);
    std::string role = cj.value("role", "data");
    if (role == "primary-key")
      c.role = ColumnRole::PrimaryKey;
    else if (role == "foreign-key")
      c.role = ColumnRole::ForeignKey;
    else if (role == "data")
      c.role = ColumnRole::Data;
    else
      fail(Errc::Parse, "unknown column role " + role);
    cols.push_back(std::move(c));
  }
  return Schema(j.value("name", std::string("relation")), std::move(cols));
}

inline nlohmann::json schemaToJson(const Schema& s) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : s.columns())
    cols.push_back({{"name", c.name}, {"kind", kindName(c.kind)}, {"role", roleName(c.role)}});
  return {{"name", s.name()}, {"columns", cols}};
}

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline nlohmann::json readJson(const std::string& path) {
  try {
    return nlohmann::json::parse(readFile(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::Parse, path + ": " + e.what());
  }
}

inline Schema loadSchema(const std::string& path) { return parseSchemaJson(readJson(path)); }

//------------------------------------------------------------- load / write

inline Relation loadRelation(const std::string& csvPath, const Schema& schema) {
  std::ifstream in(csvPath, std::ios::binary);
  if (!in) fail(Errc::Io, "cannot open " + csvPath);
  std::ostringstream buf;
  buf << in.rdbuf();
  auto records = parseCsv(buf.str());
  if (records.empty()) fail(Errc::Parse, csvPath + ": missing header row");

  const auto& header = records[0];
  if (static_cast<int>(header.size()) != schema.size())
    fail(Errc::Parse, csvPath + ": header width does not match schema");
  for (int c = 0; c < schema.size(); ++c)
    if (header[c] != schema.columns()[c].name)
      fail(Errc::Parse, csvPath + ": header column " + header[c] + " does not match schema column " +
                            schema.columns()[c].name);

  Relation rel(schema);
  for (size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (static_cast<int>(rec.size()) != schema.size())
      fail(Errc::Parse, csvPath + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                            " fields");
    std::vector<Value> cells(schema.size());
    for (int c = 0; c < schema.size(); ++c) {
      const std::string& f = rec[c];
      if (f.empty()) {
        cells[c] = Value::null();
        continue;
      }
      if (schema.columns()[c].kind == ColumnKind::Integer) {
        int64_t v = 0;
        auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size())
          fail(Errc::Parse, csvPath + ": bad integer '" + f + "' in column " + schema.columns()[c].name);
        cells[c] = Value::ofInt(v);
      } else {
        cells[c] = Value::ofStr(f);
      }
    }
    rel.append(std::move(cells));
  }
  if (rel.fkState() == Relation::FkState::Mixed)
    fail(Errc::Parse, csvPath + ": FK column is partially filled");
  return rel;
}

// Convenience: schema from the sidecar next to the CSV.
inline Relation loadRelation(const std::string& csvPath) {
  return loadRelation(csvPath, loadSchema(schemaSidecarPath(csvPath)));
}

inline std::string relationToCsv(const Relation& rel) {
  std::string out;
  const Schema& s = rel.schema();
  for (int c = 0; c < s.size(); ++c) {
    if (c) out += ',';
    out += csvQuote(s.columns()[c].name);
  }
  out += '\n';
  for (const auto& row : rel.rows()) {
    for (int c = 0; c < s.size(); ++c) {
      if (c) out += ',';
      out += csvQuote(row[c].toText());
    }
    out += '\n';
  }
  return out;
}

inline void writeFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::Io, "cannot write " + path);
  out << content;
  if (!out) fail(Errc::Io, "short write to " + path);
}

// Writes the CSV and its schema sidecar.
inline void writeRelation(const Relation& rel, const std::string& csvPath) {
  writeFile(csvPath, relationToCsv(rel));
  writeFile(schemaSidecarPath(csvPath), schemaToJson(rel.schema()).dump(2) + "\n");
}

}  // namespace linksynth

#endif
