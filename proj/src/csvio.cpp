#include "paramshap/csvio.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "paramshap/errors.hpp"

namespace paramshap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<RelationSchema> load_schema(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("schema descriptor " + path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("relations") || !doc["relations"].is_array())
    throw ValidationError("schema descriptor " + path + ": expected {\"relations\": [...]}");
  std::vector<RelationSchema> out;
  for (const json& rel : doc["relations"]) {
    if (!rel.contains("name") || !rel["name"].is_string() || !rel.contains("columns") ||
        !rel["columns"].is_array())
      throw ValidationError("schema descriptor " + path +
                            ": each relation needs \"name\" and \"columns\"");
    std::string name = rel["name"].get<std::string>();
    std::vector<Column> cols;
    for (const json& col : rel["columns"]) {
      if (!col.contains("name") || !col["name"].is_string() || !col.contains("kind") ||
          !col["kind"].is_string())
        throw ValidationError("schema descriptor " + path + ": relation " + name +
                              ": each column needs \"name\" and \"kind\"");
      auto kind = kind_from_name(col["kind"].get<std::string>());
      if (!kind)
        throw ValidationError("schema descriptor " + path + ": relation " + name +
                              ": unknown kind '" + col["kind"].get<std::string>() + "'");
      cols.push_back({col["name"].get<std::string>(), *kind});
    }
    out.emplace_back(std::move(name), std::move(cols));
  }
  return out;
}

void write_schema(const std::vector<RelationSchema>& schemas, const std::string& path) {
  json rels = json::array();
  for (const RelationSchema& s : schemas) {
    json cols = json::array();
    for (const Column& c : s.columns) cols.push_back({{"name", c.name}, {"kind", kind_name(c.kind)}});
    rels.push_back({{"name", s.name}, {"columns", cols}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << json{{"relations", rels}}.dump(2) << "\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false, field_started = false, row_started = false;
  size_t i = 0, n = content.size();
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    row_started = false;
  };
  while (i < n) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && content[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty())
          throw ValidationError("CSV: quote inside unquoted field");
        in_quotes = true;
        field_started = row_started = true;
        ++i;
        break;
      case ',':
        end_field();
        row_started = true;
        ++i;
        break;
      case '\r':
        if (i + 1 < n && content[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        ++i;
        break;
      default:
        field += c;
        field_started = row_started = true;
        ++i;
    }
  }
  if (in_quotes) throw ValidationError("CSV: unterminated quoted field");
  if (row_started || field_started || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Database load_database(const std::vector<RelationSchema>& schemas, const std::string& data_dir) {
  Database db;
  for (const RelationSchema& schema : schemas) {
    fs::path file = fs::path(data_dir) / (schema.name + ".csv");
    if (!fs::exists(file))
      throw ValidationError("relation " + schema.name + ": missing data file " + file.string());
    auto rows = parse_csv(read_file(file.string()));
    if (rows.empty())
      throw ValidationError("relation " + schema.name + ": missing CSV header row");
    const auto& header = rows[0];
    if (header.size() != schema.arity())
      throw ValidationError("relation " + schema.name + ": header has " +
                            std::to_string(header.size()) + " columns, schema declares " +
                            std::to_string(schema.arity()));
    for (size_t c = 0; c < header.size(); ++c)
      if (header[c] != schema.columns[c].name)
        throw ValidationError("relation " + schema.name + ": header column " +
                              std::to_string(c + 1) + " is '" + header[c] + "', schema declares '" +
                              schema.columns[c].name + "'");
    Relation rel(schema);
    for (size_t r = 1; r < rows.size(); ++r) {
      const auto& cells = rows[r];
      if (cells.size() != schema.arity())
        throw ValidationError("relation " + schema.name + ", row " + std::to_string(r) + ": has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(schema.arity()));
      Tuple t;
      t.reserve(cells.size());
      for (size_t c = 0; c < cells.size(); ++c) {
        try {
          t.push_back(Value::parse_cell(cells[c], schema.columns[c].kind));
        } catch (const ValidationError& e) {
          throw ValidationError("relation " + schema.name + ", row " + std::to_string(r) +
                                ", column " + schema.columns[c].name + ": " + e.what());
        }
      }
      rel.insert(std::move(t));
    }
    db.add_relation(std::move(rel));
  }
  return db;
}

Database load_database(const std::string& schema_path, const std::string& data_dir) {
  return load_database(load_schema(schema_path), data_dir);
}

void write_database(const Database& db, const std::string& data_dir) {
  fs::create_directories(data_dir);
  for (const auto& [name, rel] : db.relations()) {
    std::ofstream out(fs::path(data_dir) / (name + ".csv"), std::ios::binary);
    if (!out) throw ValidationError("cannot write data file for relation " + name);
    const auto& cols = rel.schema().columns;
    for (size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << csv_escape(cols[c].name);
    out << "\n";
    for (const Tuple& t : rel.tuples()) {
      for (size_t c = 0; c < t.size(); ++c) out << (c ? "," : "") << csv_escape(t[c].to_string());
      out << "\n";
    }
  }
}

}  // namespace paramshap
