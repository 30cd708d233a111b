#pragma once

#include <string>
#include <vector>

#include "paramshap/relation.hpp"

namespace paramshap {

/// Reads a schema descriptor (JSON: {"relations":[{"name":...,"columns":
/// [{"name":...,"kind":...},...]},...]}).
std::vector<RelationSchema> load_schema(const std::string& path);

void write_schema(const std::vector<RelationSchema>& schemas, const std::string& path);

/// Loads one CSV per relation (`<name>.csv` inside data_dir). The header row
/// is required and must match the schema's column names; cells are parsed by
/// the declared column kind; duplicate rows collapse.
Database load_database(const std::string& schema_path, const std::string& data_dir);

Database load_database(const std::vector<RelationSchema>& schemas, const std::string& data_dir);

/// Writes one `<name>.csv` per relation into data_dir (creating it).
void write_database(const Database& db, const std::string& data_dir);

/// RFC-4180 field splitting of one CSV document; exposed for tests.
std::vector<std::vector<std::string>> parse_csv(const std::string& content);

std::string csv_escape(const std::string& field);

}  // namespace paramshap
