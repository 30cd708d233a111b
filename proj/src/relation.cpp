#include "paramshap/relation.hpp"

#include <set>

#include "paramshap/errors.hpp"

namespace paramshap {

RelationSchema::RelationSchema(std::string name, std::vector<Column> columns)
    : name(std::move(name)), columns(std::move(columns)) {
  std::set<std::string> seen;
  for (const Column& c : this->columns)
    if (!seen.insert(c.name).second)
      throw ValidationError("relation " + this->name + ": duplicate column name '" + c.name + "'");
}

std::optional<size_t> RelationSchema::column_index(const std::string& attr) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == attr) return i;
  return std::nullopt;
}

namespace {

bool conforms(const Value& v, ValueKind kind) {
  if (v.kind() == kind) return true;
  // Rational columns accept integer values; they are the same comparison class.
  return kind == ValueKind::Rational && v.kind() == ValueKind::Integer;
}

}  // namespace

bool Relation::insert(Tuple t) {
  if (t.size() != schema_.arity())
    throw ValidationError("relation " + schema_.name + ": tuple arity " + std::to_string(t.size()) +
                          " does not match schema arity " + std::to_string(schema_.arity()));
  for (size_t i = 0; i < t.size(); ++i)
    if (!conforms(t[i], schema_.columns[i].kind))
      throw ValidationError("relation " + schema_.name + ", column " + schema_.columns[i].name +
                            ": value " + t[i].to_string() + " is not " +
                            kind_name(schema_.columns[i].kind));
  return tuples_.insert(std::move(t)).second;
}

void Database::add_relation(Relation r) {
  std::string name = r.schema().name;
  if (!relations_.emplace(name, std::move(r)).second)
    throw ValidationError("duplicate relation name '" + name + "'");
}

const Relation& Database::relation(const std::string& name) const {
  auto it = relations_.find(name);
  if (it == relations_.end()) throw ValidationError("unknown relation '" + name + "'");
  return it->second;
}

std::set<Value, ValueStorageLess> active_domain(
    const Database& db, const std::optional<std::pair<std::string, size_t>>& restriction) {
  std::set<Value, ValueStorageLess> out;
  if (restriction) {
    const Relation& r = db.relation(restriction->first);
    size_t col = restriction->second;
    if (col >= r.schema().arity())
      throw ValidationError("relation " + restriction->first + " has no column index " +
                            std::to_string(col));
    for (const Tuple& t : r.tuples()) out.insert(t[col]);
    return out;
  }
  for (const auto& [name, rel] : db.relations())
    for (const Tuple& t : rel.tuples())
      for (const Value& v : t) out.insert(v);
  return out;
}

}  // namespace paramshap
