#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paramshap/value.hpp"

namespace paramshap {

struct Column {
  std::string name;
  ValueKind kind;

  bool operator==(const Column& o) const { return name == o.name && kind == o.kind; }
};

struct RelationSchema {
  std::string name;
  std::vector<Column> columns;

  RelationSchema() = default;
  RelationSchema(std::string name, std::vector<Column> columns);

  size_t arity() const { return columns.size(); }
  /// Column index by attribute name; nullopt when absent.
  std::optional<size_t> column_index(const std::string& attr) const;

  bool operator==(const RelationSchema& o) const { return name == o.name && columns == o.columns; }
};

/// Set-semantics relation: duplicates collapse on insert, every tuple
/// type-checks against the schema (rational columns accept integer values).
class Relation {
 public:
  using TupleSet = std::set<Tuple, TupleStorageLess>;

  Relation() = default;
  explicit Relation(RelationSchema schema) : schema_(std::move(schema)) {}

  const RelationSchema& schema() const { return schema_; }
  const TupleSet& tuples() const { return tuples_; }
  size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  bool contains(const Tuple& t) const { return tuples_.count(t) > 0; }

  /// Inserts with type checking; returns false when the tuple was already
  /// present.
  bool insert(Tuple t);

  bool operator==(const Relation& o) const { return schema_ == o.schema_ && tuples_ == o.tuples_; }

 private:
  RelationSchema schema_;
  TupleSet tuples_;
};

class Database {
 public:
  void add_relation(Relation r);
  bool has_relation(const std::string& name) const { return relations_.count(name) > 0; }
  const Relation& relation(const std::string& name) const;
  const std::map<std::string, Relation>& relations() const { return relations_; }

 private:
  std::map<std::string, Relation> relations_;
};

/// All values appearing in any tuple; restricted to one relation column when
/// a restriction is given.
std::set<Value, ValueStorageLess> active_domain(
    const Database& db,
    const std::optional<std::pair<std::string, size_t>>& restriction = std::nullopt);

}  // namespace paramshap
