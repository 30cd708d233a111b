#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "paramshap/distribution.hpp"
#include "paramshap/query.hpp"
#include "paramshap/rational.hpp"
#include "paramshap/relation.hpp"

namespace paramshap {

inline constexpr uint64_t kDefaultRowBudget = 1'000'000;
inline constexpr unsigned kDefaultFilterArity = 4;

/// Answers a ground query under set semantics. Filter-free queries whose
/// variable structure reduces acyclically go through semijoin reduction and
/// bottom-up joins; everything else through generic backtracking join with
/// filter pushdown. Result rows beyond the budget raise BudgetError.
Relation evaluate(const GroundQuery& q, const Database& db,
                  uint64_t budget_rows = kDefaultRowBudget);

/// The generic backtracking path, exposed as a cross-check oracle.
Relation evaluate_generic(const GroundQuery& q, const Database& db,
                          uint64_t budget_rows = kDefaultRowBudget);

/// Variable weight tables: absent table ⇒ weight 1 for every value; present
/// table ⇒ listed weight, 0 (prune) for missing values.
using WeightTable = std::map<Value, Rational, ValueStorageLess>;

struct WeightedCountInstance {
  GroundQuery query;  // full, filter-free, acyclic
  const Database* db = nullptr;
  std::map<std::string, WeightTable> weights;
};

/// Σ over answers a of Π over variables x of weight_x(a_x), by a bottom-up
/// join-tree dynamic program; each variable's weight is applied exactly once
/// at its highest node. Throws ValidationError when the query is cyclic.
Rational weighted_count(const WeightedCountInstance& inst);

/// E_{p~Γ}[|Q_p(D)|] for a full, filter-free query whose atom structure over
/// variables and parameters is acyclic: parameters become weighted variables
/// with their marginals as weight tables. Γ must be factorized.
Rational expected_count(const ParamQuery& q, const Database& db, const Distribution& g);

/// |Q_p(D)| summed with unit weights via the same dynamic program (p-acyclic
/// full queries; avoids materializing the answer set).
Rational answer_count(const GroundQuery& q, const Database& db);

struct MaterializedFilterDb {
  ParamQuery query;  // filters replaced by membership atoms
  Database db;       // input relations plus one relation per filter
};

/// Replaces each filter by a relation holding exactly the passing
/// combinations of numeric active-domain values (its variables) and marginal
/// support values (its parameters, gate first). Filters wider than max_arity
/// raise ValidationError naming the filter and the projected row count.
MaterializedFilterDb materialize_filters(const ParamQuery& q, const Database& db,
                                         const Distribution& g,
                                         unsigned max_arity = kDefaultFilterArity);

/// Distinct numeric values anywhere in the database.
std::set<Value, ValueStorageLess> numeric_active_domain(const Database& db);

/// Whether an ungated, parameter-free filter holds under the binding; a
/// non-numeric binding of an expression variable makes it fail, never error.
bool filter_holds(const Filter& f, const std::map<std::string, Value>& binding);

}  // namespace paramshap
