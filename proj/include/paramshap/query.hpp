#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paramshap/relation.hpp"
#include "paramshap/value.hpp"

namespace paramshap {

/// A position in an atom: variable, parameter (1-based index into the query's
/// parameter list), or constant.
struct Term {
  enum class Kind { Variable, Parameter, Constant };

  Kind kind = Kind::Variable;
  std::string name;     // variable or parameter name
  int param_index = 0;  // 1-based, parameters only
  Value constant;       // constants only

  static Term variable(std::string n);
  static Term parameter(std::string n, int index);
  static Term constant_of(Value v);

  bool operator==(const Term& o) const;
};

struct Atom {
  std::string relation;
  std::vector<Term> terms;

  bool operator==(const Atom& o) const { return relation == o.relation && terms == o.terms; }
};

/// Rational-coefficient sum of variables and parameters plus a constant.
struct LinearExpr {
  struct Entry {
    Rational coeff;
    Term ref;  // Variable or Parameter term
    bool operator==(const Entry& o) const { return coeff == o.coeff && ref == o.ref; }
  };
  std::vector<Entry> entries;
  Rational constant = 0;

  bool operator==(const LinearExpr& o) const {
    return entries == o.entries && constant == o.constant;
  }
};

enum class CmpOp { Lt, Le, Eq, Ne, Ge, Gt };

std::string cmp_op_text(CmpOp op);
bool cmp_holds(CmpOp op, const Rational& lhs, const Rational& rhs);

/// A comparison of two linear expressions over guarded variables and
/// parameters. A gated filter carries one extra boolean-valued parameter g
/// and reads: g = 0, or the comparison holds.
struct Filter {
  LinearExpr lhs, rhs;
  CmpOp op = CmpOp::Lt;
  std::optional<Term> gate;  // Parameter term

  /// Distinct variable names, in order of first occurrence.
  std::vector<std::string> variables() const;
  /// Distinct parameter names (gate included), in order of first occurrence.
  std::vector<std::string> parameters() const;
  /// Distinct variables plus distinct parameters.
  size_t arity() const { return variables().size() + parameters().size(); }

  bool operator==(const Filter& o) const {
    return lhs == o.lhs && rhs == o.rhs && op == o.op && gate == o.gate;
  }
};

/// Parameterized conjunctive query with optional filters.
///
/// Invariants (validate()): free and bound variables partition the variables
/// of the atoms; parameter names are distinct and disjoint from variable
/// names; every filter variable occurs in some atom; parameter indices in
/// terms agree with their position in `parameters`.
struct ParamQuery {
  std::string name = "Q";
  std::vector<std::string> free_vars;
  std::vector<std::string> bound_vars;
  std::vector<std::string> parameters;
  std::vector<Atom> atoms;
  std::vector<Filter> filters;

  size_t num_params() const { return parameters.size(); }
  bool is_full() const { return bound_vars.empty(); }
  bool is_boolean() const { return free_vars.empty(); }

  /// 1-based index of a parameter name; 0 when absent.
  int param_index(const std::string& pname) const;

  /// All variable names appearing in atoms, in first-occurrence order.
  std::vector<std::string> atom_variables() const;

  /// Parameter names that occur in no atom and no filter (null players).
  std::vector<std::string> null_parameters() const;

  /// True when parameter `index` occurs in some atom or filter.
  bool param_occurs(int index) const;

  void validate() const;

  bool operator==(const ParamQuery& o) const;
};

/// A ParamQuery with an empty parameter list.
using GroundQuery = ParamQuery;

/// Substitutes parameters by the constants of p. Filter occurrences fold into
/// the linear expressions' constants; gated filters resolve their gate (0
/// drops the filter, 1 keeps the ungated comparison). Fully constant filters
/// that hold are dropped; failing ones are kept for evaluation to see.
GroundQuery ground(const ParamQuery& q, const Tuple& p);

/// Concrete-syntax rendering; parses back to a structurally equal query.
std::string to_text(const ParamQuery& q);

std::string to_text(const Filter& f);

/// Output schema of a query: one column per free variable, kinds taken from
/// the variables' atom positions in db.
RelationSchema output_schema(const ParamQuery& q, const Database& db);

/// Structural checks against a concrete database: relations exist, atom
/// arities match, constants conform to their column kinds, each variable is
/// used at numerically-compatible kinds only, and filter variables sit in
/// numeric columns. Throws ValidationError.
void validate_against(const ParamQuery& q, const Database& db);

/// Kind of the column where a parameter occurs in atoms (first occurrence);
/// nullopt for filter-only or absent parameters.
std::optional<ValueKind> param_atom_kind(const ParamQuery& q, const Database& db,
                                         const std::string& pname);

}  // namespace paramshap
