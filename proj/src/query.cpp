#include "paramshap/query.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "paramshap/errors.hpp"

namespace paramshap {

Term Term::variable(std::string n) {
  Term t;
  t.kind = Kind::Variable;
  t.name = std::move(n);
  return t;
}

Term Term::parameter(std::string n, int index) {
  Term t;
  t.kind = Kind::Parameter;
  t.name = std::move(n);
  t.param_index = index;
  return t;
}

Term Term::constant_of(Value v) {
  Term t;
  t.kind = Kind::Constant;
  t.constant = std::move(v);
  return t;
}

bool Term::operator==(const Term& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Variable:
      return name == o.name;
    case Kind::Parameter:
      return name == o.name && param_index == o.param_index;
    case Kind::Constant:
      return constant == o.constant && constant.kind() == o.constant.kind();
  }
  return false;
}

std::string cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

bool cmp_holds(CmpOp op, const Rational& lhs, const Rational& rhs) {
  switch (op) {
    case CmpOp::Lt: return lhs < rhs;
    case CmpOp::Le: return lhs <= rhs;
    case CmpOp::Eq: return lhs == rhs;
    case CmpOp::Ne: return lhs != rhs;
    case CmpOp::Ge: return lhs >= rhs;
    case CmpOp::Gt: return lhs > rhs;
  }
  return false;
}

namespace {

void collect_names(const LinearExpr& e, Term::Kind which, std::vector<std::string>& out) {
  for (const auto& entry : e.entries) {
    if (entry.ref.kind != which) continue;
    if (std::find(out.begin(), out.end(), entry.ref.name) == out.end()) {
      out.push_back(entry.ref.name);
    }
  }
}

}  // namespace

std::vector<std::string> Filter::variables() const {
  std::vector<std::string> out;
  collect_names(lhs, Term::Kind::Variable, out);
  collect_names(rhs, Term::Kind::Variable, out);
  return out;
}

std::vector<std::string> Filter::parameters() const {
  std::vector<std::string> out;
  if (gate) out.push_back(gate->name);
  collect_names(lhs, Term::Kind::Parameter, out);
  collect_names(rhs, Term::Kind::Parameter, out);
  return out;
}

int ParamQuery::param_index(const std::string& pname) const {
  for (size_t i = 0; i < parameters.size(); ++i) {
    if (parameters[i] == pname) return static_cast<int>(i + 1);
  }
  return 0;
}

std::vector<std::string> ParamQuery::atom_variables() const {
  std::vector<std::string> out;
  for (const auto& atom : atoms) {
    for (const auto& term : atom.terms) {
      if (term.kind != Term::Kind::Variable) continue;
      if (std::find(out.begin(), out.end(), term.name) == out.end()) out.push_back(term.name);
    }
  }
  return out;
}

bool ParamQuery::param_occurs(int index) const {
  for (const auto& atom : atoms) {
    for (const auto& term : atom.terms) {
      if (term.kind == Term::Kind::Parameter && term.param_index == index) return true;
    }
  }
  for (const auto& f : filters) {
    for (const auto& pname : f.parameters()) {
      if (param_index(pname) == index) return true;
    }
  }
  return false;
}

std::vector<std::string> ParamQuery::null_parameters() const {
  std::vector<std::string> out;
  for (size_t i = 0; i < parameters.size(); ++i) {
    if (!param_occurs(static_cast<int>(i + 1))) out.push_back(parameters[i]);
  }
  return out;
}

void ParamQuery::validate() const {
  std::set<std::string> param_set;
  for (const auto& pname : parameters) {
    if (!param_set.insert(pname).second) {
      throw ValidationError("query '" + name + "': duplicate parameter name '" + pname + "'");
    }
  }
  std::set<std::string> head_vars;
  for (const auto& v : free_vars) {
    if (!head_vars.insert(v).second) {
      throw ValidationError("query '" + name + "': duplicate free variable '" + v + "'");
    }
  }
  for (const auto& v : bound_vars) {
    if (!head_vars.insert(v).second) {
      throw ValidationError("query '" + name + "': variable '" + v +
                            "' listed as both free and bound (or twice)");
    }
  }
  for (const auto& v : head_vars) {
    if (param_set.count(v)) {
      throw ValidationError("query '" + name + "': name '" + v +
                            "' used for both a variable and a parameter");
    }
  }
  std::set<std::string> body_vars;
  for (const auto& atom : atoms) {
    for (const auto& term : atom.terms) {
      switch (term.kind) {
        case Term::Kind::Variable:
          body_vars.insert(term.name);
          if (param_set.count(term.name)) {
            throw ValidationError("query '" + name + "': name '" + term.name +
                                  "' used for both a variable and a parameter");
          }
          break;
        case Term::Kind::Parameter: {
          int idx = param_index(term.name);
          if (idx == 0) {
            throw ValidationError("query '" + name + "': atom over '" + atom.relation +
                                  "' mentions undeclared parameter '$" + term.name + "'");
          }
          if (idx != term.param_index) {
            throw InternalError("query '" + name + "': parameter '" + term.name +
                                "' carries index " + std::to_string(term.param_index) +
                                " but is declared at position " + std::to_string(idx));
          }
          break;
        }
        case Term::Kind::Constant:
          break;
      }
    }
  }
  for (const auto& v : body_vars) {
    if (!head_vars.count(v)) {
      throw ValidationError("query '" + name + "': variable '" + v +
                            "' occurs in an atom but is neither free nor bound");
    }
  }
  for (const auto& v : head_vars) {
    if (!body_vars.count(v)) {
      throw ValidationError("query '" + name + "': variable '" + v +
                            "' is declared but occurs in no atom");
    }
  }
  for (const auto& f : filters) {
    for (const auto& v : f.variables()) {
      if (!body_vars.count(v)) {
        throw ValidationError("query '" + name + "': filter " + to_text(f) +
                              " uses variable '" + v + "' that occurs in no atom");
      }
    }
    for (const auto& pname : f.parameters()) {
      if (param_index(pname) == 0) {
        throw ValidationError("query '" + name + "': filter " + to_text(f) +
                              " mentions undeclared parameter '$" + pname + "'");
      }
    }
    if (f.gate && f.gate->kind != Term::Kind::Parameter) {
      throw ValidationError("query '" + name + "': filter gate must be a parameter");
    }
  }
}

bool ParamQuery::operator==(const ParamQuery& o) const {
  return name == o.name && free_vars == o.free_vars && bound_vars == o.bound_vars &&
         parameters == o.parameters && atoms == o.atoms && filters == o.filters;
}

namespace {

const Value& param_value(const ParamQuery& q, const Tuple& p, const Term& t) {
  if (t.param_index < 1 || static_cast<size_t>(t.param_index) > p.size()) {
    throw InternalError("parameter '" + t.name + "' has index " +
                        std::to_string(t.param_index) + " outside the assignment of size " +
                        std::to_string(p.size()) + " for query '" + q.name + "'");
  }
  return p[static_cast<size_t>(t.param_index - 1)];
}

/// Folds parameter entries of e into the constant; variables survive.
LinearExpr substitute_params(const ParamQuery& q, const LinearExpr& e, const Tuple& p) {
  LinearExpr out;
  out.constant = e.constant;
  for (const auto& entry : e.entries) {
    if (entry.ref.kind == Term::Kind::Parameter) {
      const Value& v = param_value(q, p, entry.ref);
      if (!v.is_numeric()) {
        throw ValidationError("query '" + q.name + "': parameter '$" + entry.ref.name +
                              "' is used in a filter but was assigned non-numeric value " +
                              v.to_string());
      }
      out.constant += entry.coeff * v.as_rational();
    } else {
      out.entries.push_back(entry);
    }
  }
  return out;
}

}  // namespace

GroundQuery ground(const ParamQuery& q, const Tuple& p) {
  if (p.size() != q.parameters.size()) {
    throw ValidationError("query '" + q.name + "' has " + std::to_string(q.parameters.size()) +
                          " parameters but the assignment has " + std::to_string(p.size()) +
                          " values");
  }
  GroundQuery g;
  g.name = q.name;
  g.free_vars = q.free_vars;
  g.bound_vars = q.bound_vars;
  for (const auto& atom : q.atoms) {
    Atom ga;
    ga.relation = atom.relation;
    for (const auto& term : atom.terms) {
      if (term.kind == Term::Kind::Parameter) {
        ga.terms.push_back(Term::constant_of(param_value(q, p, term)));
      } else {
        ga.terms.push_back(term);
      }
    }
    g.atoms.push_back(std::move(ga));
  }
  for (const auto& f : q.filters) {
    if (f.gate) {
      const Value& gv = param_value(q, p, *f.gate);
      bool on;
      if (gv.kind() == ValueKind::Boolean) {
        on = gv.as_boolean();
      } else if (gv.is_numeric() && gv.as_rational() == Rational(0)) {
        on = false;
      } else if (gv.is_numeric() && gv.as_rational() == Rational(1)) {
        on = true;
      } else {
        throw ValidationError("query '" + q.name + "': gate parameter '$" + f.gate->name +
                              "' must be 0 or 1, got " + gv.to_string());
      }
      if (!on) continue;  // gate off: the filter is vacuously satisfied
    }
    Filter gf;
    gf.op = f.op;
    gf.lhs = substitute_params(q, f.lhs, p);
    gf.rhs = substitute_params(q, f.rhs, p);
    if (gf.lhs.entries.empty() && gf.rhs.entries.empty()) {
      if (cmp_holds(gf.op, gf.lhs.constant, gf.rhs.constant)) continue;  // trivially true
      g.filters.push_back(std::move(gf));  // trivially false: empties the result
    } else {
      g.filters.push_back(std::move(gf));
    }
  }
  return g;
}

namespace {

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string term_text(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Variable:
      return t.name;
    case Term::Kind::Parameter:
      return "$" + t.name;
    case Term::Kind::Constant:
      if (t.constant.kind() == ValueKind::String) return quote_string(t.constant.as_string());
      return t.constant.to_string();
  }
  return "?";
}

std::string expr_text(const LinearExpr& e) {
  std::ostringstream out;
  bool first = true;
  auto emit_sign = [&](int sign) {
    if (first) {
      if (sign < 0) out << "-";
      first = false;
    } else {
      out << (sign < 0 ? " - " : " + ");
    }
  };
  for (const auto& entry : e.entries) {
    emit_sign(entry.coeff.sign());
    Rational a = entry.coeff.abs();
    if (a != Rational(1)) out << a.to_string() << "*";
    out << term_text(entry.ref);
  }
  if (!(e.constant == Rational(0)) || first) {
    emit_sign(e.constant.sign());
    out << e.constant.abs().to_string();
  }
  return out.str();
}

}  // namespace

std::string to_text(const Filter& f) {
  std::string out = "[";
  if (f.gate) out += term_text(*f.gate) + " => ";
  out += expr_text(f.lhs) + " " + cmp_op_text(f.op) + " " + expr_text(f.rhs) + "]";
  return out;
}

std::string to_text(const ParamQuery& q) {
  std::ostringstream out;
  out << q.name << "(";
  for (size_t i = 0; i < q.free_vars.size(); ++i) {
    if (i) out << ", ";
    out << q.free_vars[i];
  }
  if (!q.parameters.empty()) {
    out << "; ";
    for (size_t i = 0; i < q.parameters.size(); ++i) {
      if (i) out << ", ";
      out << "$" << q.parameters[i];
    }
  }
  out << ") :- ";
  bool first = true;
  for (const auto& atom : q.atoms) {
    if (!first) out << ", ";
    first = false;
    out << atom.relation << "(";
    for (size_t i = 0; i < atom.terms.size(); ++i) {
      if (i) out << ", ";
      out << term_text(atom.terms[i]);
    }
    out << ")";
  }
  for (const auto& f : q.filters) {
    if (!first) out << ", ";
    first = false;
    out << to_text(f);
  }
  return out.str();
}

namespace {

bool kinds_joinable(ValueKind a, ValueKind b) {
  if (a == b) return true;
  auto numeric = [](ValueKind k) { return k == ValueKind::Integer || k == ValueKind::Rational; };
  return numeric(a) && numeric(b);
}

}  // namespace

void validate_against(const ParamQuery& q, const Database& db) {
  q.validate();
  std::map<std::string, ValueKind> var_kind;
  for (const auto& atom : q.atoms) {
    const Relation& rel = db.relation(atom.relation);
    const RelationSchema& rs = rel.schema();
    if (atom.terms.size() != rs.arity()) {
      throw ValidationError("query '" + q.name + "': atom over '" + atom.relation + "' has " +
                            std::to_string(atom.terms.size()) + " terms but the relation has " +
                            std::to_string(rs.arity()) + " columns");
    }
    for (size_t i = 0; i < atom.terms.size(); ++i) {
      const Term& t = atom.terms[i];
      ValueKind ck = rs.columns[i].kind;
      if (t.kind == Term::Kind::Constant) {
        ValueKind vk = t.constant.kind();
        if (!kinds_joinable(vk, ck)) {
          throw ValidationError("query '" + q.name + "': constant " + t.constant.to_string() +
                                " in atom over '" + atom.relation + "' does not fit " +
                                kind_name(ck) + " column '" + rs.columns[i].name + "'");
        }
      } else if (t.kind == Term::Kind::Variable) {
        auto [it, fresh] = var_kind.emplace(t.name, ck);
        if (!fresh && !kinds_joinable(it->second, ck)) {
          throw ValidationError("query '" + q.name + "': variable '" + t.name +
                                "' is used at both " + kind_name(it->second) + " and " +
                                kind_name(ck) + " columns");
        }
      }
    }
  }
  for (const auto& f : q.filters) {
    for (const auto& v : f.variables()) {
      auto it = var_kind.find(v);
      if (it != var_kind.end() && it->second != ValueKind::Integer &&
          it->second != ValueKind::Rational) {
        throw ValidationError("query '" + q.name + "': filter " + to_text(f) +
                              " uses variable '" + v + "' bound to a " + kind_name(it->second) +
                              " column");
      }
    }
  }
}

std::optional<ValueKind> param_atom_kind(const ParamQuery& q, const Database& db,
                                         const std::string& pname) {
  for (const auto& atom : q.atoms) {
    const RelationSchema& rs = db.relation(atom.relation).schema();
    for (size_t i = 0; i < atom.terms.size() && i < rs.arity(); ++i) {
      if (atom.terms[i].kind == Term::Kind::Parameter && atom.terms[i].name == pname) {
        return rs.columns[i].kind;
      }
    }
  }
  return std::nullopt;
}

RelationSchema output_schema(const ParamQuery& q, const Database& db) {
  std::vector<Column> cols;
  for (const auto& v : q.free_vars) {
    std::optional<ValueKind> kind;
    for (const auto& atom : q.atoms) {
      const RelationSchema& rs = db.relation(atom.relation).schema();
      for (size_t i = 0; i < atom.terms.size() && !kind; ++i) {
        if (atom.terms[i].kind == Term::Kind::Variable && atom.terms[i].name == v) {
          kind = rs.columns[i].kind;
        }
      }
      if (kind) break;
    }
    if (!kind) {
      throw ValidationError("query '" + q.name + "': free variable '" + v +
                            "' occurs in no atom");
    }
    cols.push_back(Column{v, *kind});
  }
  return RelationSchema(q.name, std::move(cols));
}

}  // namespace paramshap
