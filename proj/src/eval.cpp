#include "paramshap/eval.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "paramshap/errors.hpp"
#include "paramshap/hypergraph.hpp"

namespace paramshap {

namespace {

using Binding = std::map<std::string, Value>;

void require_ground(const GroundQuery& q) {
  for (const auto& atom : q.atoms) {
    for (const auto& t : atom.terms) {
      if (t.kind == Term::Kind::Parameter) {
        throw InternalError("evaluation reached a query that still has parameter '$" + t.name +
                            "' unsubstituted");
      }
    }
  }
  for (const auto& f : q.filters) {
    if (!f.parameters().empty()) {
      throw InternalError("evaluation reached a filter that still has parameters: " +
                          to_text(f));
    }
  }
}

Rational eval_expr(const LinearExpr& e, const Binding& binding, bool& numeric) {
  Rational out = e.constant;
  for (const auto& entry : e.entries) {
    auto it = binding.find(entry.ref.name);
    if (it == binding.end()) {
      throw InternalError("filter variable '" + entry.ref.name + "' is unbound");
    }
    if (!it->second.is_numeric()) {
      numeric = false;
      return Rational(0);
    }
    out += entry.coeff * it->second.as_rational();
  }
  return out;
}

/// A filter over a non-numeric binding is unsatisfied, never an error.
bool filter_satisfied(const Filter& f, const Binding& binding) {
  bool numeric = true;
  Rational lhs = eval_expr(f.lhs, binding, numeric);
  if (!numeric) return false;
  Rational rhs = eval_expr(f.rhs, binding, numeric);
  if (!numeric) return false;
  return cmp_holds(f.op, lhs, rhs);
}

/// Distinct variables of an atom in first-occurrence order.
std::vector<std::string> atom_vars(const Atom& a) {
  std::vector<std::string> out;
  for (const auto& t : a.terms) {
    if (t.kind != Term::Kind::Variable) continue;
    if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
  }
  return out;
}

/// Rows of the atom's relation that match its constants and repeated
/// variables, projected to atom_vars order. Distinct by construction.
std::vector<Tuple> select_project(const Atom& a, const Database& db) {
  const Relation& rel = db.relation(a.relation);
  std::vector<std::string> vars = atom_vars(a);
  std::vector<Tuple> out;
  for (const auto& row : rel.tuples()) {
    Binding local;
    bool ok = true;
    for (size_t i = 0; i < a.terms.size() && ok; ++i) {
      const Term& t = a.terms[i];
      if (t.kind == Term::Kind::Constant) {
        ok = row[i] == t.constant;
      } else {
        auto [it, fresh] = local.emplace(t.name, row[i]);
        if (!fresh) ok = it->second == row[i];
      }
    }
    if (!ok) continue;
    Tuple proj;
    proj.reserve(vars.size());
    for (const auto& v : vars) proj.push_back(local.at(v));
    out.push_back(std::move(proj));
  }
  return out;
}

std::vector<size_t> positions_of(const std::vector<std::string>& names,
                                 const std::vector<std::string>& subset) {
  std::vector<size_t> out;
  for (const auto& s : subset) {
    auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end()) throw InternalError("projection variable '" + s + "' missing");
    out.push_back(static_cast<size_t>(it - names.begin()));
  }
  return out;
}

Tuple project(const Tuple& row, const std::vector<size_t>& pos) {
  Tuple out;
  out.reserve(pos.size());
  for (size_t p : pos) out.push_back(row[p]);
  return out;
}

std::vector<std::string> intersect_names(const std::vector<std::string>& a,
                                         const std::vector<std::string>& b) {
  std::vector<std::string> out;
  for (const auto& x : a) {
    if (std::find(b.begin(), b.end(), x) != b.end()) out.push_back(x);
  }
  return out;
}

Relation finish_result(const GroundQuery& q, const Database& db,
                       const std::set<Tuple, TupleStorageLess>& rows) {
  Relation out(output_schema(q, db));
  for (const auto& r : rows) out.insert(r);
  return out;
}

Relation generic_join(const GroundQuery& q, const Database& db, uint64_t budget_rows) {
  // Filters with no variables are decided up front (grounding keeps only the
  // failing ones, but be robust to hand-built queries).
  for (const auto& f : q.filters) {
    if (f.variables().empty() && !filter_satisfied(f, {})) {
      return Relation(output_schema(q, db));
    }
  }
  // Filters become checkable once the atoms covering their variables are in.
  std::vector<std::vector<const Filter*>> checks(q.atoms.size() + 1);
  {
    std::set<std::string> bound;
    std::vector<bool> placed(q.filters.size(), false);
    auto place_ready = [&](size_t depth) {
      for (size_t fi = 0; fi < q.filters.size(); ++fi) {
        if (placed[fi]) continue;
        const auto vars = q.filters[fi].variables();
        bool ready = std::all_of(vars.begin(), vars.end(),
                                 [&](const std::string& v) { return bound.count(v) > 0; });
        if (ready) {
          checks[depth].push_back(&q.filters[fi]);
          placed[fi] = true;
        }
      }
    };
    place_ready(0);
    for (size_t ai = 0; ai < q.atoms.size(); ++ai) {
      for (const auto& v : atom_vars(q.atoms[ai])) bound.insert(v);
      place_ready(ai + 1);
    }
  }

  std::set<Tuple, TupleStorageLess> rows;
  Binding binding;
  bool done = false;
  std::function<void(size_t)> rec = [&](size_t depth) {
    if (done) return;
    for (const Filter* f : checks[depth]) {
      if (!filter_satisfied(*f, binding)) return;
    }
    if (depth == q.atoms.size()) {
      Tuple out;
      out.reserve(q.free_vars.size());
      for (const auto& v : q.free_vars) out.push_back(binding.at(v));
      if (rows.insert(std::move(out)).second && rows.size() > budget_rows) {
        throw BudgetError("query '" + q.name + "' produced more than " +
                          std::to_string(budget_rows) + " rows");
      }
      if (q.is_boolean()) done = true;  // a Boolean query needs one witness
      return;
    }
    const Atom& a = q.atoms[depth];
    const Relation& rel = db.relation(a.relation);
    for (const auto& row : rel.tuples()) {
      if (done) return;
      std::vector<std::string> newly;
      bool ok = true;
      for (size_t i = 0; i < a.terms.size() && ok; ++i) {
        const Term& t = a.terms[i];
        if (t.kind == Term::Kind::Constant) {
          ok = row[i] == t.constant;
          continue;
        }
        auto it = binding.find(t.name);
        if (it != binding.end()) {
          ok = it->second == row[i];
        } else {
          binding.emplace(t.name, row[i]);
          newly.push_back(t.name);
        }
      }
      if (ok) rec(depth + 1);
      for (const auto& v : newly) binding.erase(v);
    }
  };
  rec(0);
  return finish_result(q, db, rows);
}

/// Yannakakis: full semijoin reduction, then bottom-up joins keeping only
/// free variables and connectors.
Relation acyclic_join(const GroundQuery& q, const Database& db, const JoinTree& tree,
                      uint64_t budget_rows) {
  const size_t n = q.atoms.size();
  std::vector<std::vector<std::string>> vars(n);
  std::vector<std::set<Tuple, TupleStorageLess>> tables(n);
  for (size_t i = 0; i < n; ++i) {
    vars[i] = atom_vars(q.atoms[i]);
    for (auto& row : select_project(q.atoms[i], db)) tables[i].insert(std::move(row));
  }

  std::vector<int> by_depth;
  for (size_t i = 0; i < n; ++i) by_depth.push_back(static_cast<int>(i));
  std::stable_sort(by_depth.begin(), by_depth.end(),
                   [&](int a, int b) { return tree.depth[a] > tree.depth[b]; });

  auto semijoin = [&](int keep, int probe) {
    std::vector<std::string> conn = intersect_names(vars[keep], vars[probe]);
    auto kp = positions_of(vars[keep], conn);
    auto pp = positions_of(vars[probe], conn);
    std::set<Tuple, TupleStorageLess> keys;
    for (const auto& row : tables[probe]) keys.insert(project(row, pp));
    std::set<Tuple, TupleStorageLess> kept;
    for (const auto& row : tables[keep]) {
      if (keys.count(project(row, kp))) kept.insert(row);
    }
    tables[keep] = std::move(kept);
  };

  // Bottom-up: parents lose rows with no partner below.
  for (int u : by_depth) {
    if (tree.parent[u] >= 0) semijoin(tree.parent[u], u);
  }
  // Top-down: children lose rows with no partner above.
  for (auto it = by_depth.rbegin(); it != by_depth.rend(); ++it) {
    if (tree.parent[*it] >= 0) semijoin(*it, tree.parent[*it]);
  }

  // Bottom-up join, projecting to free variables plus own atom variables.
  std::vector<std::vector<std::string>> joined_vars(n);
  std::vector<std::vector<Tuple>> joined(n);
  std::function<void(int)> build = [&](int u) {
    std::vector<std::string> cur_vars = vars[u];
    std::vector<Tuple> cur(tables[u].begin(), tables[u].end());
    for (int c : tree.children[u]) {
      build(c);
      std::vector<std::string> conn = intersect_names(vars[c], vars[u]);
      auto child_conn = positions_of(joined_vars[c], conn);
      auto cur_conn = positions_of(cur_vars, conn);
      // Child columns to append: everything not already present.
      std::vector<std::string> extra;
      std::vector<size_t> extra_pos;
      for (size_t ci = 0; ci < joined_vars[c].size(); ++ci) {
        const std::string& name = joined_vars[c][ci];
        if (std::find(cur_vars.begin(), cur_vars.end(), name) == cur_vars.end()) {
          extra.push_back(name);
          extra_pos.push_back(ci);
        }
      }
      std::map<Tuple, std::vector<const Tuple*>, TupleStorageLess> index;
      for (const auto& row : joined[c]) index[project(row, child_conn)].push_back(&row);
      std::vector<Tuple> next;
      for (const auto& row : cur) {
        auto it = index.find(project(row, cur_conn));
        if (it == index.end()) continue;
        for (const Tuple* crow : it->second) {
          Tuple merged = row;
          for (size_t p : extra_pos) merged.push_back((*crow)[p]);
          next.push_back(std::move(merged));
          if (next.size() > budget_rows) {
            throw BudgetError("query '" + q.name + "' exceeded the row budget of " +
                              std::to_string(budget_rows) + " while joining");
          }
        }
      }
      cur_vars.insert(cur_vars.end(), extra.begin(), extra.end());
      cur = std::move(next);
      joined[c].clear();
    }
    // Keep free variables (needed at the top) and own variables (possible
    // connectors to the parent).
    std::vector<std::string> keep;
    for (const auto& v : cur_vars) {
      bool is_free = std::find(q.free_vars.begin(), q.free_vars.end(), v) != q.free_vars.end();
      bool is_own = std::find(vars[u].begin(), vars[u].end(), v) != vars[u].end();
      if (is_free || is_own) keep.push_back(v);
    }
    auto keep_pos = positions_of(cur_vars, keep);
    std::set<Tuple, TupleStorageLess> dedup;
    for (const auto& row : cur) dedup.insert(project(row, keep_pos));
    joined_vars[u] = std::move(keep);
    joined[u].assign(dedup.begin(), dedup.end());
  };
  build(tree.root);

  auto free_pos = positions_of(joined_vars[tree.root], q.free_vars);
  std::set<Tuple, TupleStorageLess> rows;
  for (const auto& row : joined[tree.root]) {
    rows.insert(project(row, free_pos));
    if (rows.size() > budget_rows) {
      throw BudgetError("query '" + q.name + "' produced more than " +
                        std::to_string(budget_rows) + " rows");
    }
  }
  return finish_result(q, db, rows);
}

}  // namespace

Relation evaluate_generic(const GroundQuery& q, const Database& db, uint64_t budget_rows) {
  require_ground(q);
  validate_against(q, db);
  return generic_join(q, db, budget_rows);
}

Relation evaluate(const GroundQuery& q, const Database& db, uint64_t budget_rows) {
  require_ground(q);
  validate_against(q, db);
  if (q.atoms.empty()) {
    // No atoms means no variables; the empty tuple is the one candidate row.
    Relation out{RelationSchema(q.name, {})};
    bool holds = std::all_of(q.filters.begin(), q.filters.end(),
                             [](const Filter& f) { return filter_satisfied(f, {}); });
    if (holds) out.insert(Tuple{});
    return out;
  }
  if (q.filters.empty()) {
    GyoResult gyo = gyo_reduce(query_hypergraph(q, false));
    if (gyo.acyclic) return acyclic_join(q, db, gyo.tree, budget_rows);
  }
  return generic_join(q, db, budget_rows);
}

Rational weighted_count(const WeightedCountInstance& inst) {
  const GroundQuery& q = inst.query;
  const Database& db = *inst.db;
  require_ground(q);
  if (!q.filters.empty()) {
    throw ValidationError("weighted counting requires a filter-free query; materialize "
                          "filters first");
  }
  if (!q.bound_vars.empty()) {
    throw ValidationError("weighted counting requires a full query; variable '" +
                          q.bound_vars.front() + "' is quantified");
  }
  validate_against(q, db);
  for (const auto& [var, table] : inst.weights) {
    (void)table;
    const auto all = q.atom_variables();
    if (std::find(all.begin(), all.end(), var) == all.end()) {
      throw ValidationError("weight table references '" + var +
                            "', which is not a variable of the query");
    }
  }
  if (q.atoms.empty()) return Rational(1);

  GyoResult gyo = gyo_reduce(query_hypergraph(q, false));
  if (!gyo.acyclic) {
    std::string labels;
    for (const auto& l : gyo.remaining) {
      if (!labels.empty()) labels += ", ";
      labels += l;
    }
    throw ValidationError("query '" + q.name + "' is cyclic; irreducible: " + labels);
  }
  const JoinTree& tree = gyo.tree;
  const size_t n = q.atoms.size();

  std::vector<std::vector<std::string>> vars(n);
  for (size_t i = 0; i < n; ++i) vars[i] = atom_vars(q.atoms[i]);

  // Each weighted variable charges at its shallowest containing node.
  std::map<std::string, int> charge_node;
  for (const auto& [var, table] : inst.weights) {
    (void)table;
    int best = -1;
    for (size_t i = 0; i < n; ++i) {
      if (std::find(vars[i].begin(), vars[i].end(), var) == vars[i].end()) continue;
      if (best < 0 || tree.depth[static_cast<int>(i)] < tree.depth[best]) {
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) charge_node[var] = best;
    // A weighted variable in no atom cannot happen (checked above).
  }

  using CountTable = std::map<Tuple, Rational, TupleStorageLess>;
  std::vector<CountTable> tables(n);
  for (size_t i = 0; i < n; ++i) {
    for (auto& row : select_project(q.atoms[i], db)) {
      Rational w = 1;
      bool keep = true;
      for (size_t vi = 0; vi < vars[i].size() && keep; ++vi) {
        auto cn = charge_node.find(vars[i][vi]);
        if (cn == charge_node.end() || cn->second != static_cast<int>(i)) continue;
        const WeightTable& wt = inst.weights.at(vars[i][vi]);
        auto it = wt.find(row[vi]);
        if (it == wt.end()) {
          keep = false;  // weight 0
        } else {
          w *= it->second;
        }
      }
      if (keep) tables[i][std::move(row)] = w;
    }
  }

  std::function<Rational(int)> total_below = [&](int u) -> Rational {
    for (int c : tree.children[u]) {
      // Aggregate the child's totals onto the connector and fold into u.
      std::vector<std::string> conn = intersect_names(vars[c], vars[u]);
      auto cp = positions_of(vars[c], conn);
      auto up = positions_of(vars[u], conn);
      total_below(c);
      CountTable agg;
      for (const auto& [row, w] : tables[c]) agg[project(row, cp)] += w;
      CountTable next;
      for (const auto& [row, w] : tables[u]) {
        auto it = agg.find(project(row, up));
        if (it != agg.end()) next[row] = w * it->second;
      }
      tables[u] = std::move(next);
    }
    Rational t = 0;
    for (const auto& [row, w] : tables[u]) {
      (void)row;
      t += w;
    }
    return t;
  };
  return total_below(tree.root);
}

Rational expected_count(const ParamQuery& q, const Database& db, const Distribution& g) {
  if (!q.filters.empty()) {
    throw ValidationError("expected counting requires a filter-free query; materialize "
                          "filters first");
  }
  if (!q.bound_vars.empty()) {
    throw ValidationError("expected counting requires a full query");
  }
  if (!g.is_factorized()) {
    throw ValidationError("expected counting requires a fully factorized distribution");
  }
  if (g.num_params() != q.parameters.size()) {
    throw ValidationError("distribution has " + std::to_string(g.num_params()) +
                          " marginals but the query declares " +
                          std::to_string(q.parameters.size()) + " parameters");
  }

  // Parameters turn into variables named '$p' (the parser forbids '$' in
  // variable names, so these are collision-free).
  WeightedCountInstance inst;
  inst.db = &db;
  GroundQuery t;
  t.name = q.name;
  t.free_vars = q.free_vars;
  for (const auto& atom : q.atoms) {
    Atom out;
    out.relation = atom.relation;
    for (const auto& term : atom.terms) {
      if (term.kind == Term::Kind::Parameter) {
        out.terms.push_back(Term::variable("$" + term.name));
      } else {
        out.terms.push_back(term);
      }
    }
    t.atoms.push_back(std::move(out));
  }
  for (size_t j = 0; j < q.parameters.size(); ++j) {
    if (!q.param_occurs(static_cast<int>(j + 1))) continue;  // marginal sums to 1
    const std::string vname = "$" + q.parameters[j];
    t.free_vars.push_back(vname);
    WeightTable wt;
    for (const auto& e : g.marginals()[j]) wt[e.value] = e.prob;
    inst.weights[vname] = std::move(wt);
  }
  inst.query = std::move(t);
  return weighted_count(inst);
}

Rational answer_count(const GroundQuery& q, const Database& db) {
  WeightedCountInstance inst;
  inst.query = q;
  inst.db = &db;
  return weighted_count(inst);
}

std::set<Value, ValueStorageLess> numeric_active_domain(const Database& db) {
  std::set<Value, ValueStorageLess> out;
  for (const auto& [name, rel] : db.relations()) {
    (void)name;
    for (const auto& row : rel.tuples()) {
      for (const auto& v : row) {
        if (v.is_numeric()) out.insert(v);
      }
    }
  }
  return out;
}

bool filter_holds(const Filter& f, const std::map<std::string, Value>& binding) {
  if (f.gate) {
    throw InternalError("filter_holds expects an ungated filter: " + to_text(f));
  }
  return filter_satisfied(f, binding);
}

namespace {

ValueKind common_kind(const std::vector<Value>& values, const std::string& what) {
  bool any_numeric = false, any_string = false, any_bool = false;
  for (const auto& v : values) {
    switch (v.kind()) {
      case ValueKind::Integer:
      case ValueKind::Rational: any_numeric = true; break;
      case ValueKind::String: any_string = true; break;
      case ValueKind::Boolean: any_bool = true; break;
    }
  }
  if (any_numeric && !any_string && !any_bool) return ValueKind::Rational;
  if (any_bool && !any_numeric && !any_string) return ValueKind::Boolean;
  if (any_string && !any_numeric && !any_bool) return ValueKind::String;
  throw ValidationError(what + " mixes incompatible value kinds");
}

}  // namespace

MaterializedFilterDb materialize_filters(const ParamQuery& q, const Database& db,
                                         const Distribution& g, unsigned max_arity) {
  if (!g.is_factorized()) {
    throw ValidationError("filter materialization requires a fully factorized distribution");
  }
  validate_against(q, db);
  MaterializedFilterDb out;
  out.db = db;
  out.query = q;
  out.query.filters.clear();

  std::vector<Value> adom;
  {
    auto dom = numeric_active_domain(db);
    adom.assign(dom.begin(), dom.end());
  }

  for (size_t fi = 0; fi < q.filters.size(); ++fi) {
    const Filter& f = q.filters[fi];
    const auto fvars = f.variables();
    const auto fparams = f.parameters();  // gate first when present
    if (f.arity() > max_arity) {
      BigInt rows = 1;
      for (size_t k = 0; k < fvars.size(); ++k) rows *= BigInt(static_cast<long>(adom.size()));
      for (const auto& p : fparams) {
        rows *= BigInt(
            static_cast<long>(g.marginals()[static_cast<size_t>(q.param_index(p)) - 1].size()));
      }
      throw ValidationError("filter " + to_text(f) + " spans " + std::to_string(f.arity()) +
                            " positions, above the materialization bound of " +
                            std::to_string(max_arity) + " (would enumerate " + rows.get_str() +
                            " candidate rows)");
    }

    // Candidate values per column: numeric active domain for variables,
    // marginal support for parameters.
    std::vector<std::vector<Value>> candidates;
    for (size_t k = 0; k < fvars.size(); ++k) candidates.push_back(adom);
    for (const auto& p : fparams) {
      std::vector<Value> vals;
      for (const auto& e : g.marginals()[static_cast<size_t>(q.param_index(p)) - 1]) {
        vals.push_back(e.value);
      }
      candidates.push_back(std::move(vals));
    }

    std::string rel_name = "_F" + std::to_string(fi + 1);
    while (out.db.has_relation(rel_name)) rel_name = "_" + rel_name;

    std::vector<Column> cols;
    for (size_t k = 0; k < fvars.size(); ++k) cols.push_back({fvars[k], ValueKind::Rational});
    for (size_t k = 0; k < fparams.size(); ++k) {
      cols.push_back({fparams[k],
                      common_kind(candidates[fvars.size() + k],
                                  "support of parameter '$" + fparams[k] + "'")});
    }
    Relation frel{RelationSchema(rel_name, std::move(cols))};

    const bool gated = f.gate.has_value();
    std::vector<size_t> idx(candidates.size(), 0);
    bool done = std::any_of(candidates.begin(), candidates.end(),
                            [](const std::vector<Value>& c) { return c.empty(); });
    // Odometer over all candidate combinations (empty product = one row).
    while (!done) {
      Binding binding;
      for (size_t k = 0; k < fvars.size(); ++k) binding[fvars[k]] = candidates[k][idx[k]];
      for (size_t k = 0; k < fparams.size(); ++k) {
        binding[fparams[k]] = candidates[fvars.size() + k][idx[fvars.size() + k]];
      }
      bool pass;
      if (gated) {
        const Value& gv = binding[f.gate->name];
        bool on = gv.kind() == ValueKind::Boolean ? gv.as_boolean()
                                                  : !(gv.as_rational() == Rational(0));
        Filter ungated = f;
        ungated.gate.reset();
        pass = !on || filter_satisfied(ungated, binding);
      } else {
        pass = filter_satisfied(f, binding);
      }
      if (pass) {
        Tuple row;
        for (size_t k = 0; k < candidates.size(); ++k) row.push_back(candidates[k][idx[k]]);
        frel.insert(std::move(row));
      }
      size_t k = candidates.size();
      while (k > 0) {
        --k;
        if (++idx[k] < candidates[k].size()) break;
        idx[k] = 0;
        if (k == 0) done = true;
      }
      if (candidates.empty()) done = true;
    }

    Atom fatom;
    fatom.relation = rel_name;
    for (const auto& v : fvars) fatom.terms.push_back(Term::variable(v));
    for (const auto& p : fparams) {
      fatom.terms.push_back(Term::parameter(p, q.param_index(p)));
    }
    out.query.atoms.push_back(std::move(fatom));
    out.db.add_relation(std::move(frel));
  }
  out.query.validate();
  return out;
}

}  // namespace paramshap
