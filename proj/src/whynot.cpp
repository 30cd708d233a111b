#include "paramshap/whynot.hpp"

#include <map>
#include <set>

#include "paramshap/errors.hpp"
#include "paramshap/linalg.hpp"
#include "paramshap/shap.hpp"

namespace paramshap {

namespace {

using Subst = std::map<std::string, Value>;

Subst head_substitution(const WhyNotInstance& inst) {
  Subst s;
  for (size_t i = 0; i < inst.query.free_vars.size(); ++i) {
    s.emplace(inst.query.free_vars[i], inst.tuple[i]);
  }
  return s;
}

Atom substitute_atom(const Atom& a, const Subst& s) {
  Atom out = a;
  for (auto& t : out.terms) {
    if (t.kind != Term::Kind::Variable) continue;
    auto it = s.find(t.name);
    if (it != s.end()) t = Term::constant_of(it->second);
  }
  return out;
}

Filter false_filter() {
  Filter f;  // [0 < 0]
  f.op = CmpOp::Lt;
  return f;
}

std::optional<LinearExpr> substitute_expr(const LinearExpr& e, const Subst& s) {
  LinearExpr out;
  out.constant = e.constant;
  for (const auto& entry : e.entries) {
    if (entry.ref.kind == Term::Kind::Variable) {
      auto it = s.find(entry.ref.name);
      if (it != s.end()) {
        if (!it->second.is_numeric()) return std::nullopt;
        out.constant += entry.coeff * it->second.as_rational();
        continue;
      }
    }
    out.entries.push_back(entry);
  }
  return out;
}

/// Free variables replaced by their tuple values; a non-numeric value in a
/// comparison makes the filter unsatisfiable, matching evaluation semantics.
Filter substitute_filter(const Filter& f, const Subst& s) {
  auto lhs = substitute_expr(f.lhs, s);
  auto rhs = substitute_expr(f.rhs, s);
  if (!lhs || !rhs) return false_filter();
  Filter out = f;
  out.lhs = std::move(*lhs);
  out.rhs = std::move(*rhs);
  return out;
}

GroundQuery restricted_unchecked(const WhyNotInstance& inst, Coalition j) {
  const Subst s = head_substitution(inst);
  ParamQuery out;
  out.name = inst.query.name + "_open";
  out.free_vars = inst.query.bound_vars;
  for (const auto& a : inst.query.atoms) out.atoms.push_back(substitute_atom(a, s));
  for (size_t fi = 0; fi < inst.query.filters.size(); ++fi) {
    if (coalition_has(j, static_cast<int>(fi + 1))) {
      out.filters.push_back(substitute_filter(inst.query.filters[fi], s));
    }
  }
  out.validate();
  return out;
}

Rational restricted_count(const WhyNotInstance& inst, Coalition j) {
  Relation r = evaluate(restricted_unchecked(inst, j), inst.database, inst.row_budget);
  return Rational(static_cast<long>(r.size()));
}

void require_coalition(const WhyNotInstance& inst, Coalition j) {
  if ((j & ~full_coalition(inst.num_filters())) != 0) {
    throw ValidationError("coalition " + coalition_text(j, 8 * sizeof(Coalition)) +
                          " names filters beyond the " +
                          std::to_string(inst.num_filters()) + " in the query");
  }
}

FilterRemovalProfile profile_unchecked(const WhyNotInstance& inst) {
  FilterRemovalProfile out;
  const GroundQuery q0 = restricted_unchecked(inst, 0);
  const Relation alive = evaluate(q0, inst.database, inst.row_budget);
  const Subst s = head_substitution(inst);
  std::vector<Filter> subbed;
  for (const auto& f : inst.query.filters) subbed.push_back(substitute_filter(f, s));
  for (const auto& u : alive.tuples()) {
    std::map<std::string, Value> binding;
    for (size_t i = 0; i < q0.free_vars.size(); ++i) binding.emplace(q0.free_vars[i], u[i]);
    Coalition mask = 0;
    for (size_t fi = 0; fi < subbed.size(); ++fi) {
      if (!filter_holds(subbed[fi], binding)) {
        mask = coalition_add(mask, static_cast<int>(fi + 1));
      }
    }
    if (mask == 0) {
      throw InternalError("assignment " + tuple_to_string(u) +
                          " passes every filter although the tuple is not an answer");
    }
    out.tuples.push_back(u);
    out.rejected_by.push_back(mask);
  }
  return out;
}

}  // namespace

void WhyNotInstance::validate() const {
  query.validate();
  if (!query.parameters.empty()) {
    throw ValidationError("a why-not question needs a parameter-free query; '" + query.name +
                          "' declares " + std::to_string(query.parameters.size()) +
                          " parameters");
  }
  validate_against(query, database);
  const RelationSchema out_schema = output_schema(query, database);
  if (tuple.size() != out_schema.arity()) {
    throw ValidationError("why-not tuple has " + std::to_string(tuple.size()) +
                          " values but the query outputs " +
                          std::to_string(out_schema.arity()) + " columns");
  }
  for (size_t i = 0; i < tuple.size(); ++i) {
    const ValueKind col = out_schema.columns[i].kind;
    const bool col_numeric = col == ValueKind::Integer || col == ValueKind::Rational;
    const bool ok = col_numeric ? tuple[i].is_numeric() : tuple[i].kind() == col;
    if (!ok) {
      throw ValidationError("why-not tuple value " + tuple[i].to_string() + " at position " +
                            std::to_string(i + 1) + " does not fit output column '" +
                            out_schema.columns[i].name + "' of kind " + kind_name(col));
    }
  }
  Relation answers = evaluate(query, database, row_budget);
  if (answers.contains(tuple)) {
    throw ValidationError("tuple " + tuple_to_string(tuple) +
                          " is an answer of the query; there is no absence to explain");
  }
}

GroundQuery q_restricted(const WhyNotInstance& inst, Coalition j) {
  require_coalition(inst, j);
  return restricted_unchecked(inst, j);
}

Rational nu_qual(const WhyNotInstance& inst, Coalition j) {
  inst.validate();
  require_coalition(inst, j);
  return restricted_count(inst, j).is_zero() ? Rational(1) : Rational(0);
}

Rational nu_size(const WhyNotInstance& inst, Coalition j) {
  inst.validate();
  require_coalition(inst, j);
  return restricted_count(inst, 0) - restricted_count(inst, j);
}

std::vector<Rational> whynot_shapley_bruteforce(const WhyNotInstance& inst,
                                                WhyNotUtility utility) {
  inst.validate();
  const size_t m = inst.num_filters();
  if (m == 0) return {};
  if (m > kDefaultBruteforceLimit) {
    throw BudgetError("coalition table over " + std::to_string(m) +
                      " filters exceeds the limit of " +
                      std::to_string(kDefaultBruteforceLimit));
  }
  std::vector<Rational> counts;
  counts.reserve(size_t{1} << m);
  for (Coalition j = 0; j < (Coalition{1} << m); ++j) {
    counts.push_back(restricted_count(inst, j));
  }
  auto value = [&](Coalition j) {
    if (utility == WhyNotUtility::Qual) {
      return counts[j].is_zero() ? Rational(1) : Rational(0);
    }
    return counts[0] - counts[j];
  };
  std::vector<Rational> scores;
  for (size_t i = 1; i <= m; ++i) {
    scores.push_back(shapley_from_utility(m, value, static_cast<int>(i)));
  }
  return scores;
}

FilterRemovalProfile filter_removal_profile(const WhyNotInstance& inst) {
  inst.validate();
  return profile_unchecked(inst);
}

std::vector<Rational> whynot_size_closedform(const WhyNotInstance& inst) {
  inst.validate();
  if (inst.query.atoms.size() != 1) {
    throw ValidationError("the closed form needs a query with a single relational atom "
                          "containing every variable; this one has " +
                          std::to_string(inst.query.atoms.size()) + " atoms");
  }
  const FilterRemovalProfile profile = profile_unchecked(inst);
  std::vector<Rational> scores(inst.num_filters(), Rational(0));
  for (size_t u = 0; u < profile.tuples.size(); ++u) {
    const Coalition mask = profile.rejected_by[u];
    const Rational share(BigInt(1), BigInt(static_cast<long>(coalition_size(mask))));
    for (size_t fi = 0; fi < scores.size(); ++fi) {
      if (coalition_has(mask, static_cast<int>(fi + 1))) scores[fi] += share;
    }
  }
  return scores;
}

GatedWhyNot build_parameterized(const WhyNotInstance& inst) {
  inst.validate();
  const Subst s = head_substitution(inst);
  GatedWhyNot out;
  ParamQuery& q = out.query;
  q.name = inst.query.name + "_gated";
  q.free_vars = inst.query.bound_vars;
  for (const auto& a : inst.query.atoms) q.atoms.push_back(substitute_atom(a, s));
  std::set<std::string> taken(inst.query.free_vars.begin(), inst.query.free_vars.end());
  taken.insert(inst.query.bound_vars.begin(), inst.query.bound_vars.end());
  for (size_t fi = 0; fi < inst.query.filters.size(); ++fi) {
    std::string gate = "y" + std::to_string(fi + 1);
    while (taken.count(gate)) gate = "_" + gate;
    taken.insert(gate);
    q.parameters.push_back(gate);
    Filter f = substitute_filter(inst.query.filters[fi], s);
    f.gate = Term::parameter(gate, static_cast<int>(fi + 1));
    q.filters.push_back(std::move(f));
    out.reference.push_back(Value::integer(1));
  }
  q.validate();
  return out;
}

Distribution gate_distribution(const std::vector<Rational>& pi) {
  std::vector<Marginal> marginals;
  for (const auto& p : pi) {
    if (p.sign() <= 0 || p > Rational(1)) {
      throw ValidationError("gate probability " + p.to_string() + " is outside (0, 1]");
    }
    Marginal m;
    m.push_back({Value::integer(1), p});
    if (p < Rational(1)) m.push_back({Value::integer(0), Rational(1) - p});
    marginals.push_back(std::move(m));
  }
  return Distribution::make_factorized(std::move(marginals));
}

std::vector<Rational> whynot_shap_size(const WhyNotShapTask& task, unsigned threads) {
  const WhyNotInstance& inst = task.instance;
  if (task.pi.size() != inst.num_filters()) {
    throw ValidationError("need one gate probability per filter: got " +
                          std::to_string(task.pi.size()) + " for " +
                          std::to_string(inst.num_filters()) + " filters");
  }
  GatedWhyNot gated = build_parameterized(inst);
  ShapTask st{std::move(gated.query), inst.database, std::move(gated.reference),
              gate_distribution(task.pi), SimilarityFn::count()};
  st.row_budget = inst.row_budget;
  ShapResult res = shap_exact(st, threads);
  std::vector<Rational> scores;
  for (const auto& v : res.scores) scores.push_back(-v);
  return scores;
}

std::vector<Rational> whynot_size_interpolated(const WhyNotInstance& inst, size_t num_points,
                                               unsigned threads) {
  inst.validate();
  const size_t m = inst.num_filters();
  if (m == 0) return {};
  if (num_points == 0 || num_points > m + 1) {
    throw ValidationError("the fit takes between 1 and " + std::to_string(m + 1) +
                          " evaluation points; got " + std::to_string(num_points));
  }
  std::vector<Rational> points;
  for (size_t r = 1; r <= num_points; ++r) {
    points.push_back(Rational(BigInt(static_cast<long>(r)),
                              BigInt(static_cast<long>(m + 1))));
  }
  std::vector<std::vector<Rational>> evals;
  for (const auto& x : points) {
    evals.push_back(whynot_shap_size({inst, std::vector<Rational>(m, x)}, threads));
  }
  // Vandermonde basis 1, x, ..., x^(num_points-1); the score is the value
  // of the fitted polynomial at 0, i.e. its constant coefficient.
  std::vector<std::vector<Rational>> v(num_points, std::vector<Rational>(num_points));
  for (size_t r = 0; r < num_points; ++r) {
    Rational power = 1;
    for (size_t k = 0; k < num_points; ++k) {
      v[r][k] = power;
      power *= points[r];
    }
  }
  std::vector<Rational> scores;
  for (size_t fi = 0; fi < m; ++fi) {
    std::vector<Rational> b;
    for (size_t r = 0; r < num_points; ++r) b.push_back(evals[r][fi]);
    std::vector<Rational> coeffs = solve_linear_system(v, std::move(b));
    scores.push_back(coeffs[0]);
  }
  return scores;
}

std::vector<Rational> whynot_size_acyclic(const WhyNotInstance& inst, unsigned threads) {
  return whynot_size_interpolated(inst, inst.num_filters() + 1, threads);
}

std::pair<ParamQuery, Tuple> apply_tuple_pattern(
    const ParamQuery& q, const std::vector<std::optional<Value>>& pattern) {
  if (pattern.size() != q.free_vars.size()) {
    throw ValidationError("tuple pattern has " + std::to_string(pattern.size()) +
                          " positions but the query outputs " +
                          std::to_string(q.free_vars.size()));
  }
  ParamQuery out = q;
  out.free_vars.clear();
  Tuple t;
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i]) {
      out.free_vars.push_back(q.free_vars[i]);
      t.push_back(*pattern[i]);
    } else {
      out.bound_vars.push_back(q.free_vars[i]);
    }
  }
  out.validate();
  return {std::move(out), std::move(t)};
}

}  // namespace paramshap
