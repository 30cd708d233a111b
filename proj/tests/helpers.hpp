#pragma once

// Shared test utilities: independent oracles (written from the definitions,
// not from the library's algorithms) and deterministic random-instance
// generators. Every check that compares an engine against an oracle keeps
// the two routes separate: the oracle side only uses primitive building
// blocks (generic evaluation, support enumeration, permutation sums).

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "paramshap/csvio.hpp"
#include "paramshap/distribution.hpp"
#include "paramshap/eval.hpp"
#include "paramshap/hypergraph.hpp"
#include "paramshap/parser.hpp"
#include "paramshap/query.hpp"
#include "paramshap/rational.hpp"
#include "paramshap/relation.hpp"
#include "paramshap/rng.hpp"
#include "paramshap/shap.hpp"
#include "paramshap/similarity.hpp"
#include "paramshap/value.hpp"
#include "paramshap/whynot.hpp"

namespace paramshap::testing {

// ---------------------------------------------------------------------------
// Construction shorthands
// ---------------------------------------------------------------------------

inline RelationSchema int_schema(const std::string& name, size_t arity,
                                 const std::string& prefix = "c") {
  std::vector<Column> cols;
  for (size_t i = 0; i < arity; ++i)
    cols.push_back({prefix + std::to_string(i + 1), ValueKind::Integer});
  return RelationSchema(name, std::move(cols));
}

inline Tuple int_tuple(const std::vector<long>& xs) {
  Tuple t;
  for (long x : xs) t.push_back(Value::integer(x));
  return t;
}

inline Relation int_relation(const std::string& name, size_t arity,
                             const std::vector<std::vector<long>>& rows) {
  Relation r(int_schema(name, arity));
  for (const auto& row : rows) r.insert(int_tuple(row));
  return r;
}

inline Database db_of(std::vector<Relation> rels) {
  Database db;
  for (auto& r : rels) db.add_relation(std::move(r));
  return db;
}

// ---------------------------------------------------------------------------
// Oracle 1: conditional expected similarity, straight from the definition.
// Enumerates the support, filters for agreement with the reference on J,
// evaluates every ground query with the generic backtracking evaluator, and
// normalizes by the agreeing mass it accumulated itself.
// ---------------------------------------------------------------------------

inline bool agrees_on(const Tuple& p, const Tuple& ref, Coalition j) {
  for (size_t k = 0; k < p.size(); ++k)
    if (coalition_has(j, static_cast<int>(k + 1)) && !(p[k] == ref[k])) return false;
  return true;
}

inline Rational nu_oracle(const ShapTask& task, Coalition j) {
  Relation ref_result = evaluate_generic(ground(task.query, task.reference), task.database);
  Rational num = 0, den = 0;
  task.dist.for_each_support([&](const Tuple& p, const Rational& pr) {
    if (!agrees_on(p, task.reference, j)) return;
    den += pr;
    Relation res = evaluate_generic(ground(task.query, p), task.database);
    num += pr * similarity(task.fn, res, ref_result);
  });
  return num / den;
}

// ---------------------------------------------------------------------------
// Oracle 2: Shapley values by permutation enumeration,
//   score(i) = (1/ell!) Σ_σ [ v(before_i(σ) ∪ {i}) − v(before_i(σ)) ],
// a different formula from the subset-weighted sum used by the library.
// Utilities are taken as a dense table indexed by coalition mask.
// ---------------------------------------------------------------------------

inline std::vector<Rational> shapley_by_permutations(size_t ell,
                                                     const std::vector<Rational>& v) {
  std::vector<Rational> score(ell, Rational(0));
  std::vector<int> order(ell);
  std::iota(order.begin(), order.end(), 1);
  Rational norm(BigInt(1), factorial(static_cast<unsigned>(ell)));
  do {
    Coalition seen = 0;
    for (int i : order) {
      Coalition with = coalition_add(seen, i);
      score[static_cast<size_t>(i - 1)] += norm * (v[with] - v[seen]);
      seen = with;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return score;
}

// Dense utility table from the definition-level oracle. Evaluates each
// support point once and aggregates per coalition.
inline std::vector<Rational> nu_table_oracle(const ShapTask& task) {
  const size_t ell = task.num_params();
  Relation ref_result = evaluate_generic(ground(task.query, task.reference), task.database);
  struct Pt {
    Tuple p;
    Rational pr, s;
  };
  std::vector<Pt> pts;
  task.dist.for_each_support([&](const Tuple& p, const Rational& pr) {
    Relation res = evaluate_generic(ground(task.query, p), task.database);
    pts.push_back({p, pr, similarity(task.fn, res, ref_result)});
  });
  std::vector<Rational> v;
  for (Coalition j = 0; j < (Coalition{1} << ell); ++j) {
    Rational num = 0, den = 0;
    for (const Pt& pt : pts) {
      if (!agrees_on(pt.p, task.reference, j)) continue;
      den += pt.pr;
      num += pt.pr * pt.s;
    }
    v.push_back(num / den);
  }
  return v;
}

inline std::vector<Rational> shap_oracle(const ShapTask& task) {
  return shapley_by_permutations(task.num_params(), nu_table_oracle(task));
}

// ---------------------------------------------------------------------------
// Oracle 3: why-not candidate table, built without the library's restricted
// or gated query machinery. The candidate assignments are the answers of the
// atoms alone (free positions hard-wired to the tuple's constants); each
// filter is then decided per candidate with filter_holds.
// ---------------------------------------------------------------------------

struct WhyNotProfileOracle {
  size_t num_candidates = 0;
  std::vector<Coalition> rejected_by;  // one mask per candidate
};

inline WhyNotProfileOracle whynot_profile_oracle(const WhyNotInstance& inst) {
  const ParamQuery& q = inst.query;
  std::map<std::string, Value> fixed;
  for (size_t i = 0; i < q.free_vars.size(); ++i) fixed[q.free_vars[i]] = inst.tuple[i];

  GroundQuery cand;
  cand.name = "cand";
  cand.bound_vars = {};
  for (const auto& atom : q.atoms) {
    Atom a;
    a.relation = atom.relation;
    for (const Term& t : atom.terms) {
      if (t.kind == Term::Kind::Variable && fixed.count(t.name))
        a.terms.push_back(Term::constant_of(fixed.at(t.name)));
      else
        a.terms.push_back(t);
    }
    cand.atoms.push_back(std::move(a));
  }
  std::set<std::string> vars;
  for (const auto& a : cand.atoms)
    for (const Term& t : a.terms)
      if (t.kind == Term::Kind::Variable) vars.insert(t.name);
  cand.free_vars.assign(vars.begin(), vars.end());
  cand.validate();

  Relation rows = evaluate_generic(cand, inst.database, inst.row_budget);

  WhyNotProfileOracle out;
  out.num_candidates = rows.size();
  for (const Tuple& u : rows.tuples()) {
    std::map<std::string, Value> binding = fixed;
    for (size_t c = 0; c < cand.free_vars.size(); ++c) binding[cand.free_vars[c]] = u[c];
    Coalition mask = 0;
    for (size_t f = 0; f < q.filters.size(); ++f)
      if (!filter_holds(q.filters[f], binding)) mask = coalition_add(mask, static_cast<int>(f + 1));
    out.rejected_by.push_back(mask);
  }
  return out;
}

// Survivor count under a gate vector given as a coalition of enabled filters.
inline BigInt whynot_survivors_oracle(const WhyNotProfileOracle& prof, Coalition enabled) {
  BigInt n = 0;
  for (Coalition mask : prof.rejected_by)
    if ((mask & enabled) == 0) n += 1;
  return n;
}

// Utility tables of the two why-not games, from the oracle profile.
inline std::vector<Rational> whynot_qual_table_oracle(const WhyNotInstance& inst) {
  auto prof = whynot_profile_oracle(inst);
  const size_t m = inst.num_filters();
  std::vector<Rational> v;
  for (Coalition j = 0; j < (Coalition{1} << m); ++j)
    v.push_back(whynot_survivors_oracle(prof, j) == 0 ? Rational(1) : Rational(0));
  return v;
}

inline std::vector<Rational> whynot_size_table_oracle(const WhyNotInstance& inst) {
  auto prof = whynot_profile_oracle(inst);
  const size_t m = inst.num_filters();
  std::vector<Rational> v;
  for (Coalition j = 0; j < (Coalition{1} << m); ++j)
    v.push_back(Rational(BigInt(static_cast<long>(prof.num_candidates)) -
                         whynot_survivors_oracle(prof, j)));
  return v;
}

// The softened size game: filters outside the coalition still apply
// independently, filter j with probability pi[j]. Computed by summing over
// all 2^m on/off vectors with their product weights.
inline std::vector<Rational> whynot_soft_size_scores_oracle(const WhyNotInstance& inst,
                                                            const std::vector<Rational>& pi) {
  auto prof = whynot_profile_oracle(inst);
  const size_t m = inst.num_filters();
  std::vector<Rational> v;
  for (Coalition j = 0; j < (Coalition{1} << m); ++j) {
    Rational expect = 0;
    for (Coalition z = 0; z < (Coalition{1} << m); ++z) {
      if ((z & j) != j) continue;  // pinned gates must be on
      Rational w = 1;
      for (size_t f = 1; f <= m; ++f) {
        if (coalition_has(j, static_cast<int>(f))) continue;
        w *= coalition_has(z, static_cast<int>(f)) ? pi[f - 1] : Rational(1) - pi[f - 1];
      }
      expect += w * Rational(whynot_survivors_oracle(prof, z));
    }
    v.push_back(-expect);  // more enabled filters ⇒ fewer survivors ⇒ larger −E
  }
  return shapley_by_permutations(m, v);
}

// ---------------------------------------------------------------------------
// Deterministic random instances
// ---------------------------------------------------------------------------

struct RandomTaskOptions {
  size_t max_params = 5;
  size_t max_atoms = 4;
  size_t max_rows = 25;
  long value_lo = 0, value_hi = 3;
  size_t max_support = 3;   // per-position marginal size
  size_t max_filters = 0;   // 0 ⇒ filter-free
  size_t filter_arity_max = 3;
  bool joint = false;       // joint support table instead of marginals
};

// A random full query over fresh relations R1..Rk whose atom+filter
// structure (parameters included) reduces acyclically; rejection-sampled,
// with a single-atom fallback so generation always terminates.
ShapTask random_full_task(Rng& rng, const RandomTaskOptions& opt);

// A random why-not instance: one or two atoms, a couple of bound variables,
// random linear filters, and an output tuple chosen to not be an answer.
WhyNotInstance random_whynot_instance(Rng& rng, size_t max_filters, bool force_single_atom);

// Compact description used in failure messages so a failing draw can be
// reproduced and inspected.
std::string describe(const ShapTask& task);
std::string describe(const WhyNotInstance& inst);

}  // namespace paramshap::testing
