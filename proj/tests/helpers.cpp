#include "helpers.hpp"

#include <sstream>

#include "paramshap/errors.hpp"

namespace paramshap::testing {

namespace {

Value rand_int_value(Rng& rng, long lo, long hi) {
  return Value::integer(lo + static_cast<long>(rng.below_u64(static_cast<uint64_t>(hi - lo + 1))));
}

// Weighted support over distinct values: small integer weights normalized by
// their total, so every probability is an exact small rational.
Marginal random_marginal(Rng& rng, size_t max_support, long lo, long hi) {
  const size_t span = static_cast<size_t>(hi - lo + 1);
  size_t want = 1 + rng.below_u64(std::min<uint64_t>(max_support, span));
  std::set<long> chosen;
  while (chosen.size() < want)
    chosen.insert(lo + static_cast<long>(rng.below_u64(static_cast<uint64_t>(span))));
  std::vector<long> weights;
  long total = 0;
  for (size_t i = 0; i < chosen.size(); ++i) {
    weights.push_back(1 + static_cast<long>(rng.below_u64(4)));
    total += weights.back();
  }
  Marginal m;
  size_t k = 0;
  for (long v : chosen) m.push_back({Value::integer(v), Rational(weights[k++], total)});
  return m;
}

Filter random_filter(Rng& rng, const std::vector<std::string>& vars,
                     const std::vector<std::string>& params, size_t arity_max) {
  // Draw 1..arity_max distinct references, biased toward variables.
  std::vector<Term> refs;
  size_t want = 1 + rng.below_u64(arity_max);
  std::set<std::string> used;
  for (size_t tries = 0; tries < 12 && refs.size() < want; ++tries) {
    bool pick_param = !params.empty() && (vars.empty() || rng.below_u64(10) < 3);
    if (pick_param) {
      size_t i = rng.below_u64(params.size());
      if (used.insert("$" + params[i]).second)
        refs.push_back(Term::parameter(params[i], static_cast<int>(i + 1)));
    } else if (!vars.empty()) {
      size_t i = rng.below_u64(vars.size());
      if (used.insert(vars[i]).second) refs.push_back(Term::variable(vars[i]));
    }
  }
  if (refs.empty() && !vars.empty()) refs.push_back(Term::variable(vars[0]));

  Filter f;
  for (const Term& t : refs) {
    long coeff = 1 + static_cast<long>(rng.below_u64(2));
    if (rng.below_u64(2) == 0) coeff = -coeff;
    f.lhs.entries.push_back({Rational(coeff), t});
  }
  f.rhs.constant = Rational(-2 + static_cast<long>(rng.below_u64(9)));
  static const CmpOp ops[] = {CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt};
  f.op = ops[rng.below_u64(6)];
  return f;
}

}  // namespace

ShapTask random_full_task(Rng& rng, const RandomTaskOptions& opt) {
  const size_t ell = 1 + rng.below_u64(opt.max_params);
  std::vector<std::string> params;
  for (size_t i = 1; i <= ell; ++i) params.push_back("p" + std::to_string(i));
  const std::vector<std::string> var_pool = {"x1", "x2", "x3", "x4"};

  ParamQuery q;
  bool ok = false;
  for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
    q = ParamQuery{};
    q.name = "Q";
    q.parameters = params;
    const size_t num_atoms = 1 + rng.below_u64(opt.max_atoms);
    std::vector<std::string> seen_vars;
    for (size_t a = 1; a <= num_atoms; ++a) {
      Atom atom;
      atom.relation = "R" + std::to_string(a);
      const size_t arity = 1 + rng.below_u64(3);
      for (size_t pos = 0; pos < arity; ++pos) {
        if (rng.below_u64(10) < 4) {
          size_t i = rng.below_u64(ell);
          atom.terms.push_back(Term::parameter(params[i], static_cast<int>(i + 1)));
        } else {
          const std::string& v = var_pool[rng.below_u64(var_pool.size())];
          atom.terms.push_back(Term::variable(v));
          if (std::find(seen_vars.begin(), seen_vars.end(), v) == seen_vars.end())
            seen_vars.push_back(v);
        }
      }
      q.atoms.push_back(std::move(atom));
    }
    q.free_vars = seen_vars;  // full query: every variable is free
    if (opt.max_filters > 0 && !seen_vars.empty()) {
      size_t nf = rng.below_u64(opt.max_filters + 1);
      for (size_t f = 0; f < nf; ++f)
        q.filters.push_back(random_filter(rng, seen_vars, params, opt.filter_arity_max));
    }
    ok = is_p_acyclic(q);
  }
  if (!ok) {
    // Fallback: one atom holding a variable and every parameter — a single
    // hyperedge is always reducible.
    q = ParamQuery{};
    q.name = "Q";
    q.parameters = params;
    Atom atom;
    atom.relation = "R1";
    atom.terms.push_back(Term::variable("x1"));
    for (size_t i = 0; i < ell; ++i)
      atom.terms.push_back(Term::parameter(params[i], static_cast<int>(i + 1)));
    q.atoms = {atom};
    q.free_vars = {"x1"};
  }
  q.validate();

  // Data: one fresh relation per atom name, random rows.
  Database db;
  std::map<std::string, size_t> arities;
  for (const auto& atom : q.atoms) arities[atom.relation] = atom.terms.size();
  for (const auto& [name, arity] : arities) {
    Relation rel(int_schema(name, arity));
    const size_t rows = 1 + rng.below_u64(opt.max_rows);
    for (size_t r = 0; r < rows; ++r) {
      Tuple t;
      for (size_t c = 0; c < arity; ++c) t.push_back(rand_int_value(rng, opt.value_lo, opt.value_hi));
      rel.insert(std::move(t));
    }
    db.add_relation(std::move(rel));
  }

  ShapTask task;
  task.query = q;
  task.database = std::move(db);
  if (opt.joint) {
    const size_t points = 2 + rng.below_u64(5);
    std::map<Tuple, long, TupleStorageLess> weights;
    for (size_t s = 0; s < points; ++s) {
      Tuple t;
      for (size_t i = 0; i < ell; ++i) t.push_back(rand_int_value(rng, opt.value_lo, opt.value_hi));
      weights[t] += 1 + static_cast<long>(rng.below_u64(4));
    }
    long total = 0;
    for (const auto& [t, w] : weights) total += w;
    std::vector<std::pair<Tuple, Rational>> pts;
    for (const auto& [t, w] : weights) pts.push_back({t, Rational(w, total)});
    size_t ref_i = rng.below_u64(pts.size());
    task.reference = pts[ref_i].first;
    task.dist = Distribution::make_joint(ell, std::move(pts));
  } else {
    std::vector<Marginal> ms;
    for (size_t i = 0; i < ell; ++i)
      ms.push_back(random_marginal(rng, opt.max_support, opt.value_lo, opt.value_hi));
    Tuple ref;
    for (const Marginal& m : ms) ref.push_back(m[rng.below_u64(m.size())].value);
    task.reference = std::move(ref);
    task.dist = Distribution::make_factorized(std::move(ms));
  }
  task.validate();
  return task;
}

WhyNotInstance random_whynot_instance(Rng& rng, size_t max_filters, bool force_single_atom) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    WhyNotInstance inst;
    ParamQuery q;
    q.name = "W";
    const bool two_atoms = !force_single_atom && rng.below_u64(10) < 4;
    const size_t arity1 = 2 + rng.below_u64(2);
    std::vector<std::string> vars1, vars2;
    for (size_t i = 0; i < arity1; ++i) vars1.push_back("y" + std::to_string(i + 1));
    Atom a1{"S1", {}};
    for (const auto& v : vars1) a1.terms.push_back(Term::variable(v));
    q.atoms.push_back(a1);
    std::vector<std::string> all_vars = vars1;
    if (two_atoms) {
      // Shares the first atom's last variable, adds one fresh one.
      vars2 = {vars1.back(), "y" + std::to_string(arity1 + 1)};
      Atom a2{"S2", {}};
      for (const auto& v : vars2) a2.terms.push_back(Term::variable(v));
      q.atoms.push_back(a2);
      all_vars.push_back(vars2.back());
    }

    const bool with_free = rng.below_u64(10) < 8;
    std::string free_var;
    if (with_free) {
      free_var = all_vars[rng.below_u64(all_vars.size())];
      q.free_vars = {free_var};
    }
    for (const auto& v : all_vars)
      if (v != free_var) q.bound_vars.push_back(v);

    const size_t m = 1 + rng.below_u64(max_filters);
    for (size_t f = 0; f < m; ++f) {
      // Keep each filter inside one atom's variables so the gated rewrite
      // stays reducible.
      const std::vector<std::string>& scope = (two_atoms && rng.below_u64(2)) ? vars2 : vars1;
      q.filters.push_back(random_filter(rng, scope, {}, 2));
    }
    q.validate();

    Database db;
    {
      Relation r1(int_schema("S1", arity1));
      size_t rows = 2 + rng.below_u64(10);
      for (size_t r = 0; r < rows; ++r) {
        Tuple t;
        for (size_t c = 0; c < arity1; ++c) t.push_back(rand_int_value(rng, 0, 3));
        r1.insert(std::move(t));
      }
      db.add_relation(std::move(r1));
      if (two_atoms) {
        Relation r2(int_schema("S2", 2));
        size_t rows2 = 2 + rng.below_u64(8);
        for (size_t r = 0; r < rows2; ++r) {
          Tuple t;
          t.push_back(rand_int_value(rng, 0, 3));
          t.push_back(rand_int_value(rng, 0, 3));
          r2.insert(std::move(t));
        }
        db.add_relation(std::move(r2));
      }
    }

    Relation answers = evaluate_generic(q, db);
    Tuple tuple;
    if (with_free) {
      std::vector<Tuple> absent_near, absent_far;
      for (long v = 0; v <= 8; ++v) {
        Tuple cand = {Value::integer(v)};
        if (!answers.contains(cand)) (v <= 4 ? absent_near : absent_far).push_back(cand);
      }
      if (!absent_near.empty())
        tuple = absent_near[rng.below_u64(absent_near.size())];
      else if (!absent_far.empty())
        tuple = absent_far[rng.below_u64(absent_far.size())];
      else
        continue;
    } else {
      if (!answers.empty()) continue;  // the Boolean query must come out false
    }

    inst.query = std::move(q);
    inst.database = std::move(db);
    inst.tuple = std::move(tuple);
    inst.validate();
    return inst;
  }
  throw InternalError("random why-not generation exhausted its attempts");
}

std::string describe(const ShapTask& task) {
  std::ostringstream out;
  out << to_text(task.query) << "\n";
  for (const auto& [name, rel] : task.database.relations()) {
    out << name << " = {";
    bool first = true;
    for (const Tuple& t : rel.tuples()) {
      if (!first) out << ", ";
      first = false;
      out << tuple_to_string(t);
    }
    out << "}\n";
  }
  out << "similarity " << task.fn.name() << ", reference " << tuple_to_string(task.reference)
      << "\n";
  if (task.dist.is_factorized()) {
    const auto& ms = task.dist.marginals();
    for (size_t i = 0; i < ms.size(); ++i) {
      out << "  $" << task.query.parameters[i] << " ~ {";
      for (size_t k = 0; k < ms[i].size(); ++k) {
        if (k) out << ", ";
        out << ms[i][k].value.to_string() << ": " << ms[i][k].prob;
      }
      out << "}\n";
    }
  } else {
    out << "  joint {";
    bool first = true;
    for (const auto& [t, p] : task.dist.points()) {
      if (!first) out << ", ";
      first = false;
      out << tuple_to_string(t) << ": " << p;
    }
    out << "}\n";
  }
  return out.str();
}

std::string describe(const WhyNotInstance& inst) {
  std::ostringstream out;
  out << to_text(inst.query) << "\n";
  for (const auto& [name, rel] : inst.database.relations()) {
    out << name << " = {";
    bool first = true;
    for (const Tuple& t : rel.tuples()) {
      if (!first) out << ", ";
      first = false;
      out << tuple_to_string(t);
    }
    out << "}\n";
  }
  out << "absent tuple " << tuple_to_string(inst.tuple) << "\n";
  return out.str();
}

}  // namespace paramshap::testing
