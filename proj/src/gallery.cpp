#include "paramshap/gallery.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "paramshap/errors.hpp"

namespace paramshap {

namespace {

constexpr size_t kGenScaleLimit = 12;
constexpr size_t kTruthTableLimit = 20;

std::string var_name(const char* stem, size_t i) { return stem + std::to_string(i); }

Marginal uniform_binary() {
  return {{Value::integer(0), Rational(BigInt(1), BigInt(2))},
          {Value::integer(1), Rational(BigInt(1), BigInt(2))}};
}

Distribution uniform_binary_product(size_t ell) {
  return Distribution::make_factorized(std::vector<Marginal>(ell, uniform_binary()));
}

void require_gen_scale(const PosDnf& phi) {
  phi.validate();
  if (phi.num_vars > kGenScaleLimit) {
    throw ValidationError("generator accepts at most " + std::to_string(kGenScaleLimit) +
                          " variables; the formula has " + std::to_string(phi.num_vars));
  }
}

}  // namespace

void PosDnf::validate() const {
  if (num_vars == 0) throw ValidationError("the formula needs at least one variable");
  if (disjuncts.empty()) throw ValidationError("the formula needs at least one disjunct");
  for (const auto& d : disjuncts) {
    if (d.empty()) throw ValidationError("every disjunct needs at least one variable");
    for (size_t v : d) {
      if (v < 1 || v > num_vars) {
        throw ValidationError("disjunct mentions variable " + std::to_string(v) +
                              " outside 1.." + std::to_string(num_vars));
      }
    }
  }
}

bool dnf_satisfied(const PosDnf& phi, const std::vector<bool>& assignment) {
  if (assignment.size() != phi.num_vars) {
    throw ValidationError("assignment covers " + std::to_string(assignment.size()) +
                          " of " + std::to_string(phi.num_vars) + " variables");
  }
  for (const auto& d : phi.disjuncts) {
    if (std::all_of(d.begin(), d.end(), [&](size_t v) { return assignment[v - 1]; })) {
      return true;
    }
  }
  return false;
}

BigInt dnf_count_satisfying(const PosDnf& phi) {
  phi.validate();
  if (phi.num_vars > kTruthTableLimit) {
    throw BudgetError("truth-table counting stops at " + std::to_string(kTruthTableLimit) +
                      " variables");
  }
  BigInt count = 0;
  std::vector<bool> assignment(phi.num_vars, false);
  for (uint64_t mask = 0; mask < (uint64_t{1} << phi.num_vars); ++mask) {
    for (size_t v = 0; v < phi.num_vars; ++v) assignment[v] = (mask >> v) & 1;
    if (dnf_satisfied(phi, assignment)) ++count;
  }
  return count;
}

ShapTask gen_dnf_instance(const PosDnf& phi) {
  require_gen_scale(phi);
  const size_t ell = phi.num_vars;
  const size_t n = phi.disjuncts.size();

  ShapTask task;
  for (size_t i = 1; i <= ell; ++i) {
    const std::string rel = var_name("R", i);
    Relation r(RelationSchema(rel, {{"d", ValueKind::Integer}, {"b", ValueKind::Integer}}));
    for (size_t j = 1; j <= n; ++j) {
      r.insert({Value::integer(static_cast<long>(j)), Value::integer(1)});
      const auto& d = phi.disjuncts[j - 1];
      if (std::find(d.begin(), d.end(), i) == d.end()) {
        r.insert({Value::integer(static_cast<long>(j)), Value::integer(0)});
      }
    }
    task.database.add_relation(std::move(r));

    Atom atom;
    atom.relation = rel;
    atom.terms = {Term::variable("x"),
                  Term::parameter(var_name("y", i), static_cast<int>(i))};
    task.query.atoms.push_back(std::move(atom));
    task.query.parameters.push_back(var_name("y", i));
    task.reference.push_back(Value::integer(1));
  }
  task.query.name = "Q";
  task.query.bound_vars = {"x"};
  task.dist = uniform_binary_product(ell);
  task.fn = SimilarityFn::neg_diff();
  task.query.validate();
  task.validate();
  return task;
}

ShapTask gen_ineq_instance(const PosDnf& phi) {
  require_gen_scale(phi);
  const size_t ell = phi.num_vars;

  ShapTask task;
  std::vector<Column> cols;
  for (size_t j = 1; j <= ell; ++j) cols.push_back({var_name("c", j), ValueKind::Integer});
  Relation r(RelationSchema("R", cols));
  for (const auto& d : phi.disjuncts) {
    Tuple row;
    for (size_t j = 1; j <= ell; ++j) {
      const bool in = std::find(d.begin(), d.end(), j) != d.end();
      row.push_back(Value::integer(in ? 1 : 0));
    }
    r.insert(std::move(row));
  }
  task.database.add_relation(std::move(r));

  task.query.name = "Q";
  Atom atom;
  atom.relation = "R";
  for (size_t j = 1; j <= ell; ++j) {
    atom.terms.push_back(Term::variable(var_name("x", j)));
    task.query.bound_vars.push_back(var_name("x", j));
    task.query.parameters.push_back(var_name("y", j));
    task.reference.push_back(Value::integer(1));

    Filter f;  // [x_j <= y_j]
    f.lhs.entries.push_back({Rational(1), Term::variable(var_name("x", j))});
    f.rhs.entries.push_back(
        {Rational(1), Term::parameter(var_name("y", j), static_cast<int>(j))});
    f.op = CmpOp::Le;
    task.query.filters.push_back(std::move(f));
  }
  task.query.atoms.push_back(std::move(atom));
  task.dist = uniform_binary_product(ell);
  task.fn = SimilarityFn::neg_diff();
  task.query.validate();
  task.validate();
  return task;
}

Rational recover_dnf_count(const Rational& expected_similarity, size_t ell) {
  BigInt scale = 1;
  scale <<= ell;
  return Rational(scale) * (expected_similarity + Rational(1));
}

WhyNotInstance gen_setcover_instance(size_t m,
                                     const std::vector<std::vector<size_t>>& sets) {
  const size_t n = sets.size();
  if (n == 0 || m == 0) {
    throw ValidationError("the cover instance needs at least one set and one element");
  }
  if (n > kGenScaleLimit || m > kGenScaleLimit) {
    throw ValidationError("generator accepts at most " + std::to_string(kGenScaleLimit) +
                          " sets and elements");
  }
  for (const auto& s : sets) {
    for (size_t e : s) {
      if (e < 1 || e > m) {
        throw ValidationError("set mentions element " + std::to_string(e) + " outside 1.." +
                              std::to_string(m));
      }
    }
  }
  for (size_t j = 1; j <= m; ++j) {
    const bool covered = std::any_of(sets.begin(), sets.end(), [&](const auto& s) {
      return std::find(s.begin(), s.end(), j) != s.end();
    });
    if (!covered) {
      throw ValidationError("element " + std::to_string(j) +
                            " is in no set, so the query would hold and the why-not "
                            "question would be void");
    }
  }

  WhyNotInstance inst;
  std::vector<Column> cols;
  for (size_t i = 1; i <= n; ++i) cols.push_back({var_name("c", i), ValueKind::Integer});
  Relation r(RelationSchema("R", cols));
  for (size_t j = 1; j <= m; ++j) {
    Tuple row;
    for (size_t i = 1; i <= n; ++i) {
      const auto& s = sets[i - 1];
      const bool member = std::find(s.begin(), s.end(), j) != s.end();
      row.push_back(Value::integer(member ? 1 : 0));
    }
    r.insert(std::move(row));
  }
  inst.database.add_relation(std::move(r));

  inst.query.name = "Q";
  Atom atom;
  atom.relation = "R";
  for (size_t i = 1; i <= n; ++i) {
    atom.terms.push_back(Term::variable(var_name("x", i)));
    inst.query.bound_vars.push_back(var_name("x", i));

    Filter f;  // [x_i = 0]
    f.lhs.entries.push_back({Rational(1), Term::variable(var_name("x", i))});
    f.op = CmpOp::Eq;
    inst.query.filters.push_back(std::move(f));
  }
  inst.query.atoms.push_back(std::move(atom));
  inst.query.validate();
  inst.validate();  // also rejects instances with an uncovered element
  return inst;
}

bool coalition_covers(const std::vector<std::vector<size_t>>& sets, Coalition j, size_t m) {
  std::set<size_t> covered;
  for (size_t i = 1; i <= sets.size(); ++i) {
    if (!coalition_has(j, static_cast<int>(i))) continue;
    covered.insert(sets[i - 1].begin(), sets[i - 1].end());
  }
  return covered.size() >= m;
}

}  // namespace paramshap
