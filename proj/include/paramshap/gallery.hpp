#pragma once

#include <cstdint>
#include <vector>

#include "paramshap/rational.hpp"
#include "paramshap/shap.hpp"
#include "paramshap/whynot.hpp"

namespace paramshap {

/// A monotone disjunctive-normal-form formula: every literal positive,
/// variables numbered 1..num_vars.
struct PosDnf {
  size_t num_vars = 0;
  std::vector<std::vector<size_t>> disjuncts;  // 1-based variable indices

  void validate() const;  // ≥1 disjunct, none empty, indices in range
};

bool dnf_satisfied(const PosDnf& phi, const std::vector<bool>& assignment);

/// Number of satisfying assignments by truth-table enumeration (≤ 20 vars).
BigInt dnf_count_satisfying(const PosDnf& phi);

/// Hard scoring instance from the formula: a Boolean star query
/// ∃x: R_1(x,$y_1) ∧ … ∧ R_ℓ(x,$y_ℓ) over a database arranged so that the
/// query holds at p exactly when the 0/1-assignment p satisfies the
/// formula; uniform binary parameters, reference all-ones, set-difference
/// similarity.
ShapTask gen_dnf_instance(const PosDnf& phi);

/// Same correspondence through one ℓ-ary relation and per-position filters
/// [x_j ≤ $y_j]: row i holds the indicator vector of disjunct i's
/// variables.
ShapTask gen_ineq_instance(const PosDnf& phi);

/// Satisfying-assignment count recovered from the expected similarity of a
/// generated instance: 2^ℓ · (value + 1).
Rational recover_dnf_count(const Rational& expected_similarity, size_t ell);

/// Hard why-not instance from a cover problem over elements 1..m: one
/// n-ary relation whose column i is the indicator of sets[i], filters
/// [x_i = 0], why-not tuple (). A coalition of filters empties the query
/// exactly when its sets cover every element; an uncovered element makes
/// the construction invalid (the tuple would be an answer).
WhyNotInstance gen_setcover_instance(size_t m, const std::vector<std::vector<size_t>>& sets);

/// Whether the sets selected by the coalition cover every element of 1..m.
bool coalition_covers(const std::vector<std::vector<size_t>>& sets, Coalition j, size_t m);

}  // namespace paramshap
