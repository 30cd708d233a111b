#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paramshap/distribution.hpp"
#include "paramshap/eval.hpp"
#include "paramshap/query.hpp"
#include "paramshap/rational.hpp"
#include "paramshap/relation.hpp"

namespace paramshap {

/// A why-not question: the tuple is absent from the answers of a filtered,
/// parameter-free query, and each filter is scored by its responsibility
/// for that absence. Filters are the players, numbered 1..|filters| in
/// query order.
struct WhyNotInstance {
  ParamQuery query;  // with filters, without parameters
  Database database;
  Tuple tuple;  // over the output schema; not an answer
  uint64_t row_budget = kDefaultRowBudget;

  size_t num_filters() const { return query.filters.size(); }
  void validate() const;
};

enum class WhyNotUtility { Qual, Size };

/// The query with filters outside J dropped, quantifiers dropped (every
/// remaining variable free), and free variables replaced by the tuple's
/// values. Its answers are the candidate assignments still alive under J.
GroundQuery q_restricted(const WhyNotInstance& inst, Coalition j);

/// 1 iff no candidate assignment survives the filters in J.
Rational nu_qual(const WhyNotInstance& inst, Coalition j);
/// How many candidate assignments the filters in J remove.
Rational nu_size(const WhyNotInstance& inst, Coalition j);

/// Exact per-filter scores straight from the coalition sums
/// (2^|filters| query evaluations).
std::vector<Rational> whynot_shapley_bruteforce(const WhyNotInstance& inst,
                                                WhyNotUtility utility);

/// Per candidate assignment: which filters reject it.
struct FilterRemovalProfile {
  std::vector<Tuple> tuples;           // answers of q_restricted(∅)
  std::vector<Coalition> rejected_by;  // aligned masks, each nonzero
};
FilterRemovalProfile filter_removal_profile(const WhyNotInstance& inst);

/// Size-utility scores for single-atom queries: each rejected assignment
/// contributes 1/(number of filters rejecting it) to every rejecting filter.
std::vector<Rational> whynot_size_closedform(const WhyNotInstance& inst);

/// The instance rewritten with one 0/1 gate parameter per filter: gate off
/// disables the filter, so answer sets under gate vectors reproduce the
/// restricted queries. Reference = all gates on.
struct GatedWhyNot {
  ParamQuery query;
  Tuple reference;  // (1, ..., 1)
};
GatedWhyNot build_parameterized(const WhyNotInstance& inst);

/// Independent gate distribution: gate j is on with probability pi[j].
Distribution gate_distribution(const std::vector<Rational>& pi);

/// The gated instance scored with the answer-count similarity under the
/// gate distribution for π.
struct WhyNotShapTask {
  WhyNotInstance instance;
  std::vector<Rational> pi;  // each in (0, 1]
};

/// Per-filter scores of the size-flavoured coalition game in which absent
/// filters still join with probability π: the negated parameter scores of
/// the gated query under the count similarity.
std::vector<Rational> whynot_shap_size(const WhyNotShapTask& task, unsigned threads = 1);

/// Size-utility scores for acyclic filtered queries: fit the degree-≤|I|
/// polynomial x ↦ whynot_shap_size at π = (x,...,x) through the points
/// r/(|I|+1), r = 1..num_points, and read it off at 0. Correct with
/// num_points = |I|+1; smaller counts under-determine the fit and are
/// exposed only to demonstrate that.
std::vector<Rational> whynot_size_interpolated(const WhyNotInstance& inst, size_t num_points,
                                               unsigned threads = 1);
std::vector<Rational> whynot_size_acyclic(const WhyNotInstance& inst, unsigned threads = 1);

/// Replace head positions holding no value by fresh bound variables, so a
/// partially specified tuple can be asked about: returns the narrowed query
/// and the tuple of the remaining defined values.
std::pair<ParamQuery, Tuple> apply_tuple_pattern(const ParamQuery& q,
                                                 const std::vector<std::optional<Value>>& pattern);

}  // namespace paramshap
