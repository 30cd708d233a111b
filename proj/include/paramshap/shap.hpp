#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "paramshap/distribution.hpp"
#include "paramshap/eval.hpp"
#include "paramshap/query.hpp"
#include "paramshap/rational.hpp"
#include "paramshap/relation.hpp"
#include "paramshap/similarity.hpp"

namespace paramshap {

inline constexpr uint64_t kDefaultSupportBudget = 1'000'000;
inline constexpr size_t kDefaultBruteforceLimit = 20;
inline constexpr uint64_t kMcChunkSize = 512;

/// One scoring problem: how much does each parameter of the query, drawn
/// from Γ, contribute to the similarity between the drawn answer and the
/// reference answer Q_{p*}(D)?
struct ShapTask {
  ParamQuery query;
  Database database;
  Tuple reference;  // p*, must have positive probability under dist
  Distribution dist = Distribution::make_factorized({});
  SimilarityFn fn = SimilarityFn::jaccard();

  uint64_t row_budget = kDefaultRowBudget;
  uint64_t support_budget = kDefaultSupportBudget;
  size_t bruteforce_limit = kDefaultBruteforceLimit;
  unsigned filter_arity_max = kDefaultFilterArity;

  size_t num_params() const { return query.parameters.size(); }
  void validate() const;
};

struct ShapResult {
  std::vector<std::string> params;  // names, aligned with scores
  std::vector<Rational> scores;     // exact methods
  std::vector<double> estimates;    // monte carlo
  std::string method;               // "exact" | "bruteforce" | "mc"
  Rational nu_full, nu_empty;       // utility at [ℓ] and at ∅ (exact methods)
  double epsilon = 0, delta = 0;    // monte carlo metadata
  uint64_t samples_per_side = 0, seed = 0;
};

/// Conditional expected similarity ν(J) = E[s(Q_p(D), Q_{p*}(D)) | p_J = p*_J]
/// by support enumeration (with active-domain truncation when the raw
/// support is over budget).
Rational nu(const ShapTask& task, Coalition j);

/// The dual utility ν̄(J) = −ν([ℓ]∖J).
Rational nu_bar(const ShapTask& task, Coalition j);

/// All 2^ℓ utility values from a single enumeration pass (ℓ capped by
/// bruteforce_limit); index = coalition bitmask.
std::vector<Rational> nu_all(const ShapTask& task);

/// Generic Shapley value of player i from an arbitrary utility.
Rational shapley_from_utility(size_t ell, const std::function<Rational(Coalition)>& utility,
                              int i);

/// Score by the definition: sum over all coalitions (ℓ ≤ bruteforce_limit).
Rational shap_bruteforce(const ShapTask& task, int i);
ShapResult shap_bruteforce_all(const ShapTask& task);

/// Unconditional expected similarity E_{p~Γ}[s(Q_p(D), Q_{p*}(D))].
/// Fast path for counting-decomposable functions on full p-acyclic queries
/// with factorized Γ; enumeration otherwise.
Rational esim(const ShapTask& task);
/// The enumeration path by itself (cross-check oracle).
Rational esim_enumerated(const ShapTask& task);

/// Exact scores for full p-acyclic queries, counting-decomposable
/// similarity, factorized Γ: per parameter, two expected-similarity
/// polynomials are read off at ℓ points through reference-blended
/// distributions and solved for the stratified coalition sums.
ShapResult shap_exact(const ShapTask& task, unsigned threads = 1);

/// Sampled score of parameter i with additive error ε at confidence 1−δ.
/// Deterministic for a fixed seed regardless of thread count. `bounds`
/// overrides the similarity's built-in value range (required for unbounded
/// functions).
std::pair<double, uint64_t> shap_montecarlo(
    const ShapTask& task, int i, double epsilon, double delta, uint64_t seed,
    std::optional<std::pair<double, double>> bounds = std::nullopt, unsigned threads = 1);
ShapResult shap_montecarlo_all(const ShapTask& task, double epsilon, double delta, uint64_t seed,
                               std::optional<std::pair<double, double>> bounds = std::nullopt,
                               unsigned threads = 1);

/// Atoms of q plus atoms of ground(q, ref): counting its answers counts
/// |Q_p(D) ∩ Q_{p*}(D)| for full filter-free queries.
ParamQuery intersection_query(const ParamQuery& q, const Tuple& ref);

/// Whether shap_exact accepts this task; on refusal `reason` (if given)
/// receives the violated precondition. Assumes the task itself validates.
bool exact_eligible(const ShapTask& task, std::string* reason = nullptr);

/// Number of samples per side for the Monte Carlo estimator.
uint64_t mc_sample_count(double epsilon, double delta, double range);

}  // namespace paramshap
