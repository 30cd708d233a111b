#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "paramshap/query.hpp"
#include "paramshap/rational.hpp"
#include "paramshap/relation.hpp"
#include "paramshap/rng.hpp"
#include "paramshap/value.hpp"

namespace paramshap {

/// Subset of the parameter positions 1..ℓ; bit i−1 set ⇔ position i in the
/// set. Used by the brute-force and sampling paths (ℓ ≤ 63 there).
using Coalition = uint64_t;

inline bool coalition_has(Coalition j, int i) { return (j >> (i - 1)) & 1u; }
inline Coalition coalition_add(Coalition j, int i) { return j | (Coalition{1} << (i - 1)); }
inline Coalition coalition_drop(Coalition j, int i) { return j & ~(Coalition{1} << (i - 1)); }
inline Coalition full_coalition(size_t ell) {
  return ell >= 64 ? ~Coalition{0} : (Coalition{1} << ell) - 1;
}
inline int coalition_size(Coalition j) { return __builtin_popcountll(j); }
std::string coalition_text(Coalition j, size_t ell);

struct MarginalEntry {
  Value value;
  Rational prob;
};
/// One parameter position's distribution: distinct values, positive
/// probabilities, total mass 1.
using Marginal = std::vector<MarginalEntry>;

/// Distribution over parameter tuples: either fully factorized (independent
/// per-position marginals) or an explicit joint support table.
class Distribution {
 public:
  enum class Kind { Factorized, Joint };

  static Distribution make_factorized(std::vector<Marginal> marginals);
  static Distribution make_joint(size_t arity, std::vector<std::pair<Tuple, Rational>> points);
  /// Factorized point mass on p.
  static Distribution point_mass(const Tuple& p);
  /// Independent uniform marginals over the given per-position value lists.
  static Distribution uniform_product(const std::vector<std::vector<Value>>& supports);

  Kind kind() const { return kind_; }
  bool is_factorized() const { return kind_ == Kind::Factorized; }
  size_t num_params() const { return arity_; }

  const std::vector<Marginal>& marginals() const;
  const std::vector<std::pair<Tuple, Rational>>& points() const;

  /// Per-position law (0-based pos); computed by projection for joint tables.
  Marginal marginal_of(size_t pos) const;

  /// Γ(p); 0 off support.
  Rational prob(const Tuple& p) const;
  bool in_support(const Tuple& p) const { return prob(p).sign() > 0; }

  /// Pr[p_J = ref_J].
  Rational agreement_prob(Coalition j, const Tuple& ref) const;

  /// Pr[p' = p | p'_J = ref_J]; throws on a zero-probability condition.
  Rational conditional_prob(const Tuple& p, Coalition j, const Tuple& ref) const;

  /// Number of support tuples (product of marginal sizes for factorized).
  BigInt support_size() const;

  /// Enumerates (p, Γ(p)) over the support. Factorized supports enumerate in
  /// odometer order (last position fastest); joint tables in storage order.
  void for_each_support(const std::function<void(const Tuple&, const Rational&)>& fn) const;

  Tuple sample(Rng& rng) const;
  /// Draw from Γ conditioned on p_J = ref_J; throws on zero-probability
  /// conditions.
  Tuple sample_conditioned(Rng& rng, Coalition j, const Tuple& ref) const;

 private:
  Distribution() = default;

  Kind kind_ = Kind::Factorized;
  size_t arity_ = 0;
  std::vector<Marginal> marginals_;                  // factorized
  std::vector<std::pair<Tuple, Rational>> points_;   // joint
};

/// Coalition-size weights of the Shapley expansion: probability of one
/// specific J with |J| = k among subsets of [ell] minus one fixed element,
/// i.e. 1 / (ell · C(ell−1, k)).
Rational pi_subset_prob(size_t ell, size_t k);

/// Random J ⊆ [ell]∖{i} with Pr(J) = pi_subset_prob(ell, |J|): draw the size
/// k uniformly from {0,…,ell−1}, then a uniform k-subset incrementally.
Coalition sample_coalition(Rng& rng, size_t ell, int i);

/// The two-step perturbation law: J ~ size-then-subset as above, then
/// p ~ base conditioned on agreeing with ref on J ∪ {i} (when present) or on
/// J alone (when !present).
struct PerturbationDistribution {
  const Distribution* base = nullptr;
  Tuple ref;
  int index = 0;  // 1-based pinned position
  bool present = false;
};

Tuple sample_perturbation(const PerturbationDistribution& pd, Rng& rng);

/// Exact probability Γ^{i,b}(p) by brute-force enumeration over coalitions
/// (test oracle; ell ≤ 20).
Rational perturbation_prob(const PerturbationDistribution& pd, const Tuple& p);

/// Blends each unpinned coordinate j of a factorized g into
/// q·δ_{ref_j} + (1−q)·Γ_j. Pins with bit 1 become the point mass δ_{ref_j};
/// pins with bit 0 keep Γ_j unchanged. Keys of `pinned` are 1-based.
Distribution mix_with_reference(const Distribution& g, const Tuple& ref, const Rational& q,
                                const std::map<int, bool>& pinned);

/// Reads a distribution JSON file and types its values against the query's
/// parameter usage in db: each value is parsed lexically (integer, a/b
/// rational, true/false, else string) and coerced to the column kind where
/// its parameter occurs in atoms; filter-only parameters require numeric
/// values (0/1 or true/false for gates).
///
///   {"type": "factorized", "params": {"d": [{"value": "7", "prob": "1/2"}, ...], ...}}
///   {"type": "joint", "support": [{"tuple": ["1", "2"], "prob": "1/4"}, ...]}
Distribution load_distribution(const std::string& path, const ParamQuery& q, const Database& db);

/// Same, from already-parsed JSON text (used by tests and the CLI).
Distribution parse_distribution(const std::string& json_text, const ParamQuery& q,
                                const Database& db, const std::string& where);

/// Types a reference/parameter tuple given as strings, against the query's
/// parameter kinds (same rule as distribution values).
Tuple type_parameter_tuple(const std::vector<std::string>& raw, const ParamQuery& q,
                           const Database& db, const std::string& what);

}  // namespace paramshap
