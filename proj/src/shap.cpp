#include "paramshap/shap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "paramshap/errors.hpp"
#include "paramshap/hypergraph.hpp"
#include "paramshap/linalg.hpp"

namespace paramshap {

void ShapTask::validate() const {
  query.validate();
  validate_against(query, database);
  const size_t ell = query.parameters.size();
  if (reference.size() != ell) {
    throw ValidationError("reference tuple has " + std::to_string(reference.size()) +
                          " values but the query declares " + std::to_string(ell) +
                          " parameters");
  }
  if (dist.num_params() != ell) {
    throw ValidationError("distribution covers " + std::to_string(dist.num_params()) +
                          " parameters but the query declares " + std::to_string(ell));
  }
  if (ell > 0 && !dist.in_support(reference)) {
    throw ValidationError("reference tuple " + tuple_to_string(reference) +
                          " has probability 0 under the distribution");
  }
}

namespace {

void run_parallel(size_t n, unsigned threads, const std::function<void(size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (size_t u = 0; u < n; ++u) body(u);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      size_t u = next.fetch_add(1);
      if (u >= n) return;
      try {
        body(u);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<size_t>(threads, n));
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Relation reference_result(const ShapTask& t) {
  return evaluate(ground(t.query, t.reference), t.database, t.row_budget);
}

Relation empty_result(const ShapTask& t) {
  return Relation(output_schema(t.query, t.database));
}

Coalition agreement_mask(const Tuple& p, const Tuple& ref) {
  Coalition out = 0;
  for (size_t pos = 0; pos < p.size(); ++pos) {
    if (p[pos] == ref[pos]) out = coalition_add(out, static_cast<int>(pos + 1));
  }
  return out;
}

/// One pass over the (possibly truncated) parameter support with the query
/// evaluated at every kept point.
struct SimSweep {
  std::vector<Coalition> agree;
  std::vector<Rational> prob;  // raw Γ(p)
  std::vector<Rational> sim;
  bool truncated = false;  // some off-domain points skipped; they answer empty
  Rational s_empty = 0;    // set only when truncated
};

/// Per-position allowed values for truncation: a parameter that occurs in an
/// atom can only produce answers when its value appears in that column, so
/// off-domain values contribute the empty-answer similarity.
std::vector<std::vector<Value>> truncated_supports(const ShapTask& t) {
  std::vector<std::vector<Value>> out;
  for (size_t j = 0; j < t.num_params(); ++j) {
    const Marginal m = t.dist.marginal_of(j);
    std::set<Value, ValueStorageLess> dom;
    bool in_atom = false;
    for (const auto& atom : t.query.atoms) {
      for (size_t pos = 0; pos < atom.terms.size(); ++pos) {
        const Term& term = atom.terms[pos];
        if (term.kind != Term::Kind::Parameter ||
            term.param_index != static_cast<int>(j + 1)) {
          continue;
        }
        in_atom = true;
        auto col = active_domain(t.database, std::make_pair(atom.relation, pos));
        dom.insert(col.begin(), col.end());
      }
    }
    std::vector<Value> vals;
    for (const auto& e : m) {
      if (!in_atom || dom.count(e.value)) vals.push_back(e.value);
    }
    out.push_back(std::move(vals));
  }
  return out;
}

SimSweep run_sweep(const ShapTask& t) {
  SimSweep s;
  const Relation t_ref = reference_result(t);

  auto visit = [&](const Tuple& p, const Rational& raw_prob) {
    Relation t_p = evaluate(ground(t.query, p), t.database, t.row_budget);
    s.agree.push_back(agreement_mask(p, t.reference));
    s.prob.push_back(raw_prob);
    s.sim.push_back(similarity(t.fn, t_p, t_ref));
  };

  if (!t.dist.is_factorized()) {
    for (const auto& [p, pr] : t.dist.points()) visit(p, pr);
    return s;
  }

  BigInt budget(static_cast<long>(t.support_budget));
  if (t.dist.support_size() <= budget) {
    t.dist.for_each_support(visit);
    return s;
  }
  auto allowed = truncated_supports(t);
  BigInt truncated_size = 1;
  for (const auto& vals : allowed) truncated_size *= BigInt(static_cast<long>(vals.size()));
  if (truncated_size > budget) {
    throw BudgetError("parameter support needs " + truncated_size.get_str() +
                      " points even after restriction to the active domain; the budget is " +
                      std::to_string(t.support_budget));
  }
  s.truncated = true;
  s.s_empty = similarity(t.fn, empty_result(t), t_ref);
  if (std::any_of(allowed.begin(), allowed.end(),
                  [](const std::vector<Value>& v) { return v.empty(); })) {
    return s;  // every support point answers empty; the residual covers it all
  }
  const size_t ell = allowed.size();
  std::vector<size_t> idx(ell, 0);
  Tuple cur;
  for (size_t j = 0; j < ell; ++j) cur.push_back(allowed[j][0]);
  while (true) {
    visit(cur, t.dist.prob(cur));
    size_t j = ell;
    bool advanced = false;
    while (j > 0) {
      --j;
      if (++idx[j] < allowed[j].size()) {
        cur[j] = allowed[j][idx[j]];
        advanced = true;
        break;
      }
      idx[j] = 0;
      cur[j] = allowed[j][0];
    }
    if (!advanced) break;
  }
  return s;
}

Rational nu_from_sweep(const ShapTask& t, const SimSweep& s, Coalition j) {
  Rational den = t.dist.agreement_prob(j, t.reference);
  if (den.sign() <= 0) {
    throw ValidationError("conditioning on " + coalition_text(j, t.num_params()) +
                          " has probability 0");
  }
  Rational num = 0, seen = 0;
  for (size_t idx = 0; idx < s.prob.size(); ++idx) {
    if ((s.agree[idx] & j) != j) continue;
    num += s.prob[idx] * s.sim[idx];
    seen += s.prob[idx];
  }
  if (s.truncated) {
    num += (den - seen) * s.s_empty;  // skipped points all answer empty
  } else if (!(seen == den)) {
    throw InternalError("support sweep lost probability mass: saw " + seen.to_string() +
                        " of " + den.to_string());
  }
  return num / den;
}

}  // namespace

Rational nu(const ShapTask& task, Coalition j) {
  task.validate();
  SimSweep s = run_sweep(task);
  return nu_from_sweep(task, s, j);
}

Rational nu_bar(const ShapTask& task, Coalition j) {
  return -nu(task, full_coalition(task.num_params()) & ~j);
}

std::vector<Rational> nu_all(const ShapTask& task) {
  task.validate();
  const size_t ell = task.num_params();
  if (ell > task.bruteforce_limit) {
    throw BudgetError("utility table over " + std::to_string(ell) +
                      " parameters exceeds the limit of " +
                      std::to_string(task.bruteforce_limit));
  }
  SimSweep s = run_sweep(task);
  std::vector<Rational> out;
  out.reserve(size_t{1} << ell);
  for (Coalition j = 0; j < (Coalition{1} << ell); ++j) {
    out.push_back(nu_from_sweep(task, s, j));
  }
  return out;
}

Rational shapley_from_utility(size_t ell, const std::function<Rational(Coalition)>& utility,
                              int i) {
  if (ell == 0) throw ValidationError("no parameters to score");
  if (ell > 25) {
    throw BudgetError("coalition sum over " + std::to_string(ell) + " players is too large");
  }
  if (i < 1 || static_cast<size_t>(i) > ell) {
    throw ValidationError("player index " + std::to_string(i) + " out of range 1.." +
                          std::to_string(ell));
  }
  Rational out = 0;
  const Coalition all = full_coalition(ell);
  for (Coalition j = 0; j <= all; ++j) {
    if (coalition_has(j, i)) continue;
    Rational pi = pi_subset_prob(ell, static_cast<size_t>(coalition_size(j)));
    out += pi * (utility(coalition_add(j, i)) - utility(j));
  }
  return out;
}

Rational shap_bruteforce(const ShapTask& task, int i) {
  const std::vector<Rational> table = nu_all(task);
  return shapley_from_utility(task.num_params(),
                              [&](Coalition j) { return table[j]; }, i);
}

ShapResult shap_bruteforce_all(const ShapTask& task) {
  const std::vector<Rational> table = nu_all(task);
  const size_t ell = task.num_params();
  ShapResult res;
  res.method = "bruteforce";
  res.params = task.query.parameters;
  res.nu_empty = table.empty() ? Rational(0) : table.front();
  res.nu_full = table.empty() ? Rational(0) : table.back();
  Rational total = 0;
  for (size_t i = 1; i <= ell; ++i) {
    res.scores.push_back(shapley_from_utility(
        ell, [&](Coalition j) { return table[j]; }, static_cast<int>(i)));
    total += res.scores.back();
  }
  if (!(total == res.nu_full - res.nu_empty)) {
    throw InternalError("score total " + total.to_string() + " violates the efficiency "
                        "identity " + (res.nu_full - res.nu_empty).to_string());
  }
  return res;
}

ParamQuery intersection_query(const ParamQuery& q, const Tuple& ref) {
  if (!q.filters.empty()) {
    throw InternalError("intersection query requires materialized (filter-free) input");
  }
  if (!q.is_full()) {
    throw InternalError("intersection query requires a full query");
  }
  ParamQuery out = q;
  out.name = q.name + "_both";
  GroundQuery g = ground(q, ref);
  for (auto& atom : g.atoms) out.atoms.push_back(std::move(atom));
  out.validate();
  return out;
}

namespace {

struct FastContext {
  ParamQuery query;       // filter-free, possibly with membership atoms
  ParamQuery both;        // intersection query (when needed)
  Database db;
  bool need_both = false;
  bool need_count = false;
};

/// Expected similarity under `mix`, with additive constants omitted (they
/// cancel between the two polynomial families).
Rational raw_expected(const FastContext& ctx, const SimilarityFn& fn, const Distribution& mix) {
  switch (fn.tag) {
    case SimilarityFn::Tag::Count:
      return expected_count(ctx.query, ctx.db, mix);
    case SimilarityFn::Tag::Intersection:
    case SimilarityFn::Tag::NegDiff:
      return expected_count(ctx.both, ctx.db, mix);
    case SimilarityFn::Tag::NegSymDiff:
      return Rational(2) * expected_count(ctx.both, ctx.db, mix) -
             expected_count(ctx.query, ctx.db, mix);
    default:
      throw InternalError("raw_expected on a non-decomposable similarity");
  }
}

/// Additive constant completing raw_expected to the true expected
/// similarity; c0 = |Q_{p*}(D)|.
Rational esim_constant(const SimilarityFn& fn, const Rational& c0) {
  switch (fn.tag) {
    case SimilarityFn::Tag::Count:
    case SimilarityFn::Tag::Intersection:
      return Rational(0);
    case SimilarityFn::Tag::NegDiff:
      return -c0;
    case SimilarityFn::Tag::NegSymDiff:
      return -c0;
    default:
      throw InternalError("esim_constant on a non-decomposable similarity");
  }
}

/// Similarity of the reference result with itself, in counting terms.
Rational self_similarity(const SimilarityFn& fn, const Rational& c0) {
  switch (fn.tag) {
    case SimilarityFn::Tag::Count:
    case SimilarityFn::Tag::Intersection:
      return c0;
    case SimilarityFn::Tag::NegDiff:
    case SimilarityFn::Tag::NegSymDiff:
      return Rational(0);
    default:
      throw InternalError("self_similarity on a non-decomposable similarity");
  }
}

FastContext make_fast_context(const ShapTask& t) {
  FastContext ctx;
  if (t.query.filters.empty()) {
    ctx.query = t.query;
    ctx.db = t.database;
  } else {
    MaterializedFilterDb m = materialize_filters(t.query, t.database, t.dist,
                                                 t.filter_arity_max);
    ctx.query = std::move(m.query);
    ctx.db = std::move(m.db);
  }
  if (!is_p_acyclic(ctx.query)) {
    GyoResult gyo = gyo_reduce(query_hypergraph(ctx.query, true));
    std::string labels;
    for (const auto& l : gyo.remaining) {
      if (!labels.empty()) labels += ", ";
      labels += l;
    }
    throw ValidationError("query structure is cyclic after filter materialization; "
                          "irreducible: " + labels);
  }
  switch (t.fn.tag) {
    case SimilarityFn::Tag::Count:
      ctx.need_count = true;
      break;
    case SimilarityFn::Tag::Intersection:
    case SimilarityFn::Tag::NegDiff:
      ctx.need_both = true;
      break;
    case SimilarityFn::Tag::NegSymDiff:
      ctx.need_both = ctx.need_count = true;
      break;
    default:
      break;
  }
  if (ctx.need_both) ctx.both = intersection_query(ctx.query, t.reference);
  return ctx;
}

bool fast_path_applicable(const ShapTask& t) {
  if (!t.fn.counting_decomposable() || !t.query.is_full() || !t.dist.is_factorized()) {
    return false;
  }
  for (const auto& f : t.query.filters) {
    if (f.arity() > t.filter_arity_max) return false;
  }
  return true;
}

}  // namespace

bool exact_eligible(const ShapTask& task, std::string* reason) {
  auto refuse = [&](const std::string& why) {
    if (reason) *reason = why;
    return false;
  };
  if (!task.query.is_full()) return refuse("the query has quantified variables");
  if (!task.fn.counting_decomposable()) {
    return refuse("similarity '" + task.fn.name() + "' is not counting-decomposable");
  }
  if (!task.dist.is_factorized()) return refuse("the distribution is not factorized");
  for (const auto& f : task.query.filters) {
    if (f.arity() > task.filter_arity_max) {
      return refuse("filter " + to_text(f) + " has arity " + std::to_string(f.arity()) +
                    " above the limit of " + std::to_string(task.filter_arity_max));
    }
  }
  try {
    make_fast_context(task);
  } catch (const ValidationError& e) {
    return refuse(e.what());
  }
  return true;
}

Rational esim_enumerated(const ShapTask& task) {
  task.validate();
  SimSweep s = run_sweep(task);
  return nu_from_sweep(task, s, 0);
}

Rational esim(const ShapTask& task) {
  task.validate();
  if (fast_path_applicable(task)) {
    FastContext ctx = make_fast_context(task);
    Rational c0 = answer_count(ground(ctx.query, task.reference), ctx.db);
    return raw_expected(ctx, task.fn, task.dist) + esim_constant(task.fn, c0);
  }
  return esim_enumerated(task);
}

ShapResult shap_exact(const ShapTask& task, unsigned threads) {
  task.validate();
  if (!task.query.is_full()) {
    throw ValidationError("the exact pipeline requires a full query (every variable free)");
  }
  if (!task.fn.counting_decomposable()) {
    throw ValidationError("the exact pipeline requires a counting-decomposable similarity "
                          "(intersection, neg-sym-diff, neg-diff, or count); got " +
                          task.fn.name());
  }
  if (!task.dist.is_factorized()) {
    throw ValidationError("the exact pipeline requires a fully factorized distribution");
  }
  FastContext ctx = make_fast_context(task);  // also checks p-acyclicity
  const size_t ell = task.num_params();

  ShapResult res;
  res.method = "exact";
  res.params = task.query.parameters;
  res.scores.assign(ell, Rational(0));

  const Rational c0 = answer_count(ground(ctx.query, task.reference), ctx.db);
  res.nu_full = self_similarity(task.fn, c0);
  res.nu_empty = raw_expected(ctx, task.fn, task.dist) + esim_constant(task.fn, c0);
  if (ell == 0) return res;

  // Interpolation grid: points r/ℓ, basis q^k (1−q)^(ℓ−1−k).
  std::vector<Rational> points;
  for (size_t r = 1; r <= ell; ++r) {
    points.push_back(Rational(BigInt(static_cast<long>(r)), BigInt(static_cast<long>(ell))));
  }
  std::vector<std::vector<Rational>> basis(ell, std::vector<Rational>(ell));
  for (size_t r = 0; r < ell; ++r) {
    const Rational& p = points[r];
    const Rational one_minus = Rational(1) - p;
    Rational up = 1;
    std::vector<Rational> pk(ell), qk(ell);
    for (size_t k = 0; k < ell; ++k) {
      pk[k] = up;
      up *= p;
    }
    Rational down = 1;
    for (size_t k = 0; k < ell; ++k) {
      qk[k] = down;
      down *= one_minus;
    }
    for (size_t k = 0; k < ell; ++k) basis[r][k] = pk[k] * qk[ell - 1 - k];
  }
  std::vector<Rational> weights;  // k!(ℓ−1−k)!/ℓ!
  for (size_t k = 0; k < ell; ++k) weights.push_back(pi_subset_prob(ell, k));

  run_parallel(ell, threads, [&](size_t idx) {
    const int i = static_cast<int>(idx + 1);
    if (!ctx.query.param_occurs(i)) return;  // null player
    std::vector<Rational> strata[2];
    for (int b = 0; b <= 1; ++b) {
      std::vector<Rational> g;
      for (size_t r = 0; r < ell; ++r) {
        Distribution mix =
            mix_with_reference(task.dist, task.reference, points[r], {{i, b == 1}});
        g.push_back(raw_expected(ctx, task.fn, mix));
      }
      strata[b] = solve_linear_system(basis, std::move(g));
    }
    Rational score = 0;
    for (size_t k = 0; k < ell; ++k) {
      score += weights[k] * (strata[1][k] - strata[0][k]);
    }
    res.scores[idx] = std::move(score);
  });

  Rational total = 0;
  for (const auto& s : res.scores) total += s;
  if (!(total == res.nu_full - res.nu_empty)) {
    throw InternalError("score total " + total.to_string() +
                        " violates the efficiency identity " +
                        (res.nu_full - res.nu_empty).to_string());
  }
  return res;
}

uint64_t mc_sample_count(double epsilon, double delta, double range) {
  if (!(epsilon > 0) || !(delta > 0) || delta >= 1 || !(range > 0)) {
    throw ValidationError("sampling needs epsilon > 0, 0 < delta < 1, and a positive "
                          "similarity range");
  }
  double n = std::ceil((range * range) / (epsilon * epsilon) * std::log(2.0 / delta));
  if (!(n >= 1)) n = 1;
  if (n > 1e15) throw BudgetError("sample count " + std::to_string(n) + " is not practical");
  return static_cast<uint64_t>(n);
}

std::pair<double, uint64_t> shap_montecarlo(const ShapTask& task, int i, double epsilon,
                                            double delta, uint64_t seed,
                                            std::optional<std::pair<double, double>> bounds,
                                            unsigned threads) {
  task.validate();
  const size_t ell = task.num_params();
  if (ell == 0) throw ValidationError("no parameters to score");
  if (i < 1 || static_cast<size_t>(i) > ell) {
    throw ValidationError("parameter index " + std::to_string(i) + " out of range 1.." +
                          std::to_string(ell));
  }
  double range;
  if (bounds) {
    range = bounds->second - bounds->first;
  } else if (auto built_in = task.fn.bounds()) {
    range = built_in->second.to_double() - built_in->first.to_double();
  } else {
    throw ValidationError("similarity '" + task.fn.name() +
                          "' has no built-in value bounds; supply them explicitly");
  }
  const uint64_t n = mc_sample_count(epsilon, delta, range);
  const uint64_t chunks = (n + kMcChunkSize - 1) / kMcChunkSize;
  if (chunks >= (uint64_t{1} << 32)) throw BudgetError("too many sample chunks");

  const Relation t_ref = reference_result(task);

  // Work unit u covers side b = u/chunks (0 then 1) and chunk c = u%chunks;
  // the RNG stream is (b+1)·2^32 + c, so the estimate depends only on seed
  // and chunk size, never on the thread count.
  std::mutex sums_mu;
  Rational sum[2];
  run_parallel(static_cast<size_t>(2 * chunks), threads, [&](size_t u) {
    const int b = u < chunks ? 0 : 1;
    const uint64_t c = static_cast<uint64_t>(u % chunks);
    Rng rng(seed, (static_cast<uint64_t>(b + 1) << 32) + c);
    const uint64_t begin = c * kMcChunkSize;
    const uint64_t end = std::min(n, begin + kMcChunkSize);
    PerturbationDistribution pd;
    pd.base = &task.dist;
    pd.ref = task.reference;
    pd.index = i;
    pd.present = b == 1;
    Rational local = 0;
    for (uint64_t s = begin; s < end; ++s) {
      Tuple p = sample_perturbation(pd, rng);
      Relation t_p = evaluate(ground(task.query, p), task.database, task.row_budget);
      local += similarity(task.fn, t_p, t_ref);
    }
    std::lock_guard<std::mutex> lock(sums_mu);
    sum[b] += local;
  });

  Rational estimate = (sum[1] - sum[0]) / Rational(BigInt(static_cast<long>(n)));
  return {estimate.to_double(), n};
}

ShapResult shap_montecarlo_all(const ShapTask& task, double epsilon, double delta,
                               uint64_t seed, std::optional<std::pair<double, double>> bounds,
                               unsigned threads) {
  ShapResult res;
  res.method = "mc";
  res.params = task.query.parameters;
  res.epsilon = epsilon;
  res.delta = delta;
  res.seed = seed;
  for (size_t i = 1; i <= task.num_params(); ++i) {
    auto [est, n] = shap_montecarlo(task, static_cast<int>(i), epsilon, delta, seed, bounds,
                                    threads);
    res.estimates.push_back(est);
    res.samples_per_side = n;
  }
  return res;
}

}  // namespace paramshap
