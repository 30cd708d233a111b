#include "paramshap/distribution.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "paramshap/errors.hpp"

namespace paramshap {

std::string coalition_text(Coalition j, size_t ell) {
  std::string out = "{";
  bool first = true;
  for (size_t i = 1; i <= ell; ++i) {
    if (!coalition_has(j, static_cast<int>(i))) continue;
    if (!first) out += ",";
    first = false;
    out += std::to_string(i);
  }
  return out + "}";
}

namespace {

void validate_marginal(const Marginal& m, const std::string& where) {
  if (m.empty()) throw ValidationError(where + ": empty marginal");
  Rational total = 0;
  std::set<Value, ValueStorageLess> seen;
  for (const auto& e : m) {
    if (e.prob.sign() <= 0) {
      throw ValidationError(where + ": probability of value " + e.value.to_string() +
                            " must be positive, got " + e.prob.to_string());
    }
    if (!seen.insert(e.value).second) {
      throw ValidationError(where + ": duplicate value " + e.value.to_string());
    }
    total += e.prob;
  }
  if (!(total == Rational(1))) {
    throw ValidationError(where + ": probabilities sum to " + total.to_string() + ", not 1");
  }
}

Rational marginal_prob(const Marginal& m, const Value& v) {
  for (const auto& e : m) {
    if (e.value == v) return e.prob;
  }
  return Rational(0);
}

}  // namespace

Distribution Distribution::make_factorized(std::vector<Marginal> marginals) {
  for (size_t j = 0; j < marginals.size(); ++j) {
    validate_marginal(marginals[j], "marginal of parameter position " + std::to_string(j + 1));
  }
  Distribution d;
  d.kind_ = Kind::Factorized;
  d.arity_ = marginals.size();
  d.marginals_ = std::move(marginals);
  return d;
}

Distribution Distribution::make_joint(size_t arity,
                                      std::vector<std::pair<Tuple, Rational>> points) {
  if (points.empty()) throw ValidationError("joint distribution: empty support");
  Rational total = 0;
  std::set<Tuple, TupleStorageLess> seen;
  for (const auto& [t, p] : points) {
    if (t.size() != arity) {
      throw ValidationError("joint distribution: support tuple " + tuple_to_string(t) +
                            " has arity " + std::to_string(t.size()) + ", expected " +
                            std::to_string(arity));
    }
    if (p.sign() <= 0) {
      throw ValidationError("joint distribution: probability of " + tuple_to_string(t) +
                            " must be positive, got " + p.to_string());
    }
    if (!seen.insert(t).second) {
      throw ValidationError("joint distribution: duplicate support tuple " + tuple_to_string(t));
    }
    total += p;
  }
  if (!(total == Rational(1))) {
    throw ValidationError("joint distribution: probabilities sum to " + total.to_string() +
                          ", not 1");
  }
  Distribution d;
  d.kind_ = Kind::Joint;
  d.arity_ = arity;
  d.points_ = std::move(points);
  return d;
}

Distribution Distribution::point_mass(const Tuple& p) {
  std::vector<Marginal> ms;
  for (const auto& v : p) ms.push_back(Marginal{{v, Rational(1)}});
  return make_factorized(std::move(ms));
}

Distribution Distribution::uniform_product(const std::vector<std::vector<Value>>& supports) {
  std::vector<Marginal> ms;
  for (const auto& vals : supports) {
    if (vals.empty()) throw ValidationError("uniform marginal over an empty value list");
    Marginal m;
    Rational w(BigInt(1), BigInt(static_cast<long>(vals.size())));
    for (const auto& v : vals) m.push_back({v, w});
    ms.push_back(std::move(m));
  }
  return make_factorized(std::move(ms));
}

const std::vector<Marginal>& Distribution::marginals() const {
  if (kind_ != Kind::Factorized) {
    throw InternalError("marginals() called on a joint-table distribution");
  }
  return marginals_;
}

const std::vector<std::pair<Tuple, Rational>>& Distribution::points() const {
  if (kind_ != Kind::Joint) {
    throw InternalError("points() called on a factorized distribution");
  }
  return points_;
}

Marginal Distribution::marginal_of(size_t pos) const {
  if (pos >= arity_) throw InternalError("marginal_of: position out of range");
  if (kind_ == Kind::Factorized) return marginals_[pos];
  std::map<Value, Rational, ValueStorageLess> acc;
  for (const auto& [t, p] : points_) acc[t[pos]] += p;
  Marginal m;
  for (auto& [v, p] : acc) m.push_back({v, p});
  return m;
}

Rational Distribution::prob(const Tuple& p) const {
  if (p.size() != arity_) {
    throw ValidationError("distribution over " + std::to_string(arity_) +
                          " parameters asked about a tuple of arity " +
                          std::to_string(p.size()));
  }
  if (kind_ == Kind::Factorized) {
    Rational out = 1;
    for (size_t j = 0; j < arity_; ++j) {
      Rational m = marginal_prob(marginals_[j], p[j]);
      if (m.is_zero()) return Rational(0);
      out *= m;
    }
    return out;
  }
  for (const auto& [t, pr] : points_) {
    if (t == p) return pr;
  }
  return Rational(0);
}

Rational Distribution::agreement_prob(Coalition j, const Tuple& ref) const {
  if (kind_ == Kind::Factorized) {
    Rational out = 1;
    for (size_t pos = 1; pos <= arity_; ++pos) {
      if (!coalition_has(j, static_cast<int>(pos))) continue;
      Rational m = marginal_prob(marginals_[pos - 1], ref[pos - 1]);
      if (m.is_zero()) return Rational(0);
      out *= m;
    }
    return out;
  }
  Rational out = 0;
  for (const auto& [t, pr] : points_) {
    bool agrees = true;
    for (size_t pos = 1; pos <= arity_ && agrees; ++pos) {
      if (coalition_has(j, static_cast<int>(pos)) && !(t[pos - 1] == ref[pos - 1])) {
        agrees = false;
      }
    }
    if (agrees) out += pr;
  }
  return out;
}

Rational Distribution::conditional_prob(const Tuple& p, Coalition j, const Tuple& ref) const {
  Rational mass = agreement_prob(j, ref);
  if (mass.is_zero()) {
    throw ValidationError("conditioning on a zero-probability event: agreement with " +
                          tuple_to_string(ref) + " on " + coalition_text(j, arity_));
  }
  for (size_t pos = 1; pos <= arity_; ++pos) {
    if (coalition_has(j, static_cast<int>(pos)) && !(p[pos - 1] == ref[pos - 1])) {
      return Rational(0);
    }
  }
  if (kind_ == Kind::Factorized) {
    Rational out = 1;
    for (size_t pos = 1; pos <= arity_; ++pos) {
      if (coalition_has(j, static_cast<int>(pos))) continue;
      Rational m = marginal_prob(marginals_[pos - 1], p[pos - 1]);
      if (m.is_zero()) return Rational(0);
      out *= m;
    }
    return out;
  }
  return prob(p) / mass;
}

BigInt Distribution::support_size() const {
  if (kind_ == Kind::Joint) return BigInt(static_cast<long>(points_.size()));
  BigInt out = 1;
  for (const auto& m : marginals_) out *= BigInt(static_cast<long>(m.size()));
  return out;
}

void Distribution::for_each_support(
    const std::function<void(const Tuple&, const Rational&)>& fn) const {
  if (kind_ == Kind::Joint) {
    for (const auto& [t, p] : points_) fn(t, p);
    return;
  }
  if (arity_ == 0) {
    fn(Tuple{}, Rational(1));
    return;
  }
  Tuple cur(arity_, Value::integer(0));
  std::vector<size_t> idx(arity_, 0);
  size_t pos = 0;
  // Odometer over marginal entries, last position fastest.
  while (true) {
    if (pos == arity_) {
      Rational p = 1;
      for (size_t t = 0; t < arity_; ++t) p *= marginals_[t][idx[t]].prob;
      fn(cur, p);
      --pos;
      ++idx[pos];
    } else if (idx[pos] < marginals_[pos].size()) {
      cur[pos] = marginals_[pos][idx[pos]].value;
      ++pos;
      if (pos < arity_) idx[pos] = 0;
    } else {
      if (pos == 0) break;
      --pos;
      ++idx[pos];
    }
  }
}

namespace {

/// Uniform index draw weighted by rational probabilities, exact: everything
/// is scaled to a common denominator and an integer below the total is drawn.
size_t sample_weighted(Rng& rng, const std::vector<Rational>& weights) {
  if (weights.empty()) throw InternalError("sample_weighted: no weights");
  BigInt denom = 1;
  for (const auto& w : weights) {
    mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(), w.denominator().get_mpz_t());
  }
  std::vector<BigInt> scaled;
  BigInt total = 0;
  for (const auto& w : weights) {
    BigInt n = w.numerator() * (denom / w.denominator());
    total += n;
    scaled.push_back(std::move(n));
  }
  if (total <= 0) throw InternalError("sample_weighted: non-positive total weight");
  BigInt r = rng.below(total);
  for (size_t i = 0; i < scaled.size(); ++i) {
    r -= scaled[i];
    if (r < 0) return i;
  }
  throw InternalError("sample_weighted: draw exceeded total weight");
}

size_t sample_marginal(Rng& rng, const Marginal& m) {
  std::vector<Rational> w;
  w.reserve(m.size());
  for (const auto& e : m) w.push_back(e.prob);
  return sample_weighted(rng, w);
}

}  // namespace

Tuple Distribution::sample(Rng& rng) const {
  return sample_conditioned(rng, 0, Tuple(arity_, Value::integer(0)));
}

Tuple Distribution::sample_conditioned(Rng& rng, Coalition j, const Tuple& ref) const {
  if (kind_ == Kind::Factorized) {
    Tuple out;
    out.reserve(arity_);
    for (size_t pos = 1; pos <= arity_; ++pos) {
      const Marginal& m = marginals_[pos - 1];
      if (coalition_has(j, static_cast<int>(pos))) {
        if (marginal_prob(m, ref[pos - 1]).is_zero()) {
          throw ValidationError("conditioning on a zero-probability event: value " +
                                ref[pos - 1].to_string() + " at parameter position " +
                                std::to_string(pos) + " is outside the support");
        }
        out.push_back(ref[pos - 1]);
      } else {
        out.push_back(m[sample_marginal(rng, m)].value);
      }
    }
    return out;
  }
  std::vector<size_t> candidates;
  std::vector<Rational> weights;
  for (size_t idx = 0; idx < points_.size(); ++idx) {
    const Tuple& t = points_[idx].first;
    bool agrees = true;
    for (size_t pos = 1; pos <= arity_ && agrees; ++pos) {
      if (coalition_has(j, static_cast<int>(pos)) && !(t[pos - 1] == ref[pos - 1])) {
        agrees = false;
      }
    }
    if (agrees) {
      candidates.push_back(idx);
      weights.push_back(points_[idx].second);
    }
  }
  if (candidates.empty()) {
    throw ValidationError("conditioning on a zero-probability event: no support tuple agrees "
                          "with " + tuple_to_string(ref) + " on " + coalition_text(j, arity_));
  }
  return points_[candidates[sample_weighted(rng, weights)]].first;
}

Rational pi_subset_prob(size_t ell, size_t k) {
  if (ell == 0) throw ValidationError("coalition weights need at least one parameter");
  if (k > ell - 1) {
    throw ValidationError("coalition size " + std::to_string(k) + " out of range for " +
                          std::to_string(ell) + " parameters");
  }
  BigInt denom = BigInt(static_cast<long>(ell)) * binomial(ell - 1, k);
  return Rational(BigInt(1), denom);
}

Coalition sample_coalition(Rng& rng, size_t ell, int i) {
  if (ell == 0 || ell > 63) {
    throw ValidationError("coalition sampling supports 1 to 63 parameters, got " +
                          std::to_string(ell));
  }
  if (i < 1 || static_cast<size_t>(i) > ell) {
    throw InternalError("sample_coalition: pinned index out of range");
  }
  uint64_t k = rng.below_u64(ell);  // uniform size 0 .. ell-1
  std::vector<int> pool;
  pool.reserve(ell - 1);
  for (size_t pos = 1; pos <= ell; ++pos) {
    if (static_cast<int>(pos) != i) pool.push_back(static_cast<int>(pos));
  }
  Coalition out = 0;
  for (uint64_t t = 0; t < k; ++t) {
    uint64_t pick = t + rng.below_u64(pool.size() - t);
    std::swap(pool[t], pool[pick]);
    out = coalition_add(out, pool[t]);
  }
  return out;
}

Tuple sample_perturbation(const PerturbationDistribution& pd, Rng& rng) {
  if (!pd.base) throw InternalError("sample_perturbation: no base distribution");
  const size_t ell = pd.base->num_params();
  Coalition j = sample_coalition(rng, ell, pd.index);
  if (pd.present) j = coalition_add(j, pd.index);
  return pd.base->sample_conditioned(rng, j, pd.ref);
}

Rational perturbation_prob(const PerturbationDistribution& pd, const Tuple& p) {
  if (!pd.base) throw InternalError("perturbation_prob: no base distribution");
  const size_t ell = pd.base->num_params();
  if (ell > 20) throw BudgetError("perturbation_prob enumerates 2^(ell-1) coalitions; ell = " +
                                  std::to_string(ell) + " exceeds the limit of 20");
  std::vector<int> pool;
  for (size_t pos = 1; pos <= ell; ++pos) {
    if (static_cast<int>(pos) != pd.index) pool.push_back(static_cast<int>(pos));
  }
  Rational out = 0;
  for (uint64_t mask = 0; mask < (uint64_t{1} << pool.size()); ++mask) {
    Coalition j = 0;
    for (size_t t = 0; t < pool.size(); ++t) {
      if ((mask >> t) & 1u) j = coalition_add(j, pool[t]);
    }
    Rational pi = pi_subset_prob(ell, static_cast<size_t>(coalition_size(j)));
    Coalition cond = pd.present ? coalition_add(j, pd.index) : j;
    out += pi * pd.base->conditional_prob(p, cond, pd.ref);
  }
  return out;
}

Distribution mix_with_reference(const Distribution& g, const Tuple& ref, const Rational& q,
                                const std::map<int, bool>& pinned) {
  if (!g.is_factorized()) {
    throw ValidationError("reference mixing requires a fully factorized distribution");
  }
  if (q.sign() < 0 || q > Rational(1)) {
    throw ValidationError("mixing weight must lie in [0, 1], got " + q.to_string());
  }
  if (!g.in_support(ref)) {
    throw ValidationError("reference tuple " + tuple_to_string(ref) +
                          " has probability 0 under the distribution");
  }
  std::vector<Marginal> out;
  for (size_t pos = 1; pos <= g.num_params(); ++pos) {
    const Marginal& base = g.marginals()[pos - 1];
    auto pin = pinned.find(static_cast<int>(pos));
    if (pin != pinned.end()) {
      if (pin->second) {
        out.push_back(Marginal{{ref[pos - 1], Rational(1)}});
      } else {
        out.push_back(base);
      }
      continue;
    }
    Marginal m;
    Rational keep = Rational(1) - q;
    for (const auto& e : base) {
      Rational w = keep * e.prob;
      if (e.value == ref[pos - 1]) w += q;
      if (w.sign() > 0) m.push_back({e.value, w});
    }
    out.push_back(std::move(m));
  }
  return Distribution::make_factorized(std::move(out));
}

namespace {

bool param_in_filter_expr(const ParamQuery& q, const std::string& pname) {
  for (const auto& f : q.filters) {
    for (const auto& side : {&f.lhs, &f.rhs}) {
      for (const auto& e : side->entries) {
        if (e.ref.kind == Term::Kind::Parameter && e.ref.name == pname) return true;
      }
    }
  }
  return false;
}

bool param_is_gate(const ParamQuery& q, const std::string& pname) {
  for (const auto& f : q.filters) {
    if (f.gate && f.gate->name == pname) return true;
  }
  return false;
}

/// Lexical parse + kind coercion for one parameter value.
Value type_param_value(Value parsed, const ParamQuery& q, const Database& db,
                       const std::string& pname, const std::string& where) {
  std::optional<ValueKind> target = param_atom_kind(q, db, pname);
  Value v = std::move(parsed);
  if (target) {
    auto coerced = v.coerce(*target);
    if (!coerced) {
      throw ValidationError(where + ": value " + v.to_string() + " for parameter '$" + pname +
                            "' does not fit the " + kind_name(*target) +
                            " column where the parameter occurs");
    }
    v = std::move(*coerced);
  }
  if (param_is_gate(q, pname)) {
    bool ok = v.kind() == ValueKind::Boolean ||
              (v.is_numeric() && (v.as_rational() == Rational(0) || v.as_rational() == Rational(1)));
    if (!ok) {
      throw ValidationError(where + ": gate parameter '$" + pname + "' must be 0, 1, true, or "
                            "false, got " + v.to_string());
    }
  } else if (param_in_filter_expr(q, pname) && !v.is_numeric()) {
    throw ValidationError(where + ": parameter '$" + pname +
                          "' occurs in a filter and needs a numeric value, got " + v.to_string());
  }
  return v;
}

Value json_to_value(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) return Value::parse_lexical(j.get<std::string>());
  if (j.is_number_integer()) return Value::integer(BigInt(static_cast<long>(j.get<int64_t>())));
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  throw ValidationError(where + ": values must be strings, integers, or booleans, got " +
                        j.dump());
}

Rational json_to_prob(const nlohmann::json& j, const std::string& where) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational(static_cast<long>(j.get<int64_t>()));
  throw ValidationError(where + ": probabilities must be rational strings 'a/b' or integers, "
                        "got " + j.dump());
}

}  // namespace

Distribution parse_distribution(const std::string& json_text, const ParamQuery& q,
                                const Database& db, const std::string& where) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(where + ": invalid JSON: " + e.what());
  }
  if (!root.is_object() || !root.contains("type") || !root["type"].is_string()) {
    throw ValidationError(where + ": expected an object with a \"type\" field");
  }
  const std::string type = root["type"].get<std::string>();
  const size_t ell = q.parameters.size();
  if (type == "factorized") {
    if (!root.contains("params") || !root["params"].is_object()) {
      throw ValidationError(where + ": factorized distribution needs a \"params\" object");
    }
    const auto& params = root["params"];
    for (const auto& [key, unused] : params.items()) {
      (void)unused;
      if (q.param_index(key) == 0) {
        throw ValidationError(where + ": distribution mentions unknown parameter '" + key + "'");
      }
    }
    std::vector<Marginal> ms;
    for (const auto& pname : q.parameters) {
      if (!params.contains(pname)) {
        throw ValidationError(where + ": no marginal for parameter '$" + pname + "'");
      }
      const auto& list = params[pname];
      if (!list.is_array()) {
        throw ValidationError(where + ": marginal of '$" + pname + "' must be an array");
      }
      Marginal m;
      for (const auto& entry : list) {
        if (!entry.is_object() || !entry.contains("value") || !entry.contains("prob")) {
          throw ValidationError(where + ": marginal entries of '$" + pname +
                                "' need \"value\" and \"prob\" fields");
        }
        Value v = type_param_value(json_to_value(entry["value"], where), q, db, pname, where);
        m.push_back({std::move(v), json_to_prob(entry["prob"], where)});
      }
      ms.push_back(std::move(m));
    }
    try {
      return Distribution::make_factorized(std::move(ms));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (type == "joint") {
    if (!root.contains("support") || !root["support"].is_array()) {
      throw ValidationError(where + ": joint distribution needs a \"support\" array");
    }
    std::vector<std::pair<Tuple, Rational>> pts;
    for (const auto& entry : root["support"]) {
      if (!entry.is_object() || !entry.contains("tuple") || !entry.contains("prob") ||
          !entry["tuple"].is_array()) {
        throw ValidationError(where + ": support entries need a \"tuple\" array and a \"prob\"");
      }
      const auto& tup = entry["tuple"];
      if (tup.size() != ell) {
        throw ValidationError(where + ": support tuple has arity " +
                              std::to_string(tup.size()) + ", expected " + std::to_string(ell));
      }
      Tuple t;
      for (size_t pos = 0; pos < ell; ++pos) {
        t.push_back(type_param_value(json_to_value(tup[pos], where), q, db,
                                     q.parameters[pos], where));
      }
      pts.push_back({std::move(t), json_to_prob(entry["prob"], where)});
    }
    try {
      return Distribution::make_joint(ell, std::move(pts));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  throw ValidationError(where + ": unknown distribution type '" + type +
                        "' (expected \"factorized\" or \"joint\")");
}

Distribution load_distribution(const std::string& path, const ParamQuery& q,
                               const Database& db) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open distribution file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_distribution(buf.str(), q, db, path);
}

Tuple type_parameter_tuple(const std::vector<std::string>& raw, const ParamQuery& q,
                           const Database& db, const std::string& what) {
  if (raw.size() != q.parameters.size()) {
    throw ValidationError(what + " has " + std::to_string(raw.size()) + " values but the query "
                          "declares " + std::to_string(q.parameters.size()) + " parameters");
  }
  Tuple out;
  for (size_t pos = 0; pos < raw.size(); ++pos) {
    out.push_back(type_param_value(Value::parse_lexical(raw[pos]), q, db, q.parameters[pos],
                                   what));
  }
  return out;
}

}  // namespace paramshap
