#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "paramshap/distribution.hpp"
#include "paramshap/errors.hpp"
#include "paramshap/parser.hpp"

using namespace paramshap;
using namespace paramshap::testing;

namespace {

Distribution uniform_binary(size_t ell) {
  std::vector<std::vector<Value>> supports(ell, {Value::integer(0), Value::integer(1)});
  return Distribution::uniform_product(supports);
}

// Empirical law vs. exact probabilities at three standard deviations.
void check_sampler_against(const std::function<Tuple()>& draw,
                           const std::function<Rational(const Tuple&)>& exact_prob, int samples) {
  std::map<Tuple, int, TupleStorageLess> counts;
  for (int s = 0; s < samples; ++s) counts[draw()]++;
  for (const auto& [t, n] : counts) {
    double p = exact_prob(t).to_double();
    REQUIRE(p > 0.0);  // nothing off-support may ever be drawn
    double sigma = std::sqrt(p * (1 - p) * samples);
    // 4σ keeps the false-alarm rate negligible across the hundreds of
    // support points this helper is applied to; a wrong law still trips it.
    CHECK(std::abs(n - p * samples) <= 4 * sigma + 1);
  }
}

}  // namespace

TEST_SUITE_BEGIN("distribution");

TEST_CASE("coalition helpers") {
  Coalition j = 0;
  j = coalition_add(j, 1);
  j = coalition_add(j, 3);
  CHECK(coalition_has(j, 1));
  CHECK_FALSE(coalition_has(j, 2));
  CHECK(coalition_has(j, 3));
  CHECK(coalition_size(j) == 2);
  CHECK(coalition_drop(j, 3) == coalition_add(Coalition{0}, 1));
  CHECK(full_coalition(3) == 0b111);
  CHECK(coalition_text(j, 3) == "{1,3}");
  CHECK(coalition_text(0, 3) == "{}");
}

TEST_CASE("marginal validation") {
  CHECK_THROWS_AS(Distribution::make_factorized({{}}), ValidationError);  // empty marginal
  Marginal bad_mass = {{Value::integer(1), Rational(1, 2)}};
  CHECK_THROWS_AS(Distribution::make_factorized({bad_mass}), ValidationError);
  Marginal dup = {{Value::integer(1), Rational(1, 2)}, {Value::integer(1), Rational(1, 2)}};
  CHECK_THROWS_AS(Distribution::make_factorized({dup}), ValidationError);
  Marginal neg = {{Value::integer(1), Rational(3, 2)}, {Value::integer(2), Rational(-1, 2)}};
  CHECK_THROWS_AS(Distribution::make_factorized({neg}), ValidationError);
}

TEST_CASE("joint validation") {
  CHECK_THROWS_AS(Distribution::make_joint(1, {}), ValidationError);
  CHECK_THROWS_AS(Distribution::make_joint(2, {{int_tuple({1}), Rational(1)}}), ValidationError);
  CHECK_THROWS_AS(
      Distribution::make_joint(1, {{int_tuple({1}), Rational(1, 2)}}), ValidationError);
  CHECK_THROWS_AS(Distribution::make_joint(1, {{int_tuple({1}), Rational(1, 2)},
                                               {int_tuple({1}), Rational(1, 2)}}),
                  ValidationError);
}

TEST_CASE("probabilities, support, and enumeration agree") {
  Rng rng(404, 0);
  RandomTaskOptions opt;
  for (int round = 0; round < 25; ++round) {
    opt.joint = round % 2 == 1;
    ShapTask task = random_full_task(rng, opt);
    const Distribution& d = task.dist;
    CAPTURE(describe(task));

    Rational total = 0;
    BigInt seen = 0;
    d.for_each_support([&](const Tuple& t, const Rational& p) {
      total += p;
      seen += 1;
      CHECK(d.prob(t) == p);
      CHECK(d.in_support(t));
    });
    CHECK(total == Rational(1));
    CHECK(seen == d.support_size());

    // Off-support tuples have probability zero.
    Tuple off(task.num_params(), Value::integer(99));
    CHECK(d.prob(off) == Rational(0));
    CHECK_FALSE(d.in_support(off));
  }
}

TEST_CASE("agreement and conditional probabilities match direct sums") {
  Rng rng(405, 0);
  RandomTaskOptions opt;
  opt.max_params = 4;
  for (int round = 0; round < 20; ++round) {
    opt.joint = round % 2 == 0;
    ShapTask task = random_full_task(rng, opt);
    const Distribution& d = task.dist;
    const size_t ell = task.num_params();
    CAPTURE(describe(task));
    for (Coalition j = 0; j < (Coalition{1} << ell); ++j) {
      Rational mass = 0;
      d.for_each_support([&](const Tuple& t, const Rational& p) {
        if (agrees_on(t, task.reference, j)) mass += p;
      });
      CHECK(d.agreement_prob(j, task.reference) == mass);
      // Conditional probabilities renormalize exactly.
      if (mass.sign() > 0) {
        Rational cond_total = 0;
        d.for_each_support([&](const Tuple& t, const Rational& p) {
          if (!agrees_on(t, task.reference, j)) return;
          Rational c = d.conditional_prob(t, j, task.reference);
          CHECK(c == p / mass);
          cond_total += c;
        });
        CHECK(cond_total == Rational(1));
      }
    }
  }
}

TEST_CASE("marginal projection of a joint table") {
  Distribution d = Distribution::make_joint(
      2, {{int_tuple({1, 1}), Rational(1, 2)},
          {int_tuple({1, 2}), Rational(1, 4)},
          {int_tuple({2, 2}), Rational(1, 4)}});
  Marginal m0 = d.marginal_of(0);
  REQUIRE(m0.size() == 2);
  CHECK(m0[0].value == Value::integer(1));
  CHECK(m0[0].prob == Rational(3, 4));
  Marginal m1 = d.marginal_of(1);
  CHECK(m1[0].prob == Rational(1, 2));
  CHECK(m1[1].prob == Rational(1, 2));
}

TEST_CASE("subset weights sum to one over all coalitions avoiding a player") {
  for (size_t ell = 1; ell <= 6; ++ell) {
    Rational total = 0;
    for (Coalition j = 0; j < (Coalition{1} << (ell - 1)); ++j)
      total += pi_subset_prob(ell, static_cast<size_t>(coalition_size(j)));
    CHECK(total == Rational(1));
  }
  CHECK(pi_subset_prob(3, 0) == Rational(1, 3));
  CHECK(pi_subset_prob(3, 1) == Rational(1, 6));
  CHECK(pi_subset_prob(3, 2) == Rational(1, 3));
}

TEST_CASE("coalition sampling follows the subset weights") {
  Rng rng(500, 0);
  const size_t ell = 4;
  const int i = 2;
  const int samples = 40000;
  std::map<Coalition, int> counts;
  for (int s = 0; s < samples; ++s) counts[sample_coalition(rng, ell, i)]++;
  for (const auto& [j, n] : counts) {
    CHECK_FALSE(coalition_has(j, i));
    double p = pi_subset_prob(ell, static_cast<size_t>(coalition_size(j))).to_double();
    double sigma = std::sqrt(p * (1 - p) * samples);
    CHECK(std::abs(n - p * samples) <= 4 * sigma + 1);
  }
  CHECK(counts.size() == 8);  // all subsets of {1,3,4}
}

TEST_CASE("distribution sampling follows the law") {
  Rng rng(501, 0);
  SUBCASE("factorized") {
    Distribution d = Distribution::make_factorized(
        {{{Value::integer(1), Rational(1, 4)}, {Value::integer(2), Rational(3, 4)}},
         {{Value::integer(5), Rational(2, 3)}, {Value::integer(6), Rational(1, 3)}}});
    check_sampler_against([&] { return d.sample(rng); },
                          [&](const Tuple& t) { return d.prob(t); }, 20000);
  }
  SUBCASE("joint") {
    Distribution d = Distribution::make_joint(
        2, {{int_tuple({1, 1}), Rational(1, 2)},
            {int_tuple({1, 2}), Rational(1, 3)},
            {int_tuple({2, 2}), Rational(1, 6)}});
    check_sampler_against([&] { return d.sample(rng); },
                          [&](const Tuple& t) { return d.prob(t); }, 20000);
  }
}

TEST_CASE("conditioned sampling follows the conditional law") {
  Rng rng(502, 0);
  Distribution d = Distribution::make_joint(
      2, {{int_tuple({1, 1}), Rational(1, 2)},
          {int_tuple({1, 2}), Rational(1, 3)},
          {int_tuple({2, 2}), Rational(1, 6)}});
  Tuple ref = int_tuple({1, 2});
  Coalition j = coalition_add(0, 1);  // pin the first position to 1
  check_sampler_against([&] { return d.sample_conditioned(rng, j, ref); },
                        [&](const Tuple& t) { return d.conditional_prob(t, j, ref); }, 20000);
  // Conditioning on a zero-probability event is an error.
  Tuple bad = int_tuple({3, 1});
  CHECK_THROWS_AS(d.sample_conditioned(rng, j, bad), ValidationError);
  CHECK_THROWS_AS(d.conditional_prob(ref, j, bad), ValidationError);
}

TEST_CASE("perturbation probabilities sum to one and match the sampler") {
  Rng rng(503, 0);
  // A correlated joint base distribution stresses the conditioning.
  Distribution base = Distribution::make_joint(
      3, {{int_tuple({0, 0, 0}), Rational(1, 4)},
          {int_tuple({0, 1, 1}), Rational(1, 4)},
          {int_tuple({1, 0, 1}), Rational(1, 4)},
          {int_tuple({1, 1, 0}), Rational(1, 8)},
          {int_tuple({1, 1, 1}), Rational(1, 8)}});
  Tuple ref = int_tuple({1, 1, 1});
  for (int i = 1; i <= 3; ++i) {
    for (bool present : {false, true}) {
      CAPTURE(i);
      CAPTURE(present);
      PerturbationDistribution pd{&base, ref, i, present};
      Rational total = 0;
      base.for_each_support(
          [&](const Tuple& t, const Rational&) { total += perturbation_prob(pd, t); });
      CHECK(total == Rational(1));
      check_sampler_against([&] { return sample_perturbation(pd, rng); },
                            [&](const Tuple& t) { return perturbation_prob(pd, t); }, 30000);
    }
  }
}

TEST_CASE("factorized perturbation sampling matches its exact law") {
  Rng rng(504, 0);
  Distribution base = Distribution::make_factorized(
      {{{Value::integer(0), Rational(1, 3)}, {Value::integer(1), Rational(2, 3)}},
       {{Value::integer(0), Rational(1, 2)}, {Value::integer(1), Rational(1, 2)}},
       {{Value::integer(0), Rational(3, 4)}, {Value::integer(1), Rational(1, 4)}}});
  Tuple ref = int_tuple({1, 1, 1});
  for (int i = 1; i <= 3; ++i) {
    for (bool present : {false, true}) {
      CAPTURE(i);
      CAPTURE(present);
      PerturbationDistribution pd{&base, ref, i, present};
      Rational total = 0;
      base.for_each_support(
          [&](const Tuple& t, const Rational&) { total += perturbation_prob(pd, t); });
      CHECK(total == Rational(1));
      check_sampler_against([&] { return sample_perturbation(pd, rng); },
                            [&](const Tuple& t) { return perturbation_prob(pd, t); }, 30000);
    }
  }
}

TEST_CASE("reference blending: q = 0 and q = 1 are the endpoints") {
  Distribution base = uniform_binary(3);
  Tuple ref = int_tuple({1, 0, 1});
  Distribution at0 = mix_with_reference(base, ref, Rational(0), {});
  Distribution at1 = mix_with_reference(base, ref, Rational(1), {});
  base.for_each_support([&](const Tuple& t, const Rational& p) {
    CHECK(at0.prob(t) == p);
    CHECK(at1.prob(t) == (t == ref ? Rational(1) : Rational(0)));
  });
}

TEST_CASE("reference blending matches the per-coordinate formula") {
  Distribution base = Distribution::make_factorized(
      {{{Value::integer(0), Rational(1, 3)}, {Value::integer(1), Rational(2, 3)}},
       {{Value::integer(0), Rational(1, 4)}, {Value::integer(1), Rational(3, 4)}}});
  Tuple ref = int_tuple({1, 0});
  Rational qv(2, 5);
  Distribution mixed = mix_with_reference(base, ref, qv, {});
  // Coordinate law: q·[v = ref_j] + (1−q)·Γ_j(v).
  for (long v1 : {0, 1}) {
    for (long v2 : {0, 1}) {
      Tuple t = int_tuple({v1, v2});
      Rational p1 = (v1 == 1 ? qv : Rational(0)) + (Rational(1) - qv) * base.marginal_of(0)[static_cast<size_t>(v1)].prob;
      Rational p2 = (v2 == 0 ? qv : Rational(0)) + (Rational(1) - qv) * base.marginal_of(1)[static_cast<size_t>(v2)].prob;
      CHECK(mixed.prob(t) == p1 * p2);
    }
  }
  // Pinned coordinates ignore the blend: bit 1 is the point mass, bit 0 the
  // original marginal.
  Distribution pinned = mix_with_reference(base, ref, qv, {{1, true}, {2, false}});
  CHECK(pinned.prob(int_tuple({1, 0})) == Rational(1, 4));
  CHECK(pinned.prob(int_tuple({1, 1})) == Rational(3, 4));
  CHECK(pinned.prob(int_tuple({0, 0})) == Rational(0));
}

TEST_CASE("distribution files parse with typed values") {
  Database db = db_of({int_relation("R", 2, {{1, 2}})});
  ParamQuery q = parse_query("Q(x; $d) :- R(x, $d)");
  Distribution d = parse_distribution(
      R"({"type":"factorized","params":{"d":[{"value":"1","prob":"1/2"},{"value":2,"prob":"1/2"}]}})",
      q, db, "test");
  CHECK(d.is_factorized());
  CHECK(d.prob(int_tuple({1})) == Rational(1, 2));

  Distribution dj = parse_distribution(
      R"({"type":"joint","support":[{"tuple":[1],"prob":"1/3"},{"tuple":[2],"prob":"2/3"}]})", q,
      db, "test");
  CHECK(dj.prob(int_tuple({2})) == Rational(2, 3));

  // Unknown parameters, missing marginals, float probabilities: refused.
  CHECK_THROWS_AS(parse_distribution(
                      R"({"type":"factorized","params":{"zz":[{"value":1,"prob":"1"}]}})", q, db,
                      "test"),
                  ValidationError);
  CHECK_THROWS_AS(parse_distribution(R"({"type":"factorized","params":{}})", q, db, "test"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_distribution(
          R"({"type":"factorized","params":{"d":[{"value":1,"prob":0.5},{"value":2,"prob":0.5}]}})",
          q, db, "test"),
      ValidationError);
}

TEST_CASE("typed parameter tuples follow atom columns") {
  Database db = db_of({int_relation("R", 2, {{1, 2}})});
  ParamQuery q = parse_query("Q(x; $d, $f) :- R(x, $d), [x < $f]");
  Tuple t = type_parameter_tuple({"7", "1/2"}, q, db, "reference");
  CHECK(t[0] == Value::integer(7));
  CHECK(t[1] == Value::rational(Rational(1, 2)));
  // Filter-only parameters must be numeric.
  CHECK_THROWS_AS(type_parameter_tuple({"7", "abc"}, q, db, "reference"), ValidationError);
}

TEST_SUITE_END();
