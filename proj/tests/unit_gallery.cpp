#include <doctest.h>

#include "helpers.hpp"
#include "paramshap/errors.hpp"
#include "paramshap/gallery.hpp"
#include "paramshap/parser.hpp"

using namespace paramshap;
using namespace paramshap::testing;

namespace {

PosDnf random_formula(Rng& rng, size_t max_vars) {
  PosDnf phi;
  phi.num_vars = 1 + rng.below_u64(max_vars);
  size_t num_disjuncts = 1 + rng.below_u64(4);
  for (size_t d = 0; d < num_disjuncts; ++d) {
    std::set<size_t> vars;
    size_t want = std::min<size_t>(1 + rng.below_u64(3), phi.num_vars);
    while (vars.size() < want) vars.insert(1 + rng.below_u64(phi.num_vars));
    phi.disjuncts.push_back({vars.begin(), vars.end()});
  }
  phi.validate();
  return phi;
}

std::vector<bool> assignment_of(Coalition mask, size_t ell) {
  std::vector<bool> a(ell);
  for (size_t i = 0; i < ell; ++i) a[i] = coalition_has(mask, static_cast<int>(i + 1));
  return a;
}

}  // namespace

TEST_SUITE_BEGIN("gallery");

TEST_CASE("formula validation") {
  PosDnf none;
  none.num_vars = 2;
  CHECK_THROWS_AS(none.validate(), ValidationError);  // no disjuncts
  PosDnf empty_disjunct{2, {{}}};
  CHECK_THROWS_AS(empty_disjunct.validate(), ValidationError);
  PosDnf out_of_range{2, {{3}}};
  CHECK_THROWS_AS(out_of_range.validate(), ValidationError);
  PosDnf fine{2, {{1}, {1, 2}}};
  fine.validate();
}

TEST_CASE("satisfaction and counting by hand") {
  // (X1 ∧ X2) ∨ X3 over three variables: 5 of 8 assignments satisfy it.
  PosDnf phi{3, {{1, 2}, {3}}};
  CHECK(dnf_satisfied(phi, {true, true, false}));
  CHECK(dnf_satisfied(phi, {false, false, true}));
  CHECK_FALSE(dnf_satisfied(phi, {true, false, false}));
  CHECK(dnf_count_satisfying(phi) == 5);
  // A single one-variable disjunct: half the table.
  PosDnf half{4, {{2}}};
  CHECK(dnf_count_satisfying(half) == 8);
}

TEST_CASE("star-join instances realize the formula") {
  Rng rng(920, 0);
  for (int round = 0; round < 20; ++round) {
    PosDnf phi = random_formula(rng, 6);
    ShapTask task = gen_dnf_instance(phi);
    CAPTURE(phi.num_vars);
    const size_t ell = phi.num_vars;
    REQUIRE(task.num_params() == ell);
    // Exhaustive correspondence: the query holds at p iff p satisfies φ.
    for (Coalition mask = 0; mask < (Coalition{1} << ell); ++mask) {
      Tuple p;
      for (size_t i = 0; i < ell; ++i)
        p.push_back(Value::integer(coalition_has(mask, static_cast<int>(i + 1)) ? 1 : 0));
      bool holds = !evaluate_generic(ground(task.query, p), task.database).empty();
      CHECK(holds == dnf_satisfied(phi, assignment_of(mask, ell)));
    }
    // The satisfying-assignment count drops out of the expected similarity.
    CHECK(recover_dnf_count(esim(task), ell) == Rational(dnf_count_satisfying(phi)));
  }
}

TEST_CASE("inequality instances realize the formula") {
  Rng rng(921, 0);
  for (int round = 0; round < 20; ++round) {
    PosDnf phi = random_formula(rng, 6);
    ShapTask task = gen_ineq_instance(phi);
    const size_t ell = phi.num_vars;
    for (Coalition mask = 0; mask < (Coalition{1} << ell); ++mask) {
      Tuple p;
      for (size_t i = 0; i < ell; ++i)
        p.push_back(Value::integer(coalition_has(mask, static_cast<int>(i + 1)) ? 1 : 0));
      bool holds = !evaluate_generic(ground(task.query, p), task.database).empty();
      CHECK(holds == dnf_satisfied(phi, assignment_of(mask, ell)));
    }
    CHECK(recover_dnf_count(esim(task), ell) == Rational(dnf_count_satisfying(phi)));
  }
}

TEST_CASE("the two encodings score identically") {
  Rng rng(922, 0);
  for (int round = 0; round < 8; ++round) {
    PosDnf phi = random_formula(rng, 5);
    ShapTask star = gen_dnf_instance(phi);
    ShapTask ineq = gen_ineq_instance(phi);
    CAPTURE(phi.num_vars);
    ShapResult a = shap_bruteforce_all(star);
    ShapResult b = shap_bruteforce_all(ineq);
    CHECK(a.scores == b.scores);
    CHECK(a.scores == shap_oracle(star));
  }
}

TEST_CASE("a variable in every disjunct outranks one in a single narrow disjunct") {
  // φ = X1 ∨ (X1 ∧ X2): X2 never decides anything — its score is zero.
  PosDnf phi{2, {{1}, {1, 2}}};
  ShapTask task = gen_dnf_instance(phi);
  ShapResult res = shap_bruteforce_all(task);
  CHECK(res.scores[1] == Rational(0));
  CHECK(res.scores[0] != Rational(0));
}

TEST_CASE("cover instances make covering coalitions win") {
  Rng rng(923, 0);
  for (int round = 0; round < 15; ++round) {
    const size_t m = 1 + rng.below_u64(4);  // elements
    const size_t n = 1 + rng.below_u64(4);  // sets
    std::vector<std::vector<size_t>> sets(n);
    for (size_t e = 1; e <= m; ++e)
      sets[rng.below_u64(n)].push_back(e);  // guarantee full coverage
    for (size_t s = 0; s < n; ++s)
      for (size_t e = 1; e <= m; ++e)
        if (rng.below_u64(3) == 0 &&
            std::find(sets[s].begin(), sets[s].end(), e) == sets[s].end())
          sets[s].push_back(e);

    WhyNotInstance inst = gen_setcover_instance(m, sets);
    const size_t players = inst.num_filters();
    REQUIRE(players == n);
    for (Coalition j = 0; j < (Coalition{1} << players); ++j) {
      bool covers = coalition_covers(sets, j, m);
      CHECK(nu_qual(inst, j) == (covers ? Rational(1) : Rational(0)));
    }
    // Scores against the cover game scored by permutations.
    std::vector<Rational> game;
    for (Coalition j = 0; j < (Coalition{1} << players); ++j)
      game.push_back(coalition_covers(sets, j, m) ? Rational(1) : Rational(0));
    CHECK(whynot_shapley_bruteforce(inst, WhyNotUtility::Qual) ==
          shapley_by_permutations(players, game));
  }
}

TEST_CASE("uncovered elements are refused up front") {
  // Element 2 is in no set: the empty-tuple answer would exist even with
  // every filter active, so there is no absence to explain.
  CHECK_THROWS_WITH_AS(gen_setcover_instance(2, {{1}}), doctest::Contains("2"),
                       ValidationError);
}

TEST_CASE("generator scale caps") {
  PosDnf big;
  big.num_vars = 13;
  big.disjuncts = {{1}};
  CHECK_THROWS_AS(gen_dnf_instance(big), ValidationError);
  CHECK_THROWS_AS(gen_ineq_instance(big), ValidationError);
  std::vector<std::vector<size_t>> sets(13, std::vector<size_t>{1});
  CHECK_THROWS_AS(gen_setcover_instance(1, sets), ValidationError);

  PosDnf wide;
  wide.num_vars = 21;
  wide.disjuncts = {{1}};
  // Counting past the truth-table limit is a resource refusal, not a
  // malformed input.
  CHECK_THROWS_AS(dnf_count_satisfying(wide), BudgetError);
}

TEST_SUITE_END();
