#include <doctest.h>

#include "helpers.hpp"
#include "paramshap/errors.hpp"
#include "paramshap/similarity.hpp"

using namespace paramshap;
using namespace paramshap::testing;

namespace {

Relation rel(const std::vector<std::vector<long>>& rows) {
  return int_relation("T", rows.empty() ? 1 : rows[0].size(), rows);
}

Relation empty1() { return int_relation("T", 1, {}); }

}  // namespace

TEST_SUITE_BEGIN("similarity");

TEST_CASE("set overlap and difference counts") {
  Relation t1 = rel({{1}, {2}, {3}});
  Relation t2 = rel({{2}, {3}, {4}, {5}});
  CHECK(intersection_size(t1, t2) == 2);
  CHECK(similarity(SimilarityFn::jaccard(), t1, t2) == Rational(2, 5));
  CHECK(similarity(SimilarityFn::intersection(), t1, t2) == Rational(2));
  CHECK(similarity(SimilarityFn::neg_sym_diff(), t1, t2) == Rational(-3));
  CHECK(similarity(SimilarityFn::neg_sym_cdiff(), t1, t2) == Rational(-1));
  CHECK(similarity(SimilarityFn::neg_diff(), t1, t2) == Rational(-2));
  CHECK(similarity(SimilarityFn::count(), t1, t2) == Rational(3));
}

TEST_CASE("empty arguments") {
  Relation e = empty1(), t = rel({{1}, {2}});
  CHECK(similarity(SimilarityFn::jaccard(), e, e) == Rational(0));  // pinned convention
  CHECK(similarity(SimilarityFn::jaccard(), e, t) == Rational(0));
  CHECK(similarity(SimilarityFn::jaccard(), t, e) == Rational(0));
  CHECK(similarity(SimilarityFn::intersection(), e, t) == Rational(0));
  CHECK(similarity(SimilarityFn::neg_sym_diff(), e, t) == Rational(-2));
  CHECK(similarity(SimilarityFn::neg_sym_cdiff(), e, t) == Rational(-2));
  CHECK(similarity(SimilarityFn::neg_diff(), e, t) == Rational(-2));
  CHECK(similarity(SimilarityFn::neg_diff(), t, e) == Rational(0));
  CHECK(similarity(SimilarityFn::count(), e, t) == Rational(0));
}

TEST_CASE("identity-of-argument identities on random pairs") {
  Rng rng(72, 0);
  for (int round = 0; round < 40; ++round) {
    std::vector<std::vector<long>> rows1, rows2;
    size_t n1 = rng.below_u64(6), n2 = rng.below_u64(6);
    for (size_t i = 0; i < n1; ++i) rows1.push_back({static_cast<long>(rng.below_u64(8))});
    for (size_t i = 0; i < n2; ++i) rows2.push_back({static_cast<long>(rng.below_u64(8))});
    Relation t1 = rel(rows1.empty() ? std::vector<std::vector<long>>{} : rows1);
    Relation t2 = rel(rows2.empty() ? std::vector<std::vector<long>>{} : rows2);
    if (rows1.empty()) t1 = empty1();
    if (rows2.empty()) t2 = empty1();

    Rational inter(BigInt(intersection_size(t1, t2)));
    Rational c1(BigInt(static_cast<long>(t1.size()))), c2(BigInt(static_cast<long>(t2.size())));
    // Definitional identities relating the counting family.
    CHECK(similarity(SimilarityFn::neg_diff(), t1, t2) == inter - c2);
    CHECK(similarity(SimilarityFn::neg_sym_diff(), t1, t2) == 2 * inter - c1 - c2);
    CHECK(similarity(SimilarityFn::neg_sym_cdiff(), t1, t2) == -(c1 - c2).abs());
    CHECK(similarity(SimilarityFn::count(), t1, t2) == c1);
    // Symmetry where it is promised.
    CHECK(similarity(SimilarityFn::jaccard(), t1, t2) ==
          similarity(SimilarityFn::jaccard(), t2, t1));
    CHECK(similarity(SimilarityFn::neg_sym_diff(), t1, t2) ==
          similarity(SimilarityFn::neg_sym_diff(), t2, t1));
    // Jaccard stays within its bounds.
    Rational jac = similarity(SimilarityFn::jaccard(), t1, t2);
    CHECK(jac >= Rational(0));
    CHECK(jac <= Rational(1));
    // Self-similarity values.
    CHECK(similarity(SimilarityFn::neg_sym_diff(), t1, t1) == Rational(0));
    CHECK(similarity(SimilarityFn::neg_diff(), t1, t1) == Rational(0));
    if (!t1.empty()) CHECK(similarity(SimilarityFn::jaccard(), t1, t1) == Rational(1));
  }
}

TEST_CASE("minimum-gap distance on named columns") {
  RelationSchema s("T", {{"dep", ValueKind::Integer}, {"arr", ValueKind::Integer}});
  Relation t1(s), t2(s);
  t1.insert(int_tuple({3, 10}));  // gap 7
  t1.insert(int_tuple({5, 9}));   // gap 4  <- minimum
  t2.insert(int_tuple({1, 11}));  // gap 10 <- minimum
  t2.insert(int_tuple({2, 13}));  // gap 11
  // min over T1 of arr−dep is 4, over T2 is 10; distance −|4−10| = −6.
  CHECK(similarity(SimilarityFn::min_diff("arr", "dep"), t1, t2) == Rational(-6));
  CHECK(similarity(SimilarityFn::min_diff("arr", "dep"), t1, t1) == Rational(0));
  // Undefined on empty arguments and on unknown columns.
  Relation e(s);
  CHECK_THROWS_AS(similarity(SimilarityFn::min_diff("arr", "dep"), e, t2), ValidationError);
  CHECK_THROWS_AS(similarity(SimilarityFn::min_diff("zz", "dep"), t1, t2), ValidationError);
}

TEST_CASE("mismatched layouts are refused") {
  Relation t1 = int_relation("A", 1, {{1}});
  Relation t2 = int_relation("B", 2, {{1, 2}});
  CHECK_THROWS_AS(similarity(SimilarityFn::jaccard(), t1, t2), ValidationError);
  // Same arity, different kinds.
  Relation s(RelationSchema("C", {{"x", ValueKind::String}}));
  s.insert({Value::string("a")});
  CHECK_THROWS_AS(similarity(SimilarityFn::jaccard(), t1, s), ValidationError);
}

TEST_CASE("name parsing round-trips") {
  for (const char* name : {"jaccard", "intersection", "neg-sym-diff", "neg-sym-cdiff", "neg-diff",
                           "count", "min-diff:arr:dep"}) {
    SimilarityFn fn = SimilarityFn::parse(name);
    CHECK(fn.name() == name);
  }
  CHECK(SimilarityFn::parse("min-diff:a:b").col_a == "a");
  CHECK_THROWS_AS(SimilarityFn::parse("euclid"), ValidationError);
  CHECK_THROWS_AS(SimilarityFn::parse("min-diff"), ValidationError);
}

TEST_CASE("structural traits") {
  CHECK(SimilarityFn::intersection().counting_decomposable());
  CHECK(SimilarityFn::neg_sym_diff().counting_decomposable());
  CHECK(SimilarityFn::neg_diff().counting_decomposable());
  CHECK(SimilarityFn::count().counting_decomposable());
  CHECK_FALSE(SimilarityFn::jaccard().counting_decomposable());
  CHECK_FALSE(SimilarityFn::neg_sym_cdiff().counting_decomposable());
  CHECK_FALSE(SimilarityFn::min_diff("a", "b").counting_decomposable());

  auto jb = SimilarityFn::jaccard().bounds();
  REQUIRE(jb.has_value());
  CHECK(jb->first == Rational(0));
  CHECK(jb->second == Rational(1));
  CHECK_FALSE(SimilarityFn::intersection().bounds().has_value());
  CHECK_FALSE(SimilarityFn::neg_sym_diff().bounds().has_value());
}

TEST_SUITE_END();
