#pragma once

#include <optional>
#include <string>
#include <utility>

#include "paramshap/rational.hpp"
#include "paramshap/relation.hpp"

namespace paramshap {

/// Closed enumeration of the built-in similarity functions over two query
/// results with a common schema.
struct SimilarityFn {
  enum class Tag {
    Jaccard,      // |T1∩T2| / |T1∪T2|, 0 when both empty
    Intersection, // |T1∩T2|
    NegSymDiff,   // −|T1△T2|
    NegSymCDiff,  // −||T1| − |T2||
    NegDiff,      // −|T2∖T1|
    MinDiff,      // −|min(T1.A−T1.B) − min(T2.A−T2.B)| over named columns
    Count,        // |T1| (ignores T2; internal building block)
  };

  Tag tag = Tag::Jaccard;
  std::string col_a, col_b;  // MinDiff only

  static SimilarityFn jaccard() { return {Tag::Jaccard, "", ""}; }
  static SimilarityFn intersection() { return {Tag::Intersection, "", ""}; }
  static SimilarityFn neg_sym_diff() { return {Tag::NegSymDiff, "", ""}; }
  static SimilarityFn neg_sym_cdiff() { return {Tag::NegSymCDiff, "", ""}; }
  static SimilarityFn neg_diff() { return {Tag::NegDiff, "", ""}; }
  static SimilarityFn min_diff(std::string a, std::string b) {
    return {Tag::MinDiff, std::move(a), std::move(b)};
  }
  static SimilarityFn count() { return {Tag::Count, "", ""}; }

  /// CLI spelling: jaccard | intersection | neg-sym-diff | neg-sym-cdiff |
  /// neg-diff | min-diff:A:B | count.
  static SimilarityFn parse(const std::string& text);
  std::string name() const;

  /// True when the function is a rational linear combination of Count,
  /// Intersection, and a constant — the shape the exact engine needs.
  bool counting_decomposable() const;
  /// Sensitivity to the left argument (all built-ins qualify).
  bool left_sensitive() const { return true; }
  /// A-priori value bounds, when the function has them (Jaccard only).
  std::optional<std::pair<Rational, Rational>> bounds() const;

  bool operator==(const SimilarityFn& o) const {
    return tag == o.tag && col_a == o.col_a && col_b == o.col_b;
  }
};

/// Applies fn to two results over a common column layout (names may differ,
/// kinds may not).
Rational similarity(const SimilarityFn& fn, const Relation& t1, const Relation& t2);

/// |T1 ∩ T2| for relations with a common layout.
BigInt intersection_size(const Relation& t1, const Relation& t2);

}  // namespace paramshap
