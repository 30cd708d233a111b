#include "paramshap/similarity.hpp"

#include "paramshap/errors.hpp"

namespace paramshap {

SimilarityFn SimilarityFn::parse(const std::string& text) {
  if (text == "jaccard") return jaccard();
  if (text == "intersection") return intersection();
  if (text == "neg-sym-diff") return neg_sym_diff();
  if (text == "neg-sym-cdiff") return neg_sym_cdiff();
  if (text == "neg-diff") return neg_diff();
  if (text == "count") return count();
  if (text.rfind("min-diff:", 0) == 0) {
    std::string rest = text.substr(9);
    size_t colon = rest.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= rest.size()) {
      throw ValidationError("min-diff needs two column names, as in 'min-diff:A:B'");
    }
    return min_diff(rest.substr(0, colon), rest.substr(colon + 1));
  }
  throw ValidationError("unknown similarity function '" + text +
                        "' (expected jaccard, intersection, neg-sym-diff, neg-sym-cdiff, "
                        "neg-diff, min-diff:A:B, or count)");
}

std::string SimilarityFn::name() const {
  switch (tag) {
    case Tag::Jaccard: return "jaccard";
    case Tag::Intersection: return "intersection";
    case Tag::NegSymDiff: return "neg-sym-diff";
    case Tag::NegSymCDiff: return "neg-sym-cdiff";
    case Tag::NegDiff: return "neg-diff";
    case Tag::MinDiff: return "min-diff:" + col_a + ":" + col_b;
    case Tag::Count: return "count";
  }
  return "?";
}

bool SimilarityFn::counting_decomposable() const {
  switch (tag) {
    case Tag::Intersection:
    case Tag::NegSymDiff:
    case Tag::NegDiff:
    case Tag::Count:
      return true;
    default:
      return false;
  }
}

std::optional<std::pair<Rational, Rational>> SimilarityFn::bounds() const {
  if (tag == Tag::Jaccard) return std::make_pair(Rational(0), Rational(1));
  return std::nullopt;
}

namespace {

void check_layout(const Relation& t1, const Relation& t2) {
  const auto& a = t1.schema().columns;
  const auto& b = t2.schema().columns;
  if (a.size() != b.size()) {
    throw ValidationError("similarity inputs have different arities: " +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind) {
      throw ValidationError("similarity inputs disagree on column " + std::to_string(i + 1) +
                            ": " + kind_name(a[i].kind) + " vs " + kind_name(b[i].kind));
    }
  }
}

BigInt size_of(const Relation& t) { return BigInt(static_cast<long>(t.size())); }

/// min over rows of (row[a] − row[b]); errors on empty input.
Rational min_column_gap(const Relation& t, const std::string& col_a, const std::string& col_b,
                        const char* side) {
  const RelationSchema& rs = t.schema();
  auto ia = rs.column_index(col_a);
  auto ib = rs.column_index(col_b);
  if (!ia || !ib) {
    throw ValidationError(std::string("min-diff column '") + (!ia ? col_a : col_b) +
                          "' does not exist in the result schema");
  }
  for (size_t idx : {*ia, *ib}) {
    ValueKind k = rs.columns[idx].kind;
    if (k != ValueKind::Integer && k != ValueKind::Rational) {
      throw ValidationError("min-diff column '" + rs.columns[idx].name + "' is " +
                            kind_name(k) + ", not numeric");
    }
  }
  if (t.empty()) {
    throw ValidationError(std::string("min-diff is undefined on an empty ") + side +
                          " result");
  }
  std::optional<Rational> best;
  for (const auto& row : t.tuples()) {
    Rational gap = row[*ia].as_rational() - row[*ib].as_rational();
    if (!best || gap < *best) best = gap;
  }
  return *best;
}

}  // namespace

BigInt intersection_size(const Relation& t1, const Relation& t2) {
  const Relation& small = t1.size() <= t2.size() ? t1 : t2;
  const Relation& large = t1.size() <= t2.size() ? t2 : t1;
  BigInt n = 0;
  for (const auto& row : small.tuples()) {
    if (large.contains(row)) ++n;
  }
  return n;
}

Rational similarity(const SimilarityFn& fn, const Relation& t1, const Relation& t2) {
  check_layout(t1, t2);
  switch (fn.tag) {
    case SimilarityFn::Tag::Jaccard: {
      BigInt inter = intersection_size(t1, t2);
      BigInt uni = size_of(t1) + size_of(t2) - inter;
      if (uni == 0) return Rational(0);
      return Rational(inter, uni);
    }
    case SimilarityFn::Tag::Intersection:
      return Rational(intersection_size(t1, t2));
    case SimilarityFn::Tag::NegSymDiff: {
      BigInt inter = intersection_size(t1, t2);
      return Rational(2 * inter - size_of(t1) - size_of(t2));
    }
    case SimilarityFn::Tag::NegSymCDiff: {
      BigInt gap = size_of(t1) - size_of(t2);
      return Rational(-abs(gap));
    }
    case SimilarityFn::Tag::NegDiff:
      return Rational(intersection_size(t1, t2) - size_of(t2));
    case SimilarityFn::Tag::MinDiff: {
      Rational gap = min_column_gap(t1, fn.col_a, fn.col_b, "left") -
                     min_column_gap(t2, fn.col_a, fn.col_b, "right");
      return -gap.abs();
    }
    case SimilarityFn::Tag::Count:
      return Rational(size_of(t1));
  }
  throw InternalError("similarity: unhandled function tag");
}

}  // namespace paramshap
