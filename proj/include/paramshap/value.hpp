#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "paramshap/rational.hpp"

namespace paramshap {

enum class ValueKind { Integer, Rational, String, Boolean };

std::string kind_name(ValueKind k);
std::optional<ValueKind> kind_from_name(const std::string& name);

/// A typed constant: arbitrary-precision integer, exact rational, string, or
/// boolean. The two numeric kinds form one comparison class and compare by
/// numeric value (1 equals 1/1); comparing across classes through compare()
/// is a checked error, while operator== across classes is simply false.
class Value {
 public:
  Value() : v_(BigInt(0)) {}

  static Value integer(BigInt n) { return Value(std::move(n)); }
  static Value integer(long n) { return Value(BigInt(n)); }
  static Value rational(Rational r) { return Value(std::move(r)); }
  static Value string(std::string s) { return Value(std::move(s)); }
  static Value boolean(bool b) { return Value(b); }

  ValueKind kind() const;
  bool is_numeric() const { return kind() == ValueKind::Integer || kind() == ValueKind::Rational; }

  const BigInt& as_integer() const;      // Integer only
  Rational as_rational() const;          // numeric kinds only
  const std::string& as_string() const;  // String only
  bool as_boolean() const;               // Boolean only

  /// Decidable equality: numeric values compare numerically, other kinds
  /// structurally; values of different comparison classes are unequal.
  bool operator==(const Value& o) const;
  bool operator!=(const Value& o) const { return !(*this == o); }

  /// Three-way semantic comparison. Throws ValidationError when the two
  /// values are in different comparison classes (numeric / string / boolean).
  static int compare(const Value& a, const Value& b);

  /// Total order for container storage: comparison class first, then the
  /// semantic order within the class. Never throws.
  static int storage_compare(const Value& a, const Value& b);

  /// Display form; strings are returned verbatim (quoting is the concern of
  /// each serializer).
  std::string to_string() const;

  /// Parses text per the declared kind (CSV cells, typed inputs).
  static Value parse_cell(const std::string& text, ValueKind kind);

  /// Kind inference for untyped inputs: integer literal, a/b, true/false,
  /// anything else a string.
  static Value parse_lexical(const std::string& text);

  /// Lossless conversion to the target kind where one exists: integer to
  /// rational, numeric/boolean back to string by their display spelling,
  /// integral rational to integer. Returns nullopt otherwise.
  std::optional<Value> coerce(ValueKind target) const;

 private:
  explicit Value(BigInt n) : v_(std::move(n)) {}
  explicit Value(Rational r) : v_(std::move(r)) {}
  explicit Value(std::string s) : v_(std::move(s)) {}
  explicit Value(bool b) : v_(b) {}

  std::variant<BigInt, Rational, std::string, bool> v_;
};

struct ValueStorageLess {
  bool operator()(const Value& a, const Value& b) const { return Value::storage_compare(a, b) < 0; }
};

using Tuple = std::vector<Value>;

int tuple_storage_compare(const Tuple& a, const Tuple& b);

struct TupleStorageLess {
  bool operator()(const Tuple& a, const Tuple& b) const { return tuple_storage_compare(a, b) < 0; }
};

std::string tuple_to_string(const Tuple& t);

}  // namespace paramshap
