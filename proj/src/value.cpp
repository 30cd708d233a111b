#include "paramshap/value.hpp"

#include <cctype>

#include "paramshap/errors.hpp"

namespace paramshap {

namespace {

// Comparison classes: the two numeric kinds share one class.
int class_rank(ValueKind k) {
  switch (k) {
    case ValueKind::Integer:
    case ValueKind::Rational:
      return 0;
    case ValueKind::String:
      return 1;
    case ValueKind::Boolean:
      return 2;
  }
  return 3;
}

bool is_integer_literal(const std::string& s) {
  if (s.empty()) return false;
  size_t start = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (start == s.size()) return false;
  for (size_t i = start; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool is_rational_literal(const std::string& s) {
  size_t slash = s.find('/');
  if (slash == std::string::npos) return is_integer_literal(s);
  std::string den = s.substr(slash + 1);
  if (den.empty() || den == "0") return false;
  for (char c : den)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return is_integer_literal(s.substr(0, slash));
}

}  // namespace

std::string kind_name(ValueKind k) {
  switch (k) {
    case ValueKind::Integer: return "integer";
    case ValueKind::Rational: return "rational";
    case ValueKind::String: return "string";
    case ValueKind::Boolean: return "boolean";
  }
  return "?";
}

std::optional<ValueKind> kind_from_name(const std::string& name) {
  if (name == "integer" || name == "int") return ValueKind::Integer;
  if (name == "rational") return ValueKind::Rational;
  if (name == "string" || name == "text") return ValueKind::String;
  if (name == "boolean" || name == "bool") return ValueKind::Boolean;
  return std::nullopt;
}

ValueKind Value::kind() const {
  switch (v_.index()) {
    case 0: return ValueKind::Integer;
    case 1: return ValueKind::Rational;
    case 2: return ValueKind::String;
    default: return ValueKind::Boolean;
  }
}

const BigInt& Value::as_integer() const {
  if (kind() != ValueKind::Integer) throw ValidationError("value is not an integer: " + to_string());
  return std::get<BigInt>(v_);
}

Rational Value::as_rational() const {
  if (kind() == ValueKind::Integer) return Rational(std::get<BigInt>(v_));
  if (kind() == ValueKind::Rational) return std::get<Rational>(v_);
  throw ValidationError("value is not numeric: " + to_string());
}

const std::string& Value::as_string() const {
  if (kind() != ValueKind::String) throw ValidationError("value is not a string: " + to_string());
  return std::get<std::string>(v_);
}

bool Value::as_boolean() const {
  if (kind() != ValueKind::Boolean) throw ValidationError("value is not a boolean: " + to_string());
  return std::get<bool>(v_);
}

bool Value::operator==(const Value& o) const {
  if (class_rank(kind()) != class_rank(o.kind())) return false;
  return storage_compare(*this, o) == 0;
}

int Value::compare(const Value& a, const Value& b) {
  if (class_rank(a.kind()) != class_rank(b.kind()))
    throw ValidationError("cannot compare " + kind_name(a.kind()) + " value " + a.to_string() +
                          " with " + kind_name(b.kind()) + " value " + b.to_string());
  return storage_compare(a, b);
}

int Value::storage_compare(const Value& a, const Value& b) {
  int ra = class_rank(a.kind()), rb = class_rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (ra) {
    case 0: {
      Rational x = a.as_rational(), y = b.as_rational();
      if (x == y) return 0;
      return x < y ? -1 : 1;
    }
    case 1: {
      const std::string& x = a.as_string();
      const std::string& y = b.as_string();
      return x == y ? 0 : (x < y ? -1 : 1);
    }
    default: {
      bool x = a.as_boolean(), y = b.as_boolean();
      return x == y ? 0 : (!x ? -1 : 1);
    }
  }
}

std::string Value::to_string() const {
  switch (kind()) {
    case ValueKind::Integer: return std::get<BigInt>(v_).get_str();
    case ValueKind::Rational: return std::get<Rational>(v_).to_string();
    case ValueKind::String: return std::get<std::string>(v_);
    case ValueKind::Boolean: return as_boolean() ? "true" : "false";
  }
  return "?";
}

Value Value::parse_cell(const std::string& text, ValueKind kind) {
  switch (kind) {
    case ValueKind::Integer:
      if (!is_integer_literal(text)) throw ValidationError("'" + text + "' is not an integer");
      return integer(BigInt(text));
    case ValueKind::Rational:
      if (!is_rational_literal(text)) throw ValidationError("'" + text + "' is not a rational");
      return rational(Rational::parse(text));
    case ValueKind::Boolean:
      if (text == "true") return boolean(true);
      if (text == "false") return boolean(false);
      throw ValidationError("'" + text + "' is not a boolean (expected true/false)");
    case ValueKind::String:
      return string(text);
  }
  throw InternalError("unhandled kind");
}

Value Value::parse_lexical(const std::string& text) {
  if (text == "true") return boolean(true);
  if (text == "false") return boolean(false);
  if (is_integer_literal(text)) return integer(BigInt(text));
  if (is_rational_literal(text)) return rational(Rational::parse(text));
  return string(text);
}

std::optional<Value> Value::coerce(ValueKind target) const {
  if (kind() == target) return *this;
  if (target == ValueKind::Rational && kind() == ValueKind::Integer)
    return rational(Rational(std::get<BigInt>(v_)));
  if (target == ValueKind::Integer && kind() == ValueKind::Rational) {
    const Rational& r = std::get<Rational>(v_);
    if (r.is_integer()) return integer(r.numerator());
    return std::nullopt;
  }
  if (target == ValueKind::String) return string(to_string());
  return std::nullopt;
}

int tuple_storage_compare(const Tuple& a, const Tuple& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    int c = Value::storage_compare(a[i], b[i]);
    if (c != 0) return c;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

std::string tuple_to_string(const Tuple& t) {
  std::string s = "(";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) s += ", ";
    s += t[i].to_string();
  }
  return s + ")";
}

}  // namespace paramshap
