#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace paramshap {

/// Arbitrary-precision integer.
using BigInt = mpz_class;

/// Exact rational number. Always stored in lowest terms with a positive
/// denominator; all arithmetic and comparisons are exact.
class Rational {
 public:
  Rational() : q_(0) {}
  Rational(long n) : q_(n) {}  // NOLINT: implicit by design, mirrors integer literals
  explicit Rational(const BigInt& n) : q_(n) {}
  Rational(const BigInt& num, const BigInt& den);
  Rational(long num, long den);

  /// Parses "a", "-a", or "a/b" with b > 0 (sign on the numerator only).
  static Rational parse(const std::string& text);

  /// Exact value from a double with a small power-of-two denominator.
  /// Only used where a caller hands in float tolerances; never on score paths.
  static Rational from_double(double x);

  BigInt numerator() const { return q_.get_num(); }
  BigInt denominator() const { return q_.get_den(); }
  bool is_zero() const { return q_ == 0; }
  bool is_integer() const { return q_.get_den() == 1; }
  int sign() const { return sgn(q_); }

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);  // throws on division by zero

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.q_ != b.q_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.q_ < b.q_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.q_ <= b.q_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.q_ > b.q_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.q_ >= b.q_; }

  Rational abs() const;
  Rational reciprocal() const;  // throws on zero

  /// "a" when integral, "a/b" otherwise.
  std::string to_string() const;
  double to_double() const { return q_.get_d(); }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r);

 private:
  mpq_class q_;  // canonicalized on every construction path
};

/// n! as an exact integer.
BigInt factorial(unsigned n);

/// Binomial coefficient C(n, k), 0 when k > n.
BigInt binomial(unsigned n, unsigned k);

}  // namespace paramshap
