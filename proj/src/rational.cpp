#include "paramshap/rational.hpp"

#include <cmath>
#include <ostream>

#include "paramshap/errors.hpp"

namespace paramshap {

Rational::Rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw ValidationError("rational with zero denominator");
  q_ = mpq_class(num, den);
  q_.canonicalize();
}

Rational::Rational(long num, long den) : Rational(BigInt(num), BigInt(den)) {}

Rational Rational::parse(const std::string& text) {
  auto bad = [&] { return ValidationError("not a rational literal: '" + text + "'"); };
  if (text.empty()) throw bad();
  size_t slash = text.find('/');
  std::string num = text.substr(0, slash);
  if (num.empty()) throw bad();
  size_t start = (num[0] == '+' || num[0] == '-') ? 1 : 0;
  if (start == num.size()) throw bad();
  for (size_t i = start; i < num.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(num[i]))) throw bad();
  if (slash == std::string::npos) return Rational(BigInt(num));
  std::string den = text.substr(slash + 1);
  if (den.empty()) throw bad();
  for (char c : den)
    if (!std::isdigit(static_cast<unsigned char>(c))) throw bad();
  BigInt d(den);
  if (d == 0) throw bad();
  return Rational(BigInt(num), d);
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw ValidationError("non-finite value has no rational form");
  Rational r;
  r.q_ = mpq_class(x);  // exact binary expansion
  r.q_.canonicalize();
  return r;
}

Rational Rational::operator-() const {
  Rational r;
  r.q_ = -q_;
  return r;
}

Rational& Rational::operator+=(const Rational& o) {
  q_ += o.q_;
  return *this;
}

Rational& Rational::operator-=(const Rational& o) {
  q_ -= o.q_;
  return *this;
}

Rational& Rational::operator*=(const Rational& o) {
  q_ *= o.q_;
  return *this;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.q_ == 0) throw ValidationError("rational division by zero");
  q_ /= o.q_;
  return *this;
}

Rational Rational::abs() const {
  Rational r;
  r.q_ = ::abs(q_);
  return r;
}

Rational Rational::reciprocal() const {
  if (q_ == 0) throw ValidationError("reciprocal of zero");
  Rational r;
  r.q_ = 1 / q_;
  return r;
}

std::string Rational::to_string() const {
  if (is_integer()) return q_.get_num().get_str();
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

BigInt factorial(unsigned n) {
  BigInt r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return BigInt(0);
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

}  // namespace paramshap
