#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace ccut {

using Rational = mpq_class;
using Integer = mpz_class;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error {
  using Error::Error;
};
struct ArityError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};

// Accepts "p/q", "p" and plain decimals ("-0.26"); exponent notation is
// rejected so every accepted spelling denotes an exact value.
Rational parse_rational(std::string_view s);

// Canonical form "p/q" with q > 0 and gcd(p, q) = 1; integers keep "/1".
std::string to_string(const Rational& r);

// p/q in lowest terms (the two-argument mpq constructors do not reduce).
inline Rational frac(const Integer& p, const Integer& q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

Integer floor(const Rational& r);
Integer ceil(const Rational& r);
Rational abs(const Rational& r);
Rational pow2(long e);  // 2^e for any sign of e

inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace ccut
