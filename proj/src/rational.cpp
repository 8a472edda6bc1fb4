#include "ccut/rational.hpp"

#include <cctype>

namespace ccut {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational parse_rational(std::string_view s) {
  std::string_view t = s;
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
  if (t.empty()) throw ParseError("empty rational");

  bool neg = false;
  std::string_view body = t;
  if (body.front() == '-' || body.front() == '+') {
    neg = body.front() == '-';
    body.remove_prefix(1);
  }

  Rational r;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto p = body.substr(0, slash), q = body.substr(slash + 1);
    if (!all_digits(p) || !all_digits(q)) throw ParseError("bad rational: " + std::string(s));
    Integer den(std::string(q), 10);
    if (den == 0) throw ParseError("zero denominator: " + std::string(s));
    r = Rational(Integer(std::string(p), 10), den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto ip = body.substr(0, dot), fp = body.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) ||
        (!fp.empty() && !all_digits(fp)))
      throw ParseError("bad decimal: " + std::string(s));
    Integer num(std::string(ip.empty() ? "0" : ip) + std::string(fp), 10);
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
    r = Rational(num, den);
  } else {
    if (!all_digits(body)) throw ParseError("bad rational: " + std::string(s));
    r = Rational(Integer(std::string(body), 10));
  }
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Integer floor(const Rational& r) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

Integer ceil(const Rational& r) {
  Integer q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

Rational abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

Rational pow2(long e) {
  Integer p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e < 0 ? -e : e));
  return e < 0 ? Rational(Integer(1), p) : Rational(p);
}

}  // namespace ccut
