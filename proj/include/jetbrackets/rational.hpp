#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

#include "jetbrackets/errors.hpp"

namespace jb {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

inline bool fits_long(const BigInt& n) {
  return n >= std::numeric_limits<long>::min() &&
         n <= std::numeric_limits<long>::max();
}

// q^n for integer n; n < 0 requires q != 0.
inline Rational rat_pow(const Rational& q, const BigInt& n) {
  if (n == 0) return Rational(1);
  if (q == 0) {
    if (n < 0) throw Error(ErrorCode::ZeroToNegativePower, "0 raised to negative power");
    return Rational(0);
  }
  BigInt a = n < 0 ? BigInt(-n) : n;
  if (!fits_long(a)) throw Error(ErrorCode::Internal, "exponent overflow");
  unsigned long e = a.convert_to<unsigned long>();
  BigInt num = boost::multiprecision::pow(numerator(q), e);
  BigInt den = boost::multiprecision::pow(denominator(q), e);
  Rational r(num, den);
  if (n < 0) r = 1 / r;
  return r;
}

// Renders "a" or "a/b"; matches the .sys number grammar.
inline std::string rat_str(const Rational& q) {
  if (is_integer(q)) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

// Parses "a", "a/b" or a finite decimal like "0.25". Returns nullopt on junk.
inline std::optional<Rational> rat_parse(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto digits = [](const std::string& t) {
    if (t.empty()) return false;
    for (char c : t)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  std::string body = s;
  bool neg = false;
  if (body[0] == '+' || body[0] == '-') {
    neg = body[0] == '-';
    body = body.substr(1);
  }
  Rational r;
  auto slash = body.find('/');
  auto dot = body.find('.');
  if (slash != std::string::npos) {
    std::string a = body.substr(0, slash), b = body.substr(slash + 1);
    if (!digits(a) || !digits(b) || BigInt(b) == 0) return std::nullopt;
    r = Rational(BigInt(a), BigInt(b));
  } else if (dot != std::string::npos) {
    std::string a = body.substr(0, dot), b = body.substr(dot + 1);
    if (a.empty()) a = "0";
    if (!digits(a) || !digits(b)) return std::nullopt;
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(b.size()));
    r = Rational(BigInt(a) * scale + BigInt(b), scale);
  } else {
    if (!digits(body)) return std::nullopt;
    r = Rational(BigInt(body));
  }
  return neg ? Rational(-r) : r;
}

}  // namespace jb
