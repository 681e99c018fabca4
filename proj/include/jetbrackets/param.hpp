#pragma once

// The coefficient field for bracket tables and basis decompositions: rational
// functions in the declared parameters with exact rational coefficients.
// Canonical form: numerator/denominator reduced by their GCD, denominator
// monic under the fixed term order, so equal values compare equal.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jetbrackets/errors.hpp"
#include "jetbrackets/rational.hpp"

namespace jb {

// Power product of parameters, exponents positive.
using PMonomial = std::map<std::string, long>;

struct MultiPoly {
  std::map<PMonomial, Rational> terms;  // no zero coefficients

  MultiPoly() = default;
  static MultiPoly constant(Rational c);
  static MultiPoly var(const std::string& name);

  bool is_zero() const { return terms.empty(); }
  std::optional<Rational> as_constant() const;

  MultiPoly operator+(const MultiPoly& o) const;
  MultiPoly operator-(const MultiPoly& o) const;
  MultiPoly operator-() const;
  MultiPoly operator*(const MultiPoly& o) const;
  MultiPoly scaled(const Rational& k) const;

  // Leading term under the fixed order (total degree, then map comparison).
  std::pair<PMonomial, Rational> leading() const;

  friend bool operator==(const MultiPoly&, const MultiPoly&) = default;
};

// GCD up to a rational factor (primitive part semantics).
MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b);
// Exact division; throws Internal if the division does not come out evenly.
MultiPoly poly_divexact(const MultiPoly& a, const MultiPoly& b);
std::string render(const MultiPoly& p);

class ParamScalar {
public:
  ParamScalar() : num_(), den_(MultiPoly::constant(1)) {}
  ParamScalar(Rational c) : num_(MultiPoly::constant(std::move(c))), den_(MultiPoly::constant(1)) {}
  ParamScalar(MultiPoly num, MultiPoly den);
  static ParamScalar var(const std::string& name);

  const MultiPoly& num() const { return num_; }
  const MultiPoly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  std::optional<Rational> as_constant() const;

  ParamScalar operator+(const ParamScalar& o) const;
  ParamScalar operator-(const ParamScalar& o) const;
  ParamScalar operator-() const;
  ParamScalar operator*(const ParamScalar& o) const;
  ParamScalar operator/(const ParamScalar& o) const;
  ParamScalar& operator+=(const ParamScalar& o) { *this = *this + o; return *this; }

  ParamScalar pow(long n) const;

  // Substitutes exact values for the given parameters; remaining parameters
  // stay symbolic. Throws DivisionByZero if the denominator vanishes.
  ParamScalar instantiate(const std::map<std::string, Rational>& values) const;

  friend bool operator==(const ParamScalar& a, const ParamScalar& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

private:
  void canonicalize();
  MultiPoly num_, den_;
};

std::string render(const ParamScalar& s);

// Affine view of a scalar: c0 + sum c_i p_i with rational c's; nullopt when
// the scalar is not of this shape.
struct AffineForm {
  Rational constant;
  std::map<std::string, Rational> linear;
};
std::optional<AffineForm> as_affine(const ParamScalar& s);

}  // namespace jb
