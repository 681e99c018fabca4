#pragma once

// Canonical-normal-form expression algebra over jet space.
//
// An Expr is a fully expanded sum of monomials over the coefficient field of
// exact rational functions in the declared parameters. Each monomial is a
// coefficient times a product of bases (jet coordinates and independent
// variables) raised to exponents that are affine forms in the parameters
// with rational coefficients. Equal values have identical representations,
// so structural equality decides semantic equality.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jetbrackets/errors.hpp"
#include "jetbrackets/param.hpp"
#include "jetbrackets/rational.hpp"

namespace jb {

enum class SymbolKind { Independent, Dependent, Parameter };

struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::Independent;
  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

// A derivative coordinate u^alpha_I. The multiindex is kept sorted, so mixed
// partials have one representation (total derivatives commute).
struct JetCoordinate {
  std::string dependent;
  std::vector<std::string> index;  // sorted multiset of independent names

  JetCoordinate() = default;
  JetCoordinate(std::string dep, std::vector<std::string> idx);
  int order() const { return static_cast<int>(index.size()); }
  friend bool operator==(const JetCoordinate&, const JetCoordinate&) = default;
  friend auto operator<=>(const JetCoordinate&, const JetCoordinate&) = default;
};

// Base of a monomial factor. The kind rank (independent < parameter < jet)
// plus name plus multiindex gives the fixed total order used everywhere.
struct Base {
  enum class Kind { Independent = 0, Parameter = 1, Jet = 2 };
  Kind kind = Kind::Independent;
  std::string name;                 // symbol name, or dependent name for jets
  std::vector<std::string> index;   // jet multiindex; empty otherwise

  static Base indep(std::string n) { return {Kind::Independent, std::move(n), {}}; }
  static Base param(std::string n) { return {Kind::Parameter, std::move(n), {}}; }
  static Base jet(const JetCoordinate& j) { return {Kind::Jet, j.dependent, j.index}; }
  JetCoordinate as_jet() const { return JetCoordinate(name, index); }

  friend bool operator==(const Base&, const Base&) = default;
  friend auto operator<=>(const Base&, const Base&) = default;
};

// Exponent c0 + sum_i c_i * p_i with exact rational c's. Zero linear entries
// are never stored.
struct ExponentVector {
  Rational constant = 0;
  std::map<std::string, Rational> linear;  // parameter name -> coefficient

  ExponentVector() = default;
  explicit ExponentVector(Rational c) : constant(std::move(c)) {}
  static ExponentVector one() { return ExponentVector(Rational(1)); }
  static ExponentVector of_param(const std::string& p);

  bool is_zero() const { return constant == 0 && linear.empty(); }
  bool is_constant() const { return linear.empty(); }
  bool is_integer() const { return linear.empty() && jb::is_integer(constant); }
  bool is_nonneg_integer() const { return is_integer() && constant >= 0; }

  ExponentVector& operator+=(const ExponentVector& o);
  ExponentVector operator+(const ExponentVector& o) const;
  ExponentVector operator-() const;
  ExponentVector operator-(const ExponentVector& o) const;
  ExponentVector scaled(const Rational& k) const;

  friend bool operator==(const ExponentVector& a, const ExponentVector& b) {
    return a.constant == b.constant && a.linear == b.linear;
  }
  friend bool operator<(const ExponentVector& a, const ExponentVector& b) {
    if (a.constant != b.constant) return a.constant < b.constant;
    return std::lexicographical_compare(
        a.linear.begin(), a.linear.end(), b.linear.begin(), b.linear.end(),
        [](const auto& x, const auto& y) {
          if (x.first != y.first) return x.first < y.first;
          return x.second < y.second;
        });
  }
};

using FactorMap = std::map<Base, ExponentVector>;

// Fixed total order on factor maps (lexicographic over (base, exponent)
// pairs), byte-wise on names, never locale-dependent.
bool factor_map_less(const FactorMap& a, const FactorMap& b);

struct Monomial {
  ParamScalar coeff = ParamScalar(Rational(1));
  FactorMap factors;  // no identically-zero exponents, bases unique by map

  bool is_constant() const { return factors.empty(); }
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.coeff == b.coeff && a.factors == b.factors;
  }
};

class Expr;
using ExprVec = std::vector<Expr>;

class Expr {
public:
  Expr() = default;  // zero
  explicit Expr(Rational c);
  explicit Expr(ParamScalar c);
  static Expr from_monomial(Monomial m);
  static Expr symbol(const Base& b);  // parameter bases become coefficients
  static Expr jet(const JetCoordinate& j) { return symbol(Base::jet(j)); }

  bool is_zero() const { return terms_.empty(); }
  const std::vector<Monomial>& terms() const { return terms_; }
  std::optional<Rational> as_rational() const;       // value if rational constant
  std::optional<ParamScalar> as_coefficient() const; // value if base-free
  std::optional<Monomial> as_monomial() const;       // value if single term

  Expr operator+(const Expr& o) const;
  Expr operator-(const Expr& o) const;
  Expr operator-() const;
  Expr operator*(const Expr& o) const;
  Expr& operator+=(const Expr& o) { *this = *this + o; return *this; }
  Expr& operator-=(const Expr& o) { *this = *this - o; return *this; }
  Expr& operator*=(const Expr& o) { *this = *this * o; return *this; }
  Expr scaled(const Rational& k) const;
  Expr scaled(const ParamScalar& k) const;

  // Raises to an affine exponent. Sums require a nonnegative integer
  // constant exponent; monomials additionally need coefficient 1 (or a
  // pure integer exponent) and constant factor exponents.
  Expr pow(const ExponentVector& e) const;
  // Division restricted to a single monomial divisor.
  Expr divided_by(const Expr& divisor) const;

  friend bool operator==(const Expr& a, const Expr& b) { return a.terms_ == b.terms_; }

  // Construction helper used by arithmetic: merges like terms, drops zeros,
  // sorts into the canonical order.
  static Expr collect(std::vector<Monomial> ms);

private:
  std::vector<Monomial> terms_;  // strictly descending by factor map
};

bool operator==(const ExprVec& a, const ExprVec& b);

// --- raw expression trees -------------------------------------------------
//
// Parsers and test generators build ExprTree values; normalize() folds them
// into canonical Exprs. The tree is deliberately dumb: no simplification.

struct ExprTree;
using ExprTreePtr = std::shared_ptr<const ExprTree>;

struct ExprTree {
  enum class Op { Num, Sym, Add, Sub, Mul, Div, Pow, Neg };
  Op op = Op::Num;
  Rational number;            // Num
  Base base;                  // Sym
  ExprTreePtr lhs, rhs;       // binary ops; Neg uses lhs

  static ExprTreePtr num(Rational v);
  static ExprTreePtr sym(Base b);
  static ExprTreePtr node(Op op, ExprTreePtr a, ExprTreePtr b);
  static ExprTreePtr neg(ExprTreePtr a);
};

// Folds a raw tree to canonical form. Exponents (Pow right operands) must
// normalize to affine forms in parameters.
Expr normalize(const ExprTreePtr& tree);

// Converts an Expr into the exponent it denotes, if it is an affine form in
// parameters (e.g. "p - 1"). Nullopt otherwise.
std::optional<ExponentVector> expr_to_exponent(const Expr& e);
Expr exponent_to_expr(const ExponentVector& ev);

// --- substitution ----------------------------------------------------------

// Replaces every occurrence of a jet coordinate by an expression. Occurrences
// with non-integer or negative exponents require a monomial replacement.
Expr substitute(const Expr& e, const JetCoordinate& target, const Expr& replacement);

// Rewrites every base through `fn` (used by alias rewriting). Colliding
// images have their exponents merged.
Expr transform_bases(const Expr& e, const std::function<Base(const Base&)>& fn);

// Sets a parameter to an exact rational value everywhere, including inside
// exponents (the exponent stays affine).
Expr set_parameter(const Expr& e, const std::string& param, const Rational& value);

// --- numeric evaluation ----------------------------------------------------

struct NumericValue {
  bool exact = true;
  Rational rat = 0;
  double dbl = 0.0;
  double as_double() const { return exact ? rat.convert_to<double>() : dbl; }
};

struct NumericPoint {
  std::map<Base, NumericValue> assignments;
  void set(const Base& b, Rational v) { assignments[b] = {true, std::move(v), 0.0}; }
  void set(const Base& b, double v) { assignments[b] = {false, 0, v}; }
};

NumericValue eval_numeric(const Expr& e, const NumericPoint& pt);

// --- rendering -------------------------------------------------------------

std::string render(const Expr& e);
std::string render(const ExprVec& v);
std::string render_exponent(const ExponentVector& ev);

}  // namespace jb
