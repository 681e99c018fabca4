#include "jetbrackets/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jb {

namespace {
const ParamScalar kOne{Rational(1)};
bool is_one(const ParamScalar& s) { return s == kOne; }
}  // namespace

JetCoordinate::JetCoordinate(std::string dep, std::vector<std::string> idx)
    : dependent(std::move(dep)), index(std::move(idx)) {
  std::sort(index.begin(), index.end());
}

ExponentVector ExponentVector::of_param(const std::string& p) {
  ExponentVector ev;
  ev.linear[p] = 1;
  return ev;
}

ExponentVector& ExponentVector::operator+=(const ExponentVector& o) {
  constant += o.constant;
  for (const auto& [p, c] : o.linear) {
    Rational& slot = linear[p];
    slot += c;
    if (slot == 0) linear.erase(p);
  }
  return *this;
}

ExponentVector ExponentVector::operator+(const ExponentVector& o) const {
  ExponentVector r = *this;
  r += o;
  return r;
}

ExponentVector ExponentVector::operator-() const {
  ExponentVector r;
  r.constant = -constant;
  for (const auto& [p, c] : linear) r.linear[p] = -c;
  return r;
}

ExponentVector ExponentVector::operator-(const ExponentVector& o) const {
  return *this + (-o);
}

ExponentVector ExponentVector::scaled(const Rational& k) const {
  ExponentVector r;
  if (k == 0) return r;
  r.constant = constant * k;
  for (const auto& [p, c] : linear) r.linear[p] = c * k;
  return r;
}

Expr::Expr(Rational c) : Expr(ParamScalar(std::move(c))) {}

Expr::Expr(ParamScalar c) {
  if (!c.is_zero()) terms_.push_back(Monomial{std::move(c), {}});
}

Expr Expr::from_monomial(Monomial m) {
  Expr e;
  if (!m.coeff.is_zero()) e.terms_.push_back(std::move(m));
  return e;
}

Expr Expr::symbol(const Base& b) {
  if (b.kind == Base::Kind::Parameter) return Expr(ParamScalar::var(b.name));
  Monomial m;
  m.factors[b] = ExponentVector::one();
  return from_monomial(std::move(m));
}

std::optional<Rational> Expr::as_rational() const {
  auto c = as_coefficient();
  if (!c) return std::nullopt;
  return c->as_constant();
}

std::optional<ParamScalar> Expr::as_coefficient() const {
  if (terms_.empty()) return ParamScalar(Rational(0));
  if (terms_.size() == 1 && terms_[0].factors.empty()) return terms_[0].coeff;
  return std::nullopt;
}

std::optional<Monomial> Expr::as_monomial() const {
  if (terms_.size() == 1) return terms_[0];
  return std::nullopt;
}

bool factor_map_less(const FactorMap& a, const FactorMap& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](const auto& x, const auto& y) {
        if (!(x.first == y.first)) return x.first < y.first;
        return x.second < y.second;
      });
}

Expr Expr::collect(std::vector<Monomial> ms) {
  // Canonical order: descending by factor map, so jets lead and the constant
  // term comes last.
  std::sort(ms.begin(), ms.end(), [](const Monomial& a, const Monomial& b) {
    return factor_map_less(b.factors, a.factors);
  });
  Expr out;
  for (auto& m : ms) {
    if (m.coeff.is_zero()) continue;
    if (!out.terms_.empty() && out.terms_.back().factors == m.factors) {
      out.terms_.back().coeff += m.coeff;
      if (out.terms_.back().coeff.is_zero()) out.terms_.pop_back();
    } else {
      out.terms_.push_back(std::move(m));
    }
  }
  return out;
}

Expr Expr::operator+(const Expr& o) const {
  std::vector<Monomial> ms = terms_;
  ms.insert(ms.end(), o.terms_.begin(), o.terms_.end());
  return collect(std::move(ms));
}

Expr Expr::operator-() const {
  Expr r = *this;
  for (auto& m : r.terms_) m.coeff = -m.coeff;
  return r;
}

Expr Expr::operator-(const Expr& o) const { return *this + (-o); }

namespace {

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.coeff = a.coeff * b.coeff;
  r.factors = a.factors;
  for (const auto& [base, ev] : b.factors) {
    auto it = r.factors.find(base);
    if (it == r.factors.end()) {
      r.factors.emplace(base, ev);
    } else {
      it->second += ev;
      if (it->second.is_zero()) r.factors.erase(it);
    }
  }
  return r;
}

Monomial mono_pow(const Monomial& m, const ExponentVector& e) {
  Monomial r;
  if (e.is_zero()) return r;  // x^0 = 1
  if (e.is_integer()) {
    BigInt n = numerator(e.constant);
    if (!fits_long(n)) throw Error(ErrorCode::Internal, "exponent overflow");
    r.coeff = m.coeff.pow(n.convert_to<long>());
    for (const auto& [base, ev] : m.factors) {
      ExponentVector s = ev.scaled(e.constant);
      if (!s.is_zero()) r.factors[base] = s;
    }
    return r;
  }
  if (!is_one(m.coeff))
    throw Error(ErrorCode::NonRationalPower,
                "cannot raise coefficient " + render(m.coeff) + " to a non-integer power");
  if (e.is_constant()) {
    for (const auto& [base, ev] : m.factors) {
      ExponentVector s = ev.scaled(e.constant);
      if (!s.is_zero()) r.factors[base] = s;
    }
    return r;
  }
  // Symbolic exponent: every factor exponent must be a rational constant so
  // the product of exponents stays affine.
  for (const auto& [base, ev] : m.factors) {
    if (!ev.is_constant())
      throw Error(ErrorCode::NonRationalPower,
                  "exponent product is not affine in parameters");
    ExponentVector s = e.scaled(ev.constant);
    if (!s.is_zero()) r.factors[base] = s;
  }
  return r;
}

}  // namespace

Expr Expr::operator*(const Expr& o) const {
  std::vector<Monomial> ms;
  ms.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) ms.push_back(mono_mul(a, b));
  return collect(std::move(ms));
}

Expr Expr::scaled(const Rational& k) const { return scaled(ParamScalar(k)); }

Expr Expr::scaled(const ParamScalar& k) const {
  if (k.is_zero()) return Expr();
  Expr r = *this;
  for (auto& m : r.terms_) m.coeff = m.coeff * k;
  return r;
}

Expr Expr::pow(const ExponentVector& e) const {
  if (e.is_zero()) return Expr(Rational(1));
  if (is_zero()) {
    if (e.is_constant() && e.constant > 0) return Expr();
    throw Error(ErrorCode::ZeroToNegativePower,
                "zero raised to a non-positive or symbolic power");
  }
  if (terms_.size() == 1) return from_monomial(mono_pow(terms_[0], e));
  if (!e.is_nonneg_integer())
    throw Error(ErrorCode::NonIntegerPowerOfSum,
                "sum raised to exponent " + render_exponent(e));
  BigInt n = numerator(e.constant);
  if (!fits_long(n) || n > 64)
    throw Error(ErrorCode::Internal, "unreasonably large sum power");
  Expr acc(Rational(1));
  for (long i = 0; i < n.convert_to<long>(); ++i) acc = acc * *this;
  return acc;
}

Expr Expr::divided_by(const Expr& divisor) const {
  if (divisor.is_zero()) throw Error(ErrorCode::DivisionByZero, "division by zero");
  auto m = divisor.as_monomial();
  if (!m)
    throw Error(ErrorCode::NonMonomialDivisor,
                "division restricted to monomial divisors; got " + render(divisor));
  Monomial inv;
  inv.coeff = ParamScalar(Rational(1)) / m->coeff;
  for (const auto& [base, ev] : m->factors) inv.factors[base] = -ev;
  return *this * from_monomial(std::move(inv));
}

bool operator==(const ExprVec& a, const ExprVec& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

// --- raw trees --------------------------------------------------------------

ExprTreePtr ExprTree::num(Rational v) {
  auto t = std::make_shared<ExprTree>();
  t->op = Op::Num;
  t->number = std::move(v);
  return t;
}

ExprTreePtr ExprTree::sym(Base b) {
  auto t = std::make_shared<ExprTree>();
  t->op = Op::Sym;
  t->base = std::move(b);
  return t;
}

ExprTreePtr ExprTree::node(Op op, ExprTreePtr a, ExprTreePtr b) {
  auto t = std::make_shared<ExprTree>();
  t->op = op;
  t->lhs = std::move(a);
  t->rhs = std::move(b);
  return t;
}

ExprTreePtr ExprTree::neg(ExprTreePtr a) {
  auto t = std::make_shared<ExprTree>();
  t->op = Op::Neg;
  t->lhs = std::move(a);
  return t;
}

Expr normalize(const ExprTreePtr& tree) {
  if (!tree) throw Error(ErrorCode::Internal, "null expression tree");
  switch (tree->op) {
    case ExprTree::Op::Num: return Expr(tree->number);
    case ExprTree::Op::Sym: return Expr::symbol(tree->base);
    case ExprTree::Op::Add: return normalize(tree->lhs) + normalize(tree->rhs);
    case ExprTree::Op::Sub: return normalize(tree->lhs) - normalize(tree->rhs);
    case ExprTree::Op::Mul: return normalize(tree->lhs) * normalize(tree->rhs);
    case ExprTree::Op::Div: {
      Expr lhs = normalize(tree->lhs);
      Expr rhs = normalize(tree->rhs);
      // A base-free divisor is an element of the coefficient field; any
      // nonzero such divisor is legal. Divisors carrying jet or independent
      // bases must be monomials.
      if (auto c = rhs.as_coefficient()) {
        if (c->is_zero()) throw Error(ErrorCode::DivisionByZero, "division by zero");
        return lhs.scaled(ParamScalar(Rational(1)) / *c);
      }
      return lhs.divided_by(rhs);
    }
    case ExprTree::Op::Neg: return -normalize(tree->lhs);
    case ExprTree::Op::Pow: {
      Expr base = normalize(tree->lhs);
      Expr eexp = normalize(tree->rhs);
      auto ev = expr_to_exponent(eexp);
      if (!ev)
        throw Error(ErrorCode::NonRationalPower,
                    "exponent is not affine in parameters: " + render(eexp));
      return base.pow(*ev);
    }
  }
  throw Error(ErrorCode::Internal, "bad tree op");
}

std::optional<ExponentVector> expr_to_exponent(const Expr& e) {
  auto c = e.as_coefficient();
  if (!c) return std::nullopt;
  auto aff = as_affine(*c);
  if (!aff) return std::nullopt;
  ExponentVector ev;
  ev.constant = aff->constant;
  ev.linear = aff->linear;
  return ev;
}

Expr exponent_to_expr(const ExponentVector& ev) {
  ParamScalar acc{ev.constant};
  for (const auto& [p, c] : ev.linear) acc += ParamScalar(c) * ParamScalar::var(p);
  return Expr(acc);
}

// --- substitution ------------------------------------------------------------

Expr substitute(const Expr& e, const JetCoordinate& target, const Expr& replacement) {
  const Base tb = Base::jet(target);
  Expr out;
  for (const auto& m : e.terms()) {
    auto it = m.factors.find(tb);
    if (it == m.factors.end()) {
      out += Expr::from_monomial(m);
      continue;
    }
    ExponentVector ev = it->second;
    Monomial rest = m;
    rest.factors.erase(tb);
    if (!ev.is_nonneg_integer() && !replacement.as_monomial())
      throw Error(ErrorCode::NonIntegerPowerOfSum,
                  "substitution target has exponent " + render_exponent(ev) +
                      " but replacement is not a monomial");
    out += Expr::from_monomial(std::move(rest)) * replacement.pow(ev);
  }
  return out;
}

Expr transform_bases(const Expr& e, const std::function<Base(const Base&)>& fn) {
  std::vector<Monomial> ms;
  ms.reserve(e.terms().size());
  for (const auto& m : e.terms()) {
    Monomial r;
    r.coeff = m.coeff;
    for (const auto& [base, ev] : m.factors) {
      Base nb = fn(base);
      auto it = r.factors.find(nb);
      if (it == r.factors.end()) {
        r.factors.emplace(std::move(nb), ev);
      } else {
        it->second += ev;
        if (it->second.is_zero()) r.factors.erase(it);
      }
    }
    ms.push_back(std::move(r));
  }
  return Expr::collect(std::move(ms));
}

Expr set_parameter(const Expr& e, const std::string& param, const Rational& value) {
  std::map<std::string, Rational> one{{param, value}};
  std::vector<Monomial> ms;
  for (const auto& m : e.terms()) {
    Monomial r;
    r.coeff = m.coeff.instantiate(one);
    if (r.coeff.is_zero()) continue;
    for (const auto& [base, ev0] : m.factors) {
      ExponentVector ev = ev0;
      auto lin = ev.linear.find(param);
      if (lin != ev.linear.end()) {
        ev.constant += lin->second * value;
        ev.linear.erase(lin);
      }
      if (!ev.is_zero()) r.factors[base] = ev;
    }
    ms.push_back(std::move(r));
  }
  return Expr::collect(std::move(ms));
}

// --- numeric evaluation -------------------------------------------------------

namespace {

NumericValue nv_mul(const NumericValue& a, const NumericValue& b) {
  if (a.exact && b.exact) return {true, a.rat * b.rat, 0.0};
  return {false, 0, a.as_double() * b.as_double()};
}

NumericValue nv_add(const NumericValue& a, const NumericValue& b) {
  if (a.exact && b.exact) return {true, a.rat + b.rat, 0.0};
  return {false, 0, a.as_double() + b.as_double()};
}

NumericValue param_value(const std::string& p, const NumericPoint& pt) {
  auto it = pt.assignments.find(Base::param(p));
  if (it == pt.assignments.end())
    throw Error(ErrorCode::MissingAssignment, "no assignment for parameter " + p);
  return it->second;
}

NumericValue eval_exponent(const ExponentVector& ev, const NumericPoint& pt) {
  NumericValue acc{true, ev.constant, 0.0};
  for (const auto& [p, c] : ev.linear)
    acc = nv_add(acc, nv_mul({true, c, 0.0}, param_value(p, pt)));
  return acc;
}

NumericValue eval_poly(const MultiPoly& poly, const NumericPoint& pt) {
  NumericValue acc{true, 0, 0.0};
  for (const auto& [mono, c] : poly.terms) {
    NumericValue term{true, c, 0.0};
    for (const auto& [p, e] : mono) {
      NumericValue v = param_value(p, pt);
      for (long i = 0; i < e; ++i) term = nv_mul(term, v);
    }
    acc = nv_add(acc, term);
  }
  return acc;
}

NumericValue eval_coeff(const ParamScalar& c, const NumericPoint& pt) {
  NumericValue num = eval_poly(c.num(), pt);
  NumericValue den = eval_poly(c.den(), pt);
  if (num.exact && den.exact) {
    if (den.rat == 0) throw Error(ErrorCode::DivisionByZero, "coefficient pole at this point");
    return {true, num.rat / den.rat, 0.0};
  }
  double d = den.as_double();
  if (d == 0.0) throw Error(ErrorCode::DivisionByZero, "coefficient pole at this point");
  return {false, 0, num.as_double() / d};
}

NumericValue nv_pow(const NumericValue& base, const NumericValue& exp) {
  if (base.exact && exp.exact && is_integer(exp.rat)) {
    if (base.rat == 0 && exp.rat < 0)
      throw Error(ErrorCode::ZeroToNegativePower, "0 raised to negative power");
    return {true, rat_pow(base.rat, numerator(exp.rat)), 0.0};
  }
  double b = base.as_double();
  double x = exp.as_double();
  if (b == 0.0) {
    if (x > 0) return {false, 0, 0.0};
    throw Error(ErrorCode::ZeroToNegativePower, "0 raised to non-positive power");
  }
  if (b < 0) {
    bool integral = exp.exact && is_integer(exp.rat);
    if (!integral)
      throw Error(ErrorCode::NonIntegerExponentNeedsPositiveBase,
                  "negative base with non-integer exponent");
    return {false, 0, std::pow(b, x)};
  }
  return {false, 0, std::pow(b, x)};
}

}  // namespace

NumericValue eval_numeric(const Expr& e, const NumericPoint& pt) {
  NumericValue sum{true, 0, 0.0};
  for (const auto& m : e.terms()) {
    NumericValue prod = eval_coeff(m.coeff, pt);
    for (const auto& [base, ev] : m.factors) {
      auto it = pt.assignments.find(base);
      if (it == pt.assignments.end())
        throw Error(ErrorCode::MissingAssignment, "no assignment for base " + base.name);
      prod = nv_mul(prod, nv_pow(it->second, eval_exponent(ev, pt)));
    }
    sum = nv_add(sum, prod);
  }
  return sum;
}

// --- rendering ----------------------------------------------------------------

namespace {

std::string base_str(const Base& b) {
  if (b.kind != Base::Kind::Jet || b.index.empty()) return b.name;
  std::string s = b.name + "[";
  for (size_t i = 0; i < b.index.size(); ++i) {
    if (i) s += ",";
    s += b.index[i];
  }
  s += "]";
  return s;
}

std::string rat_coeff_str(const Rational& c, bool in_product) {
  std::string s = rat_str(c);
  if (in_product && !is_integer(c)) return "(" + s + ")";
  return s;
}

std::string factor_str(const Base& b, const ExponentVector& ev) {
  std::string s = base_str(b);
  if (ev == ExponentVector::one()) return s;
  bool bare = ev.is_integer() && ev.constant > 0;
  if (!bare && ev.constant == 0 && ev.linear.size() == 1 &&
      ev.linear.begin()->second == 1)
    bare = true;  // u^p
  return s + "^" + (bare ? render_exponent(ev) : "(" + render_exponent(ev) + ")");
}

}  // namespace

std::string render_exponent(const ExponentVector& ev) {
  std::string s;
  bool first = true;
  for (const auto& [p, c] : ev.linear) {
    Rational a = c < 0 ? Rational(-c) : c;
    std::string term = a == 1 ? p : rat_coeff_str(a, true) + "*" + p;
    if (first) {
      s += (c < 0 ? "-" : "") + term;
      first = false;
    } else {
      s += (c < 0 ? "-" : "+") + term;
    }
  }
  if (ev.constant != 0 || first) {
    Rational c = ev.constant;
    if (first) {
      s += rat_str(c);
    } else {
      s += (c < 0 ? "-" : "+") + rat_str(c < 0 ? Rational(-c) : c);
    }
  }
  return s;
}

std::string render(const Expr& e) {
  if (e.is_zero()) return "0";
  std::string s;
  bool first = true;
  for (const auto& m : e.terms()) {
    std::string body;
    bool neg = false;
    auto cval = m.coeff.as_constant();
    if (m.factors.empty()) {
      if (cval) {
        Rational c = *cval;
        neg = c < 0;
        body = rat_coeff_str(neg ? Rational(-c) : c, false);
      } else {
        body = "(" + render(m.coeff) + ")";
      }
    } else {
      std::string prefix;
      if (cval) {
        Rational c = *cval;
        neg = c < 0;
        Rational a = neg ? Rational(-c) : c;
        if (a != 1) prefix = rat_coeff_str(a, true) + "*";
      } else {
        prefix = "(" + render(m.coeff) + ")*";
      }
      body = prefix;
      bool ff = true;
      for (const auto& [base, ev] : m.factors) {
        if (!ff) body += "*";
        body += factor_str(base, ev);
        ff = false;
      }
    }
    if (first) {
      s += (neg ? "-" : "") + body;
      first = false;
    } else {
      s += (neg ? " - " : " + ") + body;
    }
  }
  return s;
}

std::string render(const ExprVec& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += render(v[i]);
  }
  return s + ")";
}

}  // namespace jb
