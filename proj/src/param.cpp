#include "jetbrackets/param.hpp"

#include <algorithm>
#include <set>

namespace jb {

namespace {

long total_degree(const PMonomial& m) {
  long d = 0;
  for (const auto& [v, e] : m) d += e;
  return d;
}

// Fixed term order: graded lexicographic (total degree first, then lex with
// alphabetically-earlier variables taking priority). This is a genuine
// monomial order (multiplicative), which exact division relies on.
bool pm_less(const PMonomial& a, const PMonomial& b) {
  long da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first != ib->first) {
      // The earlier-named variable carries a positive exponent in exactly one
      // monomial; that monomial is the larger one.
      return ib->first < ia->first;
    }
    if (ia->second != ib->second) return ia->second < ib->second;
    ++ia;
    ++ib;
  }
  return ia == a.end() && ib != b.end();
}

PMonomial pm_mul(const PMonomial& a, const PMonomial& b) {
  PMonomial r = a;
  for (const auto& [v, e] : b) {
    r[v] += e;
    if (r[v] == 0) r.erase(v);
  }
  return r;
}

// a / b if b divides a; nullopt otherwise.
std::optional<PMonomial> pm_div(const PMonomial& a, const PMonomial& b) {
  PMonomial r = a;
  for (const auto& [v, e] : b) {
    auto it = r.find(v);
    if (it == r.end() || it->second < e) return std::nullopt;
    it->second -= e;
    if (it->second == 0) r.erase(it);
  }
  return r;
}

}  // namespace

MultiPoly MultiPoly::constant(Rational c) {
  MultiPoly p;
  if (c != 0) p.terms[{}] = std::move(c);
  return p;
}

MultiPoly MultiPoly::var(const std::string& name) {
  MultiPoly p;
  p.terms[PMonomial{{name, 1}}] = 1;
  return p;
}

std::optional<Rational> MultiPoly::as_constant() const {
  if (terms.empty()) return Rational(0);
  if (terms.size() == 1 && terms.begin()->first.empty()) return terms.begin()->second;
  return std::nullopt;
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
  MultiPoly r = *this;
  for (const auto& [m, c] : o.terms) {
    Rational& slot = r.terms[m];
    slot += c;
    if (slot == 0) r.terms.erase(m);
  }
  return r;
}

MultiPoly MultiPoly::operator-() const {
  MultiPoly r;
  for (const auto& [m, c] : terms) r.terms[m] = -c;
  return r;
}

MultiPoly MultiPoly::operator-(const MultiPoly& o) const { return *this + (-o); }

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
  MultiPoly r;
  for (const auto& [ma, ca] : terms)
    for (const auto& [mb, cb] : o.terms) {
      PMonomial m = pm_mul(ma, mb);
      Rational& slot = r.terms[m];
      slot += ca * cb;
      if (slot == 0) r.terms.erase(m);
    }
  return r;
}

MultiPoly MultiPoly::scaled(const Rational& k) const {
  MultiPoly r;
  if (k == 0) return r;
  for (const auto& [m, c] : terms) r.terms[m] = c * k;
  return r;
}

std::pair<PMonomial, Rational> MultiPoly::leading() const {
  if (terms.empty()) throw Error(ErrorCode::Internal, "leading term of zero polynomial");
  auto best = terms.begin();
  for (auto it = std::next(terms.begin()); it != terms.end(); ++it)
    if (pm_less(best->first, it->first)) best = it;
  return *best;
}

namespace {

// --- recursive univariate view for the GCD --------------------------------

long degree_in(const MultiPoly& p, const std::string& x) {
  long d = 0;
  for (const auto& [m, c] : p.terms) {
    auto it = m.find(x);
    if (it != m.end()) d = std::max(d, it->second);
  }
  return d;
}

// Coefficient of x^k as a polynomial in the remaining variables.
MultiPoly coeff_of(const MultiPoly& p, const std::string& x, long k) {
  MultiPoly out;
  for (const auto& [m, c] : p.terms) {
    auto it = m.find(x);
    long e = it == m.end() ? 0 : it->second;
    if (e != k) continue;
    PMonomial rest = m;
    rest.erase(x);
    out.terms[rest] = c;
  }
  return out;
}

MultiPoly times_xk(const MultiPoly& p, const std::string& x, long k) {
  if (k == 0) return p;
  MultiPoly out;
  for (const auto& [m, c] : p.terms) {
    PMonomial mm = m;
    mm[x] += k;
    out.terms[mm] = c;
  }
  return out;
}

std::set<std::string> vars_of(const MultiPoly& p) {
  std::set<std::string> out;
  for (const auto& [m, c] : p.terms)
    for (const auto& [v, e] : m) out.insert(v);
  return out;
}

// Pseudo-remainder of a by b in variable x.
MultiPoly prem(MultiPoly a, const MultiPoly& b, const std::string& x) {
  long db = degree_in(b, x);
  MultiPoly lb = coeff_of(b, x, db);
  while (!a.is_zero()) {
    long da = degree_in(a, x);
    if (da < db) break;
    MultiPoly la = coeff_of(a, x, da);
    // a <- lb*a - la*x^(da-db)*b
    a = lb * a - times_xk(la, x, da - db) * b;
  }
  return a;
}

MultiPoly content_in(const MultiPoly& p, const std::string& x) {
  long d = degree_in(p, x);
  MultiPoly g;
  for (long k = 0; k <= d; ++k) {
    MultiPoly c = coeff_of(p, x, k);
    if (c.is_zero()) continue;
    g = g.is_zero() ? c : poly_gcd(g, c);
  }
  return g;
}

// Scales so the leading coefficient is 1 (makes GCD results deterministic).
MultiPoly monic(const MultiPoly& p) {
  if (p.is_zero()) return p;
  return p.scaled(1 / p.leading().second);
}

}  // namespace

MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b) {
  if (a.is_zero()) return monic(b);
  if (b.is_zero()) return monic(a);
  std::set<std::string> vars = vars_of(a);
  for (const auto& v : vars_of(b)) vars.insert(v);
  if (vars.empty()) return MultiPoly::constant(1);
  const std::string x = *vars.begin();

  MultiPoly ca = content_in(a, x), cb = content_in(b, x);
  MultiPoly A = poly_divexact(a, ca), B = poly_divexact(b, cb);
  if (degree_in(A, x) < degree_in(B, x)) std::swap(A, B);
  while (!B.is_zero()) {
    MultiPoly R = prem(A, B, x);
    A = B;
    if (R.is_zero()) {
      B = MultiPoly();
    } else {
      B = poly_divexact(R, content_in(R, x));
    }
  }
  MultiPoly cont = poly_gcd(ca, cb);
  if (degree_in(A, x) == 0) {
    // Primitive parts were coprime in x; only the content survives.
    return monic(cont);
  }
  return monic(cont * A);
}

MultiPoly poly_divexact(const MultiPoly& a, const MultiPoly& b) {
  if (b.is_zero()) throw Error(ErrorCode::DivisionByZero, "polynomial division by zero");
  MultiPoly rem = a, q;
  auto [lbm, lbc] = b.leading();
  while (!rem.is_zero()) {
    auto [lm, lc] = rem.leading();
    auto qm = pm_div(lm, lbm);
    if (!qm) throw Error(ErrorCode::Internal, "inexact polynomial division");
    MultiPoly qt;
    qt.terms[*qm] = lc / lbc;
    q = q + qt;
    rem = rem - qt * b;
  }
  return q;
}

std::string render(const MultiPoly& p) {
  if (p.is_zero()) return "0";
  // Deterministic: descending under the fixed order.
  std::vector<std::pair<PMonomial, Rational>> ts(p.terms.begin(), p.terms.end());
  std::sort(ts.begin(), ts.end(),
            [](const auto& a, const auto& b) { return pm_less(b.first, a.first); });
  std::string s;
  bool first = true;
  for (const auto& [m, c0] : ts) {
    Rational c = c0;
    bool neg = c < 0;
    if (neg) c = -c;
    std::string body;
    if (m.empty()) {
      body = rat_str(c);
    } else {
      if (c != 1) body = (is_integer(c) ? rat_str(c) : "(" + rat_str(c) + ")") + "*";
      bool ff = true;
      for (const auto& [v, e] : m) {
        if (!ff) body += "*";
        body += v;
        if (e != 1) body += "^" + std::to_string(e);
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

// --- ParamScalar -------------------------------------------------------------

ParamScalar::ParamScalar(MultiPoly num, MultiPoly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw Error(ErrorCode::DivisionByZero, "zero denominator");
  canonicalize();
}

ParamScalar ParamScalar::var(const std::string& name) {
  return ParamScalar(MultiPoly::var(name), MultiPoly::constant(1));
}

void ParamScalar::canonicalize() {
  if (num_.is_zero()) {
    den_ = MultiPoly::constant(1);
    return;
  }
  MultiPoly g = poly_gcd(num_, den_);
  if (!(g == MultiPoly::constant(1))) {
    num_ = poly_divexact(num_, g);
    den_ = poly_divexact(den_, g);
  }
  Rational lc = den_.leading().second;
  if (lc != 1) {
    num_ = num_.scaled(1 / lc);
    den_ = den_.scaled(1 / lc);
  }
}

std::optional<Rational> ParamScalar::as_constant() const {
  auto d = den_.as_constant();
  auto n = num_.as_constant();
  if (n && d) return *n / *d;
  return std::nullopt;
}

ParamScalar ParamScalar::operator+(const ParamScalar& o) const {
  return ParamScalar(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

ParamScalar ParamScalar::operator-() const {
  ParamScalar r = *this;
  r.num_ = -r.num_;
  return r;
}

ParamScalar ParamScalar::operator-(const ParamScalar& o) const { return *this + (-o); }

ParamScalar ParamScalar::operator*(const ParamScalar& o) const {
  return ParamScalar(num_ * o.num_, den_ * o.den_);
}

ParamScalar ParamScalar::operator/(const ParamScalar& o) const {
  if (o.is_zero()) throw Error(ErrorCode::DivisionByZero, "division by zero scalar");
  return ParamScalar(num_ * o.den_, den_ * o.num_);
}

ParamScalar ParamScalar::pow(long n) const {
  if (n == 0) return ParamScalar(Rational(1));
  ParamScalar base = n < 0 ? ParamScalar(Rational(1)) / *this : *this;
  long k = n < 0 ? -n : n;
  ParamScalar acc(Rational(1));
  for (long i = 0; i < k; ++i) acc = acc * base;
  return acc;
}

namespace {

MultiPoly poly_instantiate(const MultiPoly& p, const std::map<std::string, Rational>& values) {
  MultiPoly out;
  for (const auto& [m, c] : p.terms) {
    Rational coeff = c;
    PMonomial rest;
    for (const auto& [v, e] : m) {
      auto it = values.find(v);
      if (it == values.end()) {
        rest[v] = e;
      } else {
        coeff *= rat_pow(it->second, BigInt(e));
      }
    }
    MultiPoly t;
    t.terms[rest] = coeff;
    out = out + t;
  }
  return out;
}

}  // namespace

ParamScalar ParamScalar::instantiate(const std::map<std::string, Rational>& values) const {
  MultiPoly n = poly_instantiate(num_, values);
  MultiPoly d = poly_instantiate(den_, values);
  if (d.is_zero())
    throw Error(ErrorCode::DivisionByZero, "denominator vanishes at instantiation");
  return ParamScalar(std::move(n), std::move(d));
}

std::string render(const ParamScalar& s) {
  if (s.den() == MultiPoly::constant(1)) return render(s.num());
  return "(" + render(s.num()) + ")/(" + render(s.den()) + ")";
}

std::optional<AffineForm> as_affine(const ParamScalar& s) {
  auto d = s.den().as_constant();
  if (!d) return std::nullopt;
  AffineForm out;
  out.constant = 0;
  for (const auto& [m, c] : s.num().terms) {
    if (m.empty()) {
      out.constant += c / *d;
    } else if (m.size() == 1 && m.begin()->second == 1) {
      out.linear[m.begin()->first] += c / *d;
    } else {
      return std::nullopt;
    }
  }
  std::erase_if(out.linear, [](const auto& kv) { return kv.second == 0; });
  return out;
}

}  // namespace jb
