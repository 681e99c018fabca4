#include "jetbrackets/jetcalc.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace jb {

namespace {

// Derivative of a single base: D_xi(x_j) = delta, D_xi(param) = 0,
// D_xi(u_I) = u_{I + xi}.
Expr base_derivative(const Base& b, const std::string& xi) {
  switch (b.kind) {
    case Base::Kind::Independent:
      return b.name == xi ? Expr(Rational(1)) : Expr();
    case Base::Kind::Parameter:
      return Expr();
    case Base::Kind::Jet: {
      std::vector<std::string> idx = b.index;
      idx.push_back(xi);
      return Expr::jet(JetCoordinate(b.name, std::move(idx)));
    }
  }
  return Expr();
}

// d(base^ev) with the factor removed from `m`; Leibniz over the remaining
// factors is handled by the caller.
Expr factor_derivative(const Base& base, const ExponentVector& ev, const std::string& xi) {
  Expr db = base_derivative(base, xi);
  if (db.is_zero()) return Expr();
  ExponentVector down = ev - ExponentVector::one();
  return exponent_to_expr(ev) * Expr::symbol(base).pow(down) * db;
}

}  // namespace

Expr total_derivative(const Expr& e, const std::string& xi) {
  Expr out;
  for (const auto& m : e.terms()) {
    for (const auto& [base, ev] : m.factors) {
      Expr d = factor_derivative(base, ev, xi);
      if (d.is_zero()) continue;
      Monomial rest = m;
      rest.factors.erase(base);
      out += Expr::from_monomial(rest) * d;
    }
  }
  return out;
}

Expr total_derivative(const Expr& e, const MultiIndex& index) {
  Expr out = e;
  for (const auto& xi : index) out = total_derivative(out, xi);
  return out;
}

ExprVec total_derivative(const ExprVec& v, const std::string& xi) {
  ExprVec out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(total_derivative(e, xi));
  return out;
}

Expr partial_jet(const Expr& e, const JetCoordinate& j) {
  const Base jb_ = Base::jet(j);
  Expr out;
  for (const auto& m : e.terms()) {
    auto it = m.factors.find(jb_);
    if (it == m.factors.end()) continue;
    const ExponentVector& ev = it->second;
    Monomial rest = m;
    rest.factors.erase(jb_);
    ExponentVector down = ev - ExponentVector::one();
    out += Expr::from_monomial(rest) * exponent_to_expr(ev) * Expr::symbol(jb_).pow(down);
  }
  return out;
}

namespace {

// All distinct jet coordinates of `dep` appearing anywhere in e.
std::set<JetCoordinate> jets_of(const Expr& e, const std::string& dep) {
  std::set<JetCoordinate> out;
  for (const auto& m : e.terms())
    for (const auto& [base, ev] : m.factors)
      if (base.kind == Base::Kind::Jet && base.name == dep) out.insert(base.as_jet());
  return out;
}

}  // namespace

ExprVec frechet(const ExprVec& F, const ExprVec& P, const std::vector<std::string>& deps) {
  if (P.size() != deps.size())
    throw Error(ErrorCode::LengthMismatch, "direction length != dependent count");
  ExprVec out(F.size());
  for (size_t a = 0; a < F.size(); ++a) {
    Expr acc;
    for (size_t b = 0; b < deps.size(); ++b) {
      for (const auto& j : jets_of(F[a], deps[b])) {
        Expr coeff = partial_jet(F[a], j);
        if (coeff.is_zero()) continue;
        acc += coeff * total_derivative(P[b], j.index);
      }
    }
    out[a] = acc;
  }
  return out;
}

ExprVec frechet_adjoint(const ExprVec& F, const ExprVec& Q, const std::vector<std::string>& deps) {
  if (Q.size() != F.size())
    throw Error(ErrorCode::LengthMismatch, "cofactor length != equation count");
  ExprVec out(deps.size());
  for (size_t b = 0; b < deps.size(); ++b) {
    Expr acc;
    for (size_t a = 0; a < F.size(); ++a) {
      for (const auto& j : jets_of(F[a], deps[b])) {
        Expr coeff = partial_jet(F[a], j);
        if (coeff.is_zero()) continue;
        Expr term = total_derivative(coeff * Q[a], j.index);
        if (j.order() % 2 != 0) term = -term;
        acc += term;
      }
    }
    out[b] = acc;
  }
  return out;
}

Expr euler(const Expr& e, const std::string& dep) {
  Expr acc;
  for (const auto& j : jets_of(e, dep)) {
    Expr term = total_derivative(partial_jet(e, j), j.index);
    if (j.order() % 2 != 0) term = -term;
    acc += term;
  }
  return acc;
}

namespace {

// First jet base containing the evolution time variable, preferring the
// lowest total order so memoized replacements stay small.
std::optional<JetCoordinate> find_time_jet(const Expr& e, const PDESystem& sys) {
  const std::string& t = sys.evolution->timeVar;
  std::optional<JetCoordinate> best;
  for (const auto& m : e.terms()) {
    for (const auto& [base, ev] : m.factors) {
      if (base.kind != Base::Kind::Jet) continue;
      if (std::find(base.index.begin(), base.index.end(), t) == base.index.end()) continue;
      JetCoordinate j = base.as_jet();
      if (!best || j.order() < best->order()) best = j;
    }
  }
  return best;
}

}  // namespace

Expr reduce_on_solutions(const Expr& e, const PDESystem& sys) {
  if (!sys.is_evolution())
    throw Error(ErrorCode::NoEvolutionForm,
                "system " + sys.name + " has no evolution solved form");
  const std::string& t = sys.evolution->timeVar;
  std::map<JetCoordinate, Expr> memo;
  Expr cur = e;
  while (auto j = find_time_jet(cur, sys)) {
    auto it = memo.find(*j);
    if (it == memo.end()) {
      int dep = sys.dependent_index(j->dependent);
      if (dep < 0)
        throw Error(ErrorCode::Internal, "unknown dependent " + j->dependent);
      MultiIndex rest = j->index;
      rest.erase(std::find(rest.begin(), rest.end(), t));
      Expr replacement = total_derivative(sys.evolution->rhs[dep], rest);
      // The spatial derivatives of the solved form may themselves contain
      // t-derivatives when `rest` still holds t's; recurse until clean.
      replacement = reduce_on_solutions(replacement, sys);
      it = memo.emplace(*j, std::move(replacement)).first;
    }
    cur = substitute(cur, *j, it->second);
  }
  return cur;
}

ExprVec reduce_on_solutions(const ExprVec& v, const PDESystem& sys) {
  ExprVec out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(reduce_on_solutions(e, sys));
  return out;
}

bool is_total_divergence(const Expr& e, const std::vector<std::string>& deps) {
  for (const auto& dep : deps)
    if (!euler(e, dep).is_zero()) return false;
  return true;
}

int jet_order(const Expr& e, const std::string& dep) {
  int best = -1;
  for (const auto& m : e.terms())
    for (const auto& [base, ev] : m.factors)
      if (base.kind == Base::Kind::Jet && base.name == dep)
        best = std::max(best, static_cast<int>(base.index.size()));
  return best;
}

int PDESystem::dependent_index(const std::string& dep) const {
  for (size_t i = 0; i < dependents.size(); ++i)
    if (dependents[i] == dep) return static_cast<int>(i);
  return -1;
}

int PDESystem::independent_index(const std::string& x) const {
  for (size_t i = 0; i < independents.size(); ++i)
    if (independents[i] == x) return static_cast<int>(i);
  return -1;
}

bool PDESystem::is_parameter(const std::string& s) const {
  return std::find(parameters.begin(), parameters.end(), s) != parameters.end();
}

}  // namespace jb
