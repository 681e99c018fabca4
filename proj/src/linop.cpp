#include "jetbrackets/linop.hpp"

#include <algorithm>
#include <map>

namespace jb {

namespace {

// Multiset as (name, count) pairs for subset enumeration.
std::vector<std::pair<std::string, int>> counted(const MultiIndex& I) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& x : I) {
    if (!out.empty() && out.back().first == x)
      out.back().second++;
    else
      out.emplace_back(x, 1);
  }
  return out;
}

Rational binom(int n, int k) {
  Rational r = 1;
  for (int i = 0; i < k; ++i) r = r * Rational(n - i) / Rational(i + 1);
  return r;
}

// Enumerates all sub-multisets J of I, invoking fn(J, I \ J, multinomial).
void for_each_subset(const MultiIndex& I,
                     const std::function<void(const MultiIndex&, const MultiIndex&, const Rational&)>& fn) {
  auto groups = counted(I);
  std::vector<int> pick(groups.size(), 0);
  while (true) {
    MultiIndex J, rest;
    Rational mult = 1;
    for (size_t g = 0; g < groups.size(); ++g) {
      for (int i = 0; i < pick[g]; ++i) J.push_back(groups[g].first);
      for (int i = pick[g]; i < groups[g].second; ++i) rest.push_back(groups[g].first);
      mult *= binom(groups[g].second, pick[g]);
    }
    fn(J, rest, mult);
    size_t g = 0;
    while (g < groups.size()) {
      if (pick[g] < groups[g].second) {
        pick[g]++;
        break;
      }
      pick[g] = 0;
      ++g;
    }
    if (g == groups.size()) break;
  }
}

MultiIndex merged(MultiIndex a, const MultiIndex& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

OpEntry entry_normalize(std::vector<OpTerm> terms) {
  std::map<MultiIndex, Expr> acc;
  for (auto& t : terms) {
    std::sort(t.index.begin(), t.index.end());
    if (t.coeff.is_zero()) continue;
    acc[t.index] += t.coeff;
  }
  OpEntry out;
  for (auto& [idx, coeff] : acc)
    if (!coeff.is_zero()) out.push_back({std::move(coeff), idx});
  return out;
}

OpEntry entry_add(const OpEntry& a, const OpEntry& b) {
  std::vector<OpTerm> ts = a;
  ts.insert(ts.end(), b.begin(), b.end());
  return entry_normalize(std::move(ts));
}

OpEntry entry_negate(const OpEntry& a) {
  OpEntry out = a;
  for (auto& t : out) t.coeff = -t.coeff;
  return out;
}

OpEntry entry_scale(const Expr& e, const OpEntry& a) {
  std::vector<OpTerm> ts;
  for (const auto& t : a) ts.push_back({e * t.coeff, t.index});
  return entry_normalize(std::move(ts));
}

OpEntry entry_compose(const OpEntry& a, const OpEntry& b) {
  std::vector<OpTerm> ts;
  for (const auto& ta : a) {
    for (const auto& tb : b) {
      // c D_I (d D_J v) = c sum_{K subset I} binom D_{I\K}(d) D_{K+J} v
      for_each_subset(ta.index, [&](const MultiIndex& K, const MultiIndex& rest, const Rational& mult) {
        Expr coeff = ta.coeff * total_derivative(tb.coeff, rest);
        if (coeff.is_zero()) return;
        ts.push_back({coeff.scaled(mult), merged(K, tb.index)});
      });
    }
  }
  return entry_normalize(std::move(ts));
}

OpEntry entry_adjoint(const OpEntry& a) {
  std::vector<OpTerm> ts;
  for (const auto& t : a) {
    Rational sign = (t.index.size() % 2 == 0) ? 1 : -1;
    // (c D_I)^* v = (-1)^{|I|} D_I(c v) = (-1)^{|I|} sum binom D_{I\J}(c) D_J v
    for_each_subset(t.index, [&](const MultiIndex& J, const MultiIndex& rest, const Rational& mult) {
      Expr coeff = total_derivative(t.coeff, rest);
      if (coeff.is_zero()) return;
      ts.push_back({coeff.scaled(sign * mult), J});
    });
  }
  return entry_normalize(std::move(ts));
}

Expr entry_apply(const OpEntry& a, const Expr& v) {
  Expr out;
  for (const auto& t : a) out += t.coeff * total_derivative(v, t.index);
  return out;
}

TotalDiffOp TotalDiffOp::identity(int n) {
  TotalDiffOp op(n, n);
  for (int i = 0; i < n; ++i)
    op.entries[i][i] = entry_normalize({{Expr(Rational(1)), {}}});
  return op;
}

bool TotalDiffOp::is_zero() const {
  for (const auto& row : entries)
    for (const auto& e : row)
      if (!e.empty()) return false;
  return true;
}

bool operator==(const TotalDiffOp& a, const TotalDiffOp& b) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      const auto& x = a.entries[i][j];
      const auto& y = b.entries[i][j];
      if (x.size() != y.size()) return false;
      for (size_t k = 0; k < x.size(); ++k)
        if (x[k].index != y[k].index || !(x[k].coeff == y[k].coeff)) return false;
    }
  return true;
}

ExprVec apply_op(const TotalDiffOp& L, const ExprVec& v) {
  if (static_cast<int>(v.size()) != L.cols)
    throw Error(ErrorCode::ShapeMismatch,
                "operator has " + std::to_string(L.cols) + " columns, argument has " +
                    std::to_string(v.size()) + " components");
  ExprVec out(L.rows);
  for (int i = 0; i < L.rows; ++i) {
    Expr acc;
    for (int j = 0; j < L.cols; ++j) acc += entry_apply(L.entries[i][j], v[j]);
    out[i] = acc;
  }
  return out;
}

TotalDiffOp adjoint_op(const TotalDiffOp& L) {
  TotalDiffOp out(L.cols, L.rows);
  for (int i = 0; i < L.rows; ++i)
    for (int j = 0; j < L.cols; ++j) out.entries[j][i] = entry_adjoint(L.entries[i][j]);
  return out;
}

TotalDiffOp compose(const TotalDiffOp& a, const TotalDiffOp& b) {
  if (a.cols != b.rows) throw Error(ErrorCode::ShapeMismatch, "composition shape mismatch");
  TotalDiffOp out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      OpEntry acc;
      for (int k = 0; k < a.cols; ++k)
        acc = entry_add(acc, entry_compose(a.entries[i][k], b.entries[k][j]));
      out.entries[i][j] = acc;
    }
  return out;
}

TotalDiffOp op_add(const TotalDiffOp& a, const TotalDiffOp& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw Error(ErrorCode::ShapeMismatch, "operator sum shape mismatch");
  TotalDiffOp out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      out.entries[i][j] = entry_add(a.entries[i][j], b.entries[i][j]);
  return out;
}

TotalDiffOp op_sub(const TotalDiffOp& a, const TotalDiffOp& b) {
  return op_add(a, op_negate(b));
}

TotalDiffOp op_scale(const Rational& k, const TotalDiffOp& a) {
  TotalDiffOp out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      out.entries[i][j] = entry_scale(Expr(k), a.entries[i][j]);
  return out;
}

TotalDiffOp op_negate(const TotalDiffOp& a) { return op_scale(Rational(-1), a); }

TotalDiffOp frechet_op(const ExprVec& F, const std::vector<std::string>& deps) {
  TotalDiffOp out(static_cast<int>(F.size()), static_cast<int>(deps.size()));
  for (size_t a = 0; a < F.size(); ++a) {
    for (size_t b = 0; b < deps.size(); ++b) {
      std::vector<OpTerm> ts;
      // Collect distinct jets of deps[b] in F[a].
      std::map<MultiIndex, Expr> coeffs;
      for (const auto& m : F[a].terms())
        for (const auto& [base, ev] : m.factors)
          if (base.kind == Base::Kind::Jet && base.name == deps[b])
            coeffs.emplace(base.index, Expr());
      for (auto& [idx, c] : coeffs) {
        c = partial_jet(F[a], JetCoordinate(deps[b], idx));
        if (!c.is_zero()) ts.push_back({c, idx});
      }
      out.entries[a][b] = entry_normalize(std::move(ts));
    }
  }
  return out;
}

TotalDiffOp extract_R_evolution(const PDESystem& sys, const ExprVec& components, Side side) {
  if (!sys.is_evolution())
    throw Error(ErrorCode::NoEvolutionForm,
                "R-operator extraction requires an evolution solved form");
  ExprVec reduced = reduce_on_solutions(components, sys);
  TotalDiffOp fr = frechet_op(reduced, sys.dependents);
  return side == Side::Symmetry ? fr : op_negate(fr);
}

bool verify_R(const PDESystem& sys, const ExprVec& components, const TotalDiffOp& R, Side side) {
  if (side == Side::Symmetry) {
    if (R.rows != sys.equationCount() || R.cols != sys.equationCount())
      throw Error(ErrorCode::ShapeMismatch, "R_P must be MxM");
    ExprVec lhs = frechet(sys.equations, components, sys.dependents);
    ExprVec rhs = apply_op(R, sys.equations);
    return lhs == rhs;
  }
  if (R.rows != sys.dependentCount() || R.cols != sys.equationCount())
    throw Error(ErrorCode::ShapeMismatch, "R_Q must be m x M");
  ExprVec lhs = frechet_adjoint(sys.equations, components, sys.dependents);
  ExprVec rhs = apply_op(R, sys.equations);
  return lhs == rhs;
}

std::string render(const OpEntry& entry) {
  if (entry.empty()) return "0";
  std::string s;
  bool first = true;
  // Highest-order derivative terms first.
  std::vector<OpTerm> ordered(entry.rbegin(), entry.rend());
  for (const auto& t : ordered) {
    std::string piece;
    std::string dstr;
    if (!t.index.empty()) {
      dstr = "D[";
      for (size_t i = 0; i < t.index.size(); ++i) {
        if (i) dstr += ",";
        dstr += t.index[i];
      }
      dstr += "]";
    }
    Expr c = t.coeff;
    bool neg = false;
    if (c.terms().size() == 1) {
      auto cv = c.terms()[0].coeff.as_constant();
      if (cv && *cv < 0) {
        neg = true;
        c = -c;
      }
    }
    std::string cstr = render(c);
    if (dstr.empty()) {
      piece = cstr;
    } else if (cstr == "1") {
      piece = dstr;
    } else {
      if (c.terms().size() > 1) cstr = "(" + cstr + ")";
      piece = cstr + "*" + dstr;
    }
    if (first) {
      s += (neg ? "-" : "") + piece;
      first = false;
    } else {
      s += (neg ? " - " : " + ") + piece;
    }
  }
  return s;
}

std::string render(const TotalDiffOp& op) {
  std::string s = "[";
  for (int i = 0; i < op.rows; ++i) {
    if (i) s += ", ";
    s += "[";
    for (int j = 0; j < op.cols; ++j) {
      if (j) s += ", ";
      s += render(op.entries[i][j]);
    }
    s += "]";
  }
  return s + "]";
}

}  // namespace jb
