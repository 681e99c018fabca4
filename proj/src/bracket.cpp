#include "jetbrackets/bracket.hpp"

#include <algorithm>
#include <map>

#include "jetbrackets/jetcalc.hpp"

namespace jb {

ExprVec commutator(const ExprVec& P1, const ExprVec& P2, const std::vector<std::string>& deps) {
  ExprVec a = frechet(P2, P1, deps);
  ExprVec b = frechet(P1, P2, deps);
  ExprVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// --- vectorization over the parameter field ----------------------------------

namespace {

// Key: component index plus the parameter-free shape of a monomial.
struct VecKey {
  size_t comp;
  FactorMap shape;
  friend bool operator<(const VecKey& a, const VecKey& b) {
    if (a.comp != b.comp) return a.comp < b.comp;
    return factor_map_less(a.shape, b.shape);
  }
};

// Splits a tuple of Exprs into a sparse vector over VecKeys; monomial
// coefficients already live in the parameter field.
std::map<VecKey, ParamScalar> vectorize(const ExprVec& v) {
  std::map<VecKey, ParamScalar> out;
  for (size_t comp = 0; comp < v.size(); ++comp) {
    for (const auto& m : v[comp].terms()) {
      VecKey key{comp, m.factors};
      auto it = out.find(key);
      if (it == out.end()) {
        out.emplace(std::move(key), m.coeff);
      } else {
        it->second = it->second + m.coeff;
        if (it->second.is_zero()) out.erase(it);
      }
    }
  }
  return out;
}

// Reduced row echelon elimination; returns pivot column of each row.
struct Echelon {
  Matrix rows;       // augmented or plain
  std::vector<int> pivots;
};

Echelon rref(Matrix a) {
  Echelon e;
  size_t nrows = a.size();
  size_t ncols = nrows ? a[0].size() : 0;
  size_t r = 0;
  for (size_t c = 0; c < ncols && r < nrows; ++c) {
    size_t piv = r;
    while (piv < nrows && a[piv][c].is_zero()) ++piv;
    if (piv == nrows) continue;
    std::swap(a[r], a[piv]);
    ParamScalar inv = ParamScalar(Rational(1)) / a[r][c];
    for (size_t j = c; j < ncols; ++j) a[r][j] = a[r][j] * inv;
    for (size_t i = 0; i < nrows; ++i) {
      if (i == r || a[i][c].is_zero()) continue;
      ParamScalar f = a[i][c];
      for (size_t j = c; j < ncols; ++j) a[i][j] = a[i][j] - f * a[r][j];
    }
    e.pivots.push_back(static_cast<int>(c));
    ++r;
  }
  e.rows = std::move(a);
  return e;
}

}  // namespace

std::optional<CoeffVec> solve_unique(const Matrix& A, const CoeffVec& b, bool* dependent) {
  size_t nrows = A.size();
  size_t ncols = nrows ? A[0].size() : 0;
  Matrix aug(nrows, CoeffVec(ncols + 1, ParamScalar(Rational(0))));
  for (size_t i = 0; i < nrows; ++i) {
    for (size_t j = 0; j < ncols; ++j) aug[i][j] = A[i][j];
    aug[i][ncols] = b[i];
  }
  Echelon e = rref(std::move(aug));
  if (dependent) *dependent = false;
  // Inconsistency: pivot in the augmented column.
  for (size_t i = 0; i < e.pivots.size(); ++i)
    if (e.pivots[i] == static_cast<int>(ncols)) return std::nullopt;
  size_t rankA = e.pivots.size();
  if (rankA < ncols) {
    if (dependent) *dependent = true;
    return std::nullopt;
  }
  CoeffVec x(ncols, ParamScalar(Rational(0)));
  for (size_t i = 0; i < rankA; ++i) x[e.pivots[i]] = e.rows[i][ncols];
  return x;
}

std::vector<CoeffVec> nullspace(const Matrix& A) {
  size_t nrows = A.size();
  size_t ncols = nrows ? A[0].size() : 0;
  if (ncols == 0) return {};
  Echelon e = rref(A);
  std::vector<bool> isPivot(ncols, false);
  for (int p : e.pivots) isPivot[p] = true;
  std::vector<CoeffVec> out;
  for (size_t freeCol = 0; freeCol < ncols; ++freeCol) {
    if (isPivot[freeCol]) continue;
    CoeffVec v(ncols, ParamScalar(Rational(0)));
    v[freeCol] = ParamScalar(Rational(1));
    for (size_t i = 0; i < e.pivots.size(); ++i)
      v[e.pivots[i]] = -e.rows[i][freeCol];
    out.push_back(std::move(v));
  }
  return out;
}

int rank(const Matrix& A) { return static_cast<int>(rref(A).pivots.size()); }

std::optional<CoeffVec> decompose(const ExprVec& target, const std::vector<ExprVec>& basis) {
  if (basis.empty()) throw Error(ErrorCode::DependentBasis, "empty basis");
  for (const auto& b : basis)
    if (b.size() != target.size())
      throw Error(ErrorCode::LengthMismatch, "basis/target component count mismatch");
  auto tv = vectorize(target);
  std::vector<std::map<VecKey, ParamScalar>> bv;
  bv.reserve(basis.size());
  for (const auto& b : basis) bv.push_back(vectorize(b));
  // Union of keys.
  std::map<VecKey, size_t> keyIndex;
  auto addKeys = [&](const std::map<VecKey, ParamScalar>& m) {
    for (const auto& [k, s] : m) keyIndex.emplace(k, 0);
  };
  addKeys(tv);
  for (const auto& m : bv) addKeys(m);
  size_t idx = 0;
  for (auto& [k, i] : keyIndex) i = idx++;
  Matrix A(keyIndex.size(), CoeffVec(basis.size(), ParamScalar(Rational(0))));
  CoeffVec rhs(keyIndex.size(), ParamScalar(Rational(0)));
  for (const auto& [k, s] : tv) rhs[keyIndex[k]] = s;
  for (size_t j = 0; j < bv.size(); ++j)
    for (const auto& [k, s] : bv[j]) A[keyIndex[k]][j] = s;
  bool dependent = false;
  auto x = solve_unique(A, rhs, &dependent);
  if (dependent)
    throw Error(ErrorCode::DependentBasis, "basis is linearly dependent over the parameter field");
  return x;
}

StructureConstants structure_constants(const std::vector<ExprVec>& basis,
                                       const std::vector<std::string>& names,
                                       const std::vector<std::string>& deps) {
  StructureConstants sc;
  sc.names = names;
  size_t n = basis.size();
  sc.c.assign(n, std::vector<CoeffVec>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      ExprVec br = commutator(basis[i], basis[j], deps);
      bool zero = true;
      for (const auto& e : br)
        if (!e.is_zero()) zero = false;
      if (zero) {
        sc.c[i][j] = CoeffVec(n, ParamScalar(Rational(0)));
        continue;
      }
      auto coeffs = decompose(br, basis);
      if (!coeffs)
        throw Error(ErrorCode::NotInSpan,
                    "commutator [" + names[i] + "," + names[j] + "] is not in the basis span");
      sc.c[i][j] = *coeffs;
    }
  }
  return sc;
}

bool check_antisymmetry(const StructureConstants& sc) {
  size_t n = sc.names.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < n; ++k)
        if (!(sc.c[i][j][k] + sc.c[j][i][k]).is_zero()) return false;
  return true;
}

bool check_jacobi(const StructureConstants& sc) {
  size_t n = sc.names.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t k = 0; k < n; ++k)
        for (size_t l = 0; l < n; ++l) {
          ParamScalar acc(Rational(0));
          for (size_t m = 0; m < n; ++m) {
            acc += sc.c[i][j][m] * sc.c[m][k][l];
            acc += sc.c[j][k][m] * sc.c[m][i][l];
            acc += sc.c[k][i][m] * sc.c[m][j][l];
          }
          if (!acc.is_zero()) return false;
        }
  return true;
}

CoeffVec bracket_coords(const StructureConstants& sc, const CoeffVec& x, const CoeffVec& y) {
  size_t n = sc.names.size();
  CoeffVec out(n, ParamScalar(Rational(0)));
  for (size_t i = 0; i < n; ++i) {
    if (x[i].is_zero()) continue;
    for (size_t j = 0; j < n; ++j) {
      if (y[j].is_zero()) continue;
      ParamScalar f = x[i] * y[j];
      for (size_t k = 0; k < n; ++k) out[k] += f * sc.c[i][j][k];
    }
  }
  return out;
}

namespace {

bool in_span(const std::vector<CoeffVec>& vectors, const CoeffVec& v) {
  if (vectors.empty()) {
    for (const auto& s : v)
      if (!s.is_zero()) return false;
    return true;
  }
  size_t n = v.size();
  Matrix A(n, CoeffVec(vectors.size(), ParamScalar(Rational(0))));
  for (size_t j = 0; j < vectors.size(); ++j)
    for (size_t i = 0; i < n; ++i) A[i][j] = vectors[j][i];
  Matrix aug = A;
  for (size_t i = 0; i < n; ++i) aug[i].push_back(v[i]);
  return rank(A) == rank(aug);
}

bool is_ideal(const std::vector<CoeffVec>& kernel, const StructureConstants& sc) {
  size_t n = sc.names.size();
  for (const auto& k : kernel) {
    for (size_t j = 0; j < n; ++j) {
      CoeffVec ej(n, ParamScalar(Rational(0)));
      ej[j] = ParamScalar(Rational(1));
      CoeffVec br = bracket_coords(sc, k, ej);
      if (!in_span(kernel, br)) return false;
    }
  }
  return true;
}

// Scaling weights: requires every coordinate basis element to be an
// eigenvector of ad(scaling); returns the weights.
std::vector<ParamScalar> scaling_weights(const StructureConstants& sc, size_t s) {
  size_t n = sc.names.size();
  std::vector<ParamScalar> w(n, ParamScalar(Rational(0)));
  for (size_t j = 0; j < n; ++j) {
    const CoeffVec& v = sc.c[j][s];
    for (size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      if (!v[k].is_zero())
        throw Error(ErrorCode::NoScalingSymmetry,
                    "basis element " + sc.names[j] + " is not scaling-homogeneous");
    }
    w[j] = v[j];
  }
  return w;
}

}  // namespace

DualActionAnalysis analyze_action_matrix(const Matrix& action,
                                         const StructureConstants& symAlgebra,
                                         const std::string& policy,
                                         const std::string& scalingName) {
  DualActionAnalysis da;
  da.action = action;
  da.kernel = nullspace(action);
  da.idealFlag = is_ideal(da.kernel, symAlgebra);
  size_t n = symAlgebra.names.size();

  bool wantScaling = policy == "scaling" || (policy == "auto" && !da.idealFlag);
  if (wantScaling) {
    if (scalingName.empty())
      throw Error(ErrorCode::NoScalingSymmetry, "scaling policy requested but no scaling symmetry designated");
    size_t s = n;
    for (size_t i = 0; i < n; ++i)
      if (symAlgebra.names[i] == scalingName) s = i;
    if (s == n)
      throw Error(ErrorCode::NoScalingSymmetry, "unknown scaling symmetry " + scalingName);
    std::vector<ParamScalar> w = scaling_weights(symAlgebra, s);
    // Kernel vectors must be weight-homogeneous.
    std::vector<ParamScalar> kernelWeights;
    for (const auto& k : da.kernel) {
      std::optional<ParamScalar> kw;
      for (size_t j = 0; j < n; ++j) {
        if (k[j].is_zero()) continue;
        if (!kw)
          kw = w[j];
        else if (!(*kw == w[j]))
          throw Error(ErrorCode::NoScalingSymmetry, "kernel is not scaling-homogeneous");
      }
      if (kw) kernelWeights.push_back(*kw);
    }
    for (size_t j = 0; j < n; ++j) {
      bool clash = false;
      for (const auto& kw : kernelWeights)
        if (kw == w[j]) clash = true;
      if (!clash) {
        CoeffVec ej(n, ParamScalar(Rational(0)));
        ej[j] = ParamScalar(Rational(1));
        da.cokernel.push_back(std::move(ej));
      }
    }
    if (da.cokernel.size() + da.kernel.size() != n)
      throw Error(ErrorCode::NoScalingSymmetry,
                  "scaling weights do not split the kernel off cleanly");
    da.policyUsed = "scaling";
    return da;
  }

  // Orthogonal complement of the kernel in the coordinate basis.
  if (da.kernel.empty()) {
    for (size_t j = 0; j < n; ++j) {
      CoeffVec ej(n, ParamScalar(Rational(0)));
      ej[j] = ParamScalar(Rational(1));
      da.cokernel.push_back(std::move(ej));
    }
  } else {
    Matrix K(da.kernel.size(), CoeffVec(n, ParamScalar(Rational(0))));
    for (size_t i = 0; i < da.kernel.size(); ++i) K[i] = da.kernel[i];
    da.cokernel = nullspace(K);
  }
  da.policyUsed = "ideal-orthogonal";
  return da;
}

DualActionAnalysis dual_action_analysis(const PDESystem& sys, ActionKind kind,
                                        const SymObject& Q,
                                        const std::vector<SymObject>& symBasis,
                                        const std::vector<ExprVec>& adjBasis,
                                        const StructureConstants& symAlgebra,
                                        const std::string& policy,
                                        const std::string& scalingName) {
  size_t nsym = symBasis.size(), nadj = adjBasis.size();
  Matrix action(nadj, CoeffVec(nsym, ParamScalar(Rational(0))));
  for (size_t j = 0; j < nsym; ++j) {
    ExprVec out = symmetry_action(sys, kind, symBasis[j], Q);
    bool zero = true;
    for (const auto& e : out)
      if (!e.is_zero()) zero = false;
    if (zero) continue;
    auto coeffs = decompose(out, adjBasis);
    if (!coeffs)
      throw Error(ErrorCode::NotInSpan,
                  "action of " + symBasis[j].name + " is not in the adjoint basis span");
    for (size_t i = 0; i < nadj; ++i) action[i][j] = (*coeffs)[i];
  }
  return analyze_action_matrix(action, symAlgebra, policy, scalingName);
}

CoeffVec invert_dual_action(const DualActionAnalysis& da, const CoeffVec& target) {
  size_t nadj = da.action.size();
  size_t nsym = nadj ? da.action[0].size() : 0;
  size_t ncoker = da.cokernel.size();
  if (ncoker == 0) throw Error(ErrorCode::NotInRange, "empty cokernel");
  // Solve (A * C) y = target where C stacks cokernel vectors as columns.
  Matrix AC(nadj, CoeffVec(ncoker, ParamScalar(Rational(0))));
  for (size_t i = 0; i < nadj; ++i)
    for (size_t j = 0; j < ncoker; ++j) {
      ParamScalar acc(Rational(0));
      for (size_t k = 0; k < nsym; ++k) acc += da.action[i][k] * da.cokernel[j][k];
      AC[i][j] = acc;
    }
  bool dependent = false;
  auto y = solve_unique(AC, target, &dependent);
  if (dependent)
    throw Error(ErrorCode::DependentBasis, "cokernel maps to a dependent set under the action");
  if (!y) throw Error(ErrorCode::NotInRange, "target is not in the range of the dual action");
  CoeffVec x(nsym, ParamScalar(Rational(0)));
  for (size_t j = 0; j < ncoker; ++j)
    for (size_t k = 0; k < nsym; ++k) x[k] += (*y)[j] * da.cokernel[j][k];
  return x;
}

CoeffVec adjsym_bracket(const DualActionAnalysis& da, const StructureConstants& symAlgebra,
                        const CoeffVec& q1, const CoeffVec& q2) {
  if (!da.idealFlag && da.policyUsed != "scaling")
    throw Error(ErrorCode::IllDefinedBracket,
                "kernel is not an ideal and no scaling decomposition applies");
  CoeffVec x1 = invert_dual_action(da, q1);
  CoeffVec x2 = invert_dual_action(da, q2);
  CoeffVec z = bracket_coords(symAlgebra, x1, x2);
  size_t nadj = da.action.size();
  size_t nsym = nadj ? da.action[0].size() : 0;
  CoeffVec out(nadj, ParamScalar(Rational(0)));
  for (size_t i = 0; i < nadj; ++i)
    for (size_t k = 0; k < nsym; ++k) out[i] += da.action[i][k] * z[k];
  return out;
}

bool verify_isomorphism(const StructureConstants& symAlgebra,
                        const StructureConstants& bracketAlgebra,
                        const std::vector<CoeffVec>& images, const ParamScalar& scale) {
  size_t n = bracketAlgebra.names.size();
  if (images.size() != n) return false;
  size_t nsym = symAlgebra.names.size();
  // Injectivity: the images must be linearly independent.
  Matrix M(nsym, CoeffVec(n, ParamScalar(Rational(0))));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < nsym; ++i) M[i][j] = images[j][i];
  if (rank(M) != static_cast<int>(n)) return false;
  // Homomorphism with declared scale: [t_i, t_j] = scale * sum_k c^k_ij t_k.
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      CoeffVec lhs = bracket_coords(symAlgebra, images[i], images[j]);
      CoeffVec rhs(nsym, ParamScalar(Rational(0)));
      for (size_t k = 0; k < n; ++k)
        for (size_t s = 0; s < nsym; ++s)
          rhs[s] += scale * bracketAlgebra.c[i][j][k] * images[k][s];
      for (size_t s = 0; s < nsym; ++s)
        if (!(lhs[s] - rhs[s]).is_zero()) return false;
    }
  }
  return true;
}

std::string render(const CoeffVec& v, const std::vector<std::string>& names) {
  std::string s;
  bool first = true;
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_zero()) continue;
    std::string cs = render(v[i]);
    std::string piece;
    bool neg = false;
    if (cs == "1") {
      piece = names[i];
    } else if (cs == "-1") {
      piece = names[i];
      neg = true;
    } else {
      if (!cs.empty() && cs[0] == '-') {
        neg = true;
        cs = cs.substr(1);
      }
      bool paren = cs.find_first_of("+- ") != std::string::npos;
      piece = (paren ? "(" + cs + ")" : cs) + "*" + names[i];
    }
    if (first) {
      s += (neg ? "-" : "") + piece;
      first = false;
    } else {
      s += (neg ? " - " : " + ") + piece;
    }
  }
  return first ? "0" : s;
}

}  // namespace jb
