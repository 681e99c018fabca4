#pragma once

// Matrix linear operators in total derivatives with Expr coefficients.
// Houses G', G'*, the R_P/R_Q operators, Noether operators and the
// fixture-supplied Hamiltonian operators.

#include <string>
#include <vector>

#include "jetbrackets/expr.hpp"
#include "jetbrackets/jetcalc.hpp"
#include "jetbrackets/system.hpp"

namespace jb {

struct OpTerm {
  Expr coeff;
  MultiIndex index;  // sorted multiset of independent names
};

// Normalized: sorted by index, one term per index, no zero coefficients.
using OpEntry = std::vector<OpTerm>;

OpEntry entry_normalize(std::vector<OpTerm> terms);
OpEntry entry_add(const OpEntry& a, const OpEntry& b);
OpEntry entry_negate(const OpEntry& a);
// Left multiplication by a function: e * (c D_I) = (e c) D_I.
OpEntry entry_scale(const Expr& e, const OpEntry& a);
// Operator composition (a after b), expanded by the Leibniz rule.
OpEntry entry_compose(const OpEntry& a, const OpEntry& b);
// Formal adjoint of a single entry: V -> sum (-D)_I(c V) written back in
// coefficient-times-derivative form.
OpEntry entry_adjoint(const OpEntry& a);
Expr entry_apply(const OpEntry& a, const Expr& v);

struct TotalDiffOp {
  int rows = 0, cols = 0;
  std::vector<std::vector<OpEntry>> entries;  // [row][col]

  TotalDiffOp() = default;
  TotalDiffOp(int r, int c) : rows(r), cols(c), entries(r, std::vector<OpEntry>(c)) {}
  static TotalDiffOp zero(int r, int c) { return TotalDiffOp(r, c); }
  static TotalDiffOp identity(int n);
  bool is_zero() const;

  friend bool operator==(const TotalDiffOp& a, const TotalDiffOp& b);
};

ExprVec apply_op(const TotalDiffOp& L, const ExprVec& v);
TotalDiffOp adjoint_op(const TotalDiffOp& L);
TotalDiffOp compose(const TotalDiffOp& a, const TotalDiffOp& b);
TotalDiffOp op_add(const TotalDiffOp& a, const TotalDiffOp& b);
TotalDiffOp op_sub(const TotalDiffOp& a, const TotalDiffOp& b);
TotalDiffOp op_scale(const Rational& k, const TotalDiffOp& a);
TotalDiffOp op_negate(const TotalDiffOp& a);

// The Frechet derivative of a tuple as an operator: rows index F, columns
// index `deps`; entry (a,b) = sum_I dF^a/du^b_I D_I.
TotalDiffOp frechet_op(const ExprVec& F, const std::vector<std::string>& deps);

enum class Side { Symmetry, Adjoint };

// For an evolution system, R_P = P' and R_Q = -Q' computed from the reduced
// components.
TotalDiffOp extract_R_evolution(const PDESystem& sys, const ExprVec& components, Side side);

// Checks the off-solution identity G'(P) = R(G) (symmetry side) or
// G'*(Q) = R(G) (adjoint side) structurally in jet space.
bool verify_R(const PDESystem& sys, const ExprVec& components, const TotalDiffOp& R, Side side);

std::string render(const TotalDiffOp& op);
std::string render(const OpEntry& entry);

}  // namespace jb
