#pragma once

// Differential calculus on jet space: total derivatives, Frechet derivative
// and its formal adjoint, Euler operators, on-solution reduction, and the
// total-divergence test.

#include <string>
#include <vector>

#include "jetbrackets/expr.hpp"
#include "jetbrackets/system.hpp"

namespace jb {

// Multiset of independent variable names, kept sorted.
using MultiIndex = std::vector<std::string>;

Expr total_derivative(const Expr& e, const std::string& xi);
Expr total_derivative(const Expr& e, const MultiIndex& index);
ExprVec total_derivative(const ExprVec& v, const std::string& xi);

// Formal partial derivative with respect to a single jet coordinate (other
// coordinates held fixed).
Expr partial_jet(const Expr& e, const JetCoordinate& j);

// F'(P)^A = sum over jets of dF^A/du^beta_I * D_I P^beta. `deps` fixes the
// component order of the direction P.
ExprVec frechet(const ExprVec& F, const ExprVec& P, const std::vector<std::string>& deps);

// F'*(Q)_beta = sum (-D)_I (dF^A/du^beta_I * Q_A).
ExprVec frechet_adjoint(const ExprVec& F, const ExprVec& Q, const std::vector<std::string>& deps);

// Euler operator (variational derivative) with respect to one dependent.
Expr euler(const Expr& e, const std::string& dep);

// Eliminates every t-derivative through the evolution solved form; the result
// equals e on the solution space. Throws NoEvolutionForm otherwise.
Expr reduce_on_solutions(const Expr& e, const PDESystem& sys);
ExprVec reduce_on_solutions(const ExprVec& v, const PDESystem& sys);

// True iff every Euler operator annihilates e.
bool is_total_divergence(const Expr& e, const std::vector<std::string>& deps);

// Highest derivative order of any jet of `dep` occurring in e; -1 if none.
int jet_order(const Expr& e, const std::string& dep);

}  // namespace jb
