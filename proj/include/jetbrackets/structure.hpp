#pragma once

// Determining-equation checks, multiplier classification, the three symmetry
// actions, Noether operator assembly, symplectic integrand, and the
// Hamiltonian/Lagrangian verification identities.

#include <optional>
#include <string>

#include "jetbrackets/linop.hpp"
#include "jetbrackets/system.hpp"

namespace jb {

enum class ActionKind { Action1 = 1, Action2 = 2, Action3 = 3 };

struct CheckReport {
  std::string subject;
  bool pass = false;
  ExprVec residual;     // zero tuple on pass
  std::string method;   // "on-solution" | "off-solution-R"
};

// Object-with-operator: the R operator is either fixture-supplied or, for
// evolution systems, computed from the reduced components on demand.
struct SymObject {
  std::string name;
  ExprVec components;
  std::optional<TotalDiffOp> R;
};

// Resolves the R-operator for an object (P' or -Q' for evolution systems,
// otherwise the fixture operator). Throws UnverifiableWithoutR.
TotalDiffOp resolve_R(const PDESystem& sys, const SymObject& obj, Side side);

// Determining equation check. For evolution systems the residual is the
// reduced linearization (adjoint linearization); otherwise the off-solution
// identity G'(P) = R_P(G) is checked through the fixture operator.
CheckReport check_determining(const PDESystem& sys, const SymObject& obj, Side side);

enum class MultiplierVerdict { Multiplier, NonMultiplier };

// General test: E_u(Q.G) = 0 identically for every dependent.
MultiplierVerdict classify_multiplier(const PDESystem& sys, const ExprVec& Q);
// Evolution-only self-adjointness test Q' = Q'^*; nullopt when inapplicable.
std::optional<MultiplierVerdict> classify_multiplier_selfadjoint(const PDESystem& sys,
                                                                 const ExprVec& Q);

// The three actions of a symmetry P on an adjoint-symmetry Q:
//   Action1 = R_P^*(Q) - R_Q^*(P)
//   Action2 = Q'(P) + R_P^*(Q)
//   Action3 = Q'(P) + R_Q^*(P)
// For evolution systems P and Q are first reduced on solutions and the R's
// are computed from the reduced forms.
ExprVec symmetry_action(const PDESystem& sys, ActionKind kind, const SymObject& P,
                        const SymObject& Q);

// Evolution shortcut for Action1: (E_u(P.Q), ...); used as a cross-check.
ExprVec action1_euler_form(const PDESystem& sys, const ExprVec& P, const ExprVec& Q);

// The Noether (pre-symplectic) operator J = Q' + R_Q^* (evolution: Q' - Q'^*).
TotalDiffOp noether_operator(const PDESystem& sys, const SymObject& Q);

// omega_Q(P1,P2) = P1.Q'(P2) - P2.Q'(P1) for evolution systems.
Expr symplectic_integrand(const PDESystem& sys, const ExprVec& Q, const ExprVec& P1,
                          const ExprVec& P2);
// Bilinear pairing through a Noether operator: P2 . J(P1).
Expr noether_pairing(const TotalDiffOp& J, const ExprVec& P1, const ExprVec& P2);

// Variational identities.
//   lagrangian:  op(G) == (E_u(density))_alpha
//   hamiltonian: lhs - op((E_u(density))_alpha) == G
CheckReport variational_check(const PDESystem& sys, const std::string& kind,
                              const TotalDiffOp& op, const Expr& density,
                              const ExprVec& lhs);

}  // namespace jb
