#pragma once

// Finite-dimensional Lie-algebra layer: symmetry commutators, decomposition
// over a basis with coefficients in the parameter field, dual-action matrix
// with kernel/cokernel analysis, inversion of the dual action, and the
// adjoint-symmetry bracket.

#include <optional>
#include <string>
#include <vector>

#include "jetbrackets/param.hpp"
#include "jetbrackets/structure.hpp"
#include "jetbrackets/system.hpp"

namespace jb {

using CoeffVec = std::vector<ParamScalar>;
using Matrix = std::vector<std::vector<ParamScalar>>;

// Evolutionary commutator, sign fixed so the fixture algebras reproduce
// exactly: [P,R] = R'(P) - P'(R).
ExprVec commutator(const ExprVec& P1, const ExprVec& P2, const std::vector<std::string>& deps);

// Exact coefficients with target = sum c_i basis_i, or nullopt when the
// target is not in the span. Throws DependentBasis when the basis is
// linearly dependent over the parameter field.
std::optional<CoeffVec> decompose(const ExprVec& target, const std::vector<ExprVec>& basis);

// Solves A x = b exactly; x is the unique solution when it exists. The
// matrix is rows x cols with cols = unknowns.
std::optional<CoeffVec> solve_unique(const Matrix& A, const CoeffVec& b, bool* dependent = nullptr);
// Nullspace basis of A.
std::vector<CoeffVec> nullspace(const Matrix& A);
int rank(const Matrix& A);

struct StructureConstants {
  std::vector<std::string> names;
  std::vector<std::vector<CoeffVec>> c;  // c[i][j] = coords of [B_i,B_j]
};

StructureConstants structure_constants(const std::vector<ExprVec>& basis,
                                       const std::vector<std::string>& names,
                                       const std::vector<std::string>& deps);

bool check_antisymmetry(const StructureConstants& sc);
bool check_jacobi(const StructureConstants& sc);

// Bracket of coordinate vectors through structure constants.
CoeffVec bracket_coords(const StructureConstants& sc, const CoeffVec& x, const CoeffVec& y);

struct DualActionAnalysis {
  Matrix action;                    // adj x sym: column j = coords of S_Q(P_j)
  std::vector<CoeffVec> kernel;     // over symmetry coordinates
  bool idealFlag = false;
  std::vector<CoeffVec> cokernel;   // complement used for inversion
  std::string policyUsed;           // "ideal-orthogonal" | "scaling"
};

// Builds the dual-action matrix by applying the symmetry action to each basis
// element and decomposing over the adjoint basis, then analyses the kernel.
// policy: "ideal" (orthogonal complement; requires ideal kernel for bracket
// use), "scaling" (weights of the designated scaling symmetry), or "auto".
DualActionAnalysis dual_action_analysis(const PDESystem& sys, ActionKind kind,
                                        const SymObject& Q,
                                        const std::vector<SymObject>& symBasis,
                                        const std::vector<ExprVec>& adjBasis,
                                        const StructureConstants& symAlgebra,
                                        const std::string& policy,
                                        const std::string& scalingName);

// As above but with a caller-supplied action matrix (augmented fixtures whose
// action columns come from a potential-variable realization).
DualActionAnalysis analyze_action_matrix(const Matrix& action,
                                         const StructureConstants& symAlgebra,
                                         const std::string& policy,
                                         const std::string& scalingName);

// S_Q^{-1} restricted to the chosen cokernel; NotInRange when the target is
// outside the range.
CoeffVec invert_dual_action(const DualActionAnalysis& da, const CoeffVec& target);

// The adjoint-symmetry bracket {Q1,Q2} = S_Q([S_Q^{-1}Q1, S_Q^{-1}Q2]) in
// adjoint coordinates. Throws IllDefinedBracket unless the kernel is an ideal
// or the scaling policy produced the cokernel.
CoeffVec adjsym_bracket(const DualActionAnalysis& da, const StructureConstants& symAlgebra,
                        const CoeffVec& q1, const CoeffVec& q2);

// Verifies that images[i] (coordinates in the symmetry algebra) define, after
// division by `scale`, a Lie-algebra isomorphism from the bracket algebra.
bool verify_isomorphism(const StructureConstants& symAlgebra,
                        const StructureConstants& bracketAlgebra,
                        const std::vector<CoeffVec>& images, const ParamScalar& scale);

std::string render(const CoeffVec& v, const std::vector<std::string>& names);

}  // namespace jb
