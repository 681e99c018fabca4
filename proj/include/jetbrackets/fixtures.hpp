#pragma once

// Machine-readable encodings of the example systems, their symmetry and
// adjoint-symmetry bases, R-operators and golden tables. Fixtures are .sys
// files shipped under fixtures/; loading applies a variant, resolves objects
// and validates every determining equation and R-operator.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jetbrackets/bracket.hpp"
#include "jetbrackets/dsl.hpp"
#include "jetbrackets/structure.hpp"

namespace jb {

struct Fixture {
  std::string name;
  std::string variant;  // applied variant name ("" = base)
  SystemFile file;      // guarded content filtered, variant substitutions applied

  std::vector<SymObject> symmetries;          // with R attached when supplied
  std::vector<SymObject> adjointSymmetries;   // ditto
  std::vector<SymObject> potentialSymmetries; // augmented fixtures

  bool potentialRealization = false;
  std::string potentialVar;  // alias derivative direction, e.g. "x"

  const PDESystem& system() const { return file.system; }
  std::vector<std::string> symmetryNames() const;
  std::vector<std::string> adjointNames() const;
  std::vector<ExprVec> symmetryComponents() const;
  std::vector<ExprVec> adjointComponents() const;
  const SymObject& symmetry(const std::string& n) const;
  const SymObject& adjoint(const std::string& n) const;
  const SymObject& potentialSymmetry(const std::string& n) const;

  // Linear combination of adjoint (or symmetry) objects; coefficients must be
  // polynomial in the parameters so they embed into Expr.
  SymObject combo_object(const NamedCombo& combo, bool adjointSide) const;
  CoeffVec combo_coeffs(const NamedCombo& combo, bool adjointSide) const;
};

std::string fixture_dir();
std::vector<std::string> fixture_names();
Fixture load_fixture(const std::string& name, const std::string& variant = "default",
                     bool validate = true);
Fixture load_fixture_file(const std::string& path, const std::string& variant = "default",
                          bool validate = true);

// --- potential-variable realization (augmented fixtures) ---------------------

// Rewrites u_I -> U_{I+x}; both directions.
Expr alias_expr(const Fixture& f, const Expr& e);
// Inverse rewrite; throws NotInSpan when a bare potential survives.
Expr unalias_expr(const Fixture& f, const Expr& e);
bool can_unalias(const Fixture& f, const Expr& e);
bool is_local_object(const Fixture& f, const ExprVec& components);

// Symmetry action on (possibly nonlocal) adjoint objects realized through the
// potential variables; returns both the action value and its coordinates in
// the adjoint basis.
struct PotentialActionResult {
  ExprVec value;
  CoeffVec coords;
};
PotentialActionResult potential_action(const Fixture& f, ActionKind kind,
                                       const std::string& symName, const ExprVec& Q);

// Multiplier test through the potential realization: Euler operators of
// Q . G with respect to the potential variables.
MultiplierVerdict classify_multiplier_potential(const Fixture& f, const ExprVec& Q);

// Dual action matrix for a combination Q (column j = coords of the action of
// the j-th symmetry on Q), honoring the fixture realization.
Matrix action_matrix(const Fixture& f, ActionKind kind, const NamedCombo& q);

// Uniform entry point for single actions honoring the realization.
CoeffVec action_coords(const Fixture& f, ActionKind kind, const std::string& symName,
                       const NamedCombo& q);

StructureConstants symmetry_algebra(const Fixture& f);

}  // namespace jb
