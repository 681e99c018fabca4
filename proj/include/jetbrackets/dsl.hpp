#pragma once

// Text format for systems, object bases, operators and golden tables, plus
// the expression parser / printer. Fixtures and user systems are data files
// (.sys), not code.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jetbrackets/expr.hpp"
#include "jetbrackets/linop.hpp"
#include "jetbrackets/param.hpp"
#include "jetbrackets/system.hpp"

namespace jb {

// Linear combination of named objects with ParamScalar coefficients.
using NamedCombo = std::map<std::string, ParamScalar>;

Expr parse_expr(const std::string& text, const PDESystem& sys);
ExprVec parse_tuple(const std::string& text, const PDESystem& sys);
ParamScalar parse_param_scalar(const std::string& text, const PDESystem& sys);
TotalDiffOp parse_op_matrix(const std::string& text, const PDESystem& sys);
NamedCombo parse_combo(const std::string& text, const PDESystem& sys,
                       const std::set<std::string>& names);

struct NamedTuple {
  std::string name;
  ExprVec components;
  std::string guard;  // variant name, or empty for "always"
};

struct NamedOp {
  std::string target;  // object the operator belongs to, e.g. P6 in R[P6]
  TotalDiffOp op;
  std::string guard;
};

struct TableEntry {
  std::string row, col;
  NamedCombo value;
};

struct TableBlock {
  std::string name;        // "commutators", "action1", ...
  int kind = 0;            // action kind, 0 for commutator tables
  std::vector<TableEntry> entries;
  std::string guard;
};

struct BracketBlock {
  std::string name;
  int kind = 0;
  std::string policy;  // "ideal", "scaling" or "auto"
  NamedCombo q;
  std::string scalingSymmetry;
  std::vector<std::pair<std::string, ParamScalar>> defines;
  std::vector<std::pair<std::string, NamedCombo>> basis;  // primed basis
  std::vector<std::pair<std::string, Rational>> requires_nonzero;  // name or param != value
  std::map<std::string, Rational> instantiate;
  std::vector<TableEntry> entries;  // expected bracket table over primed names
  std::string guard;
};

struct NoetherBlock {
  std::string name;
  std::string q;
  Rational scale = 1;
  TotalDiffOp op;  // expected operator after scaling
  std::string guard;
};

struct VariationalBlock {
  std::string name;
  std::string kind;  // "hamiltonian" | "lagrangian"
  TotalDiffOp op;
  Expr density;
  ExprVec lhs;  // designated tuple (hamiltonian)
  std::string guard;
};

struct IsomorphismBlock {
  std::string name;
  std::string bracket;  // bracket block the domain algebra comes from
  Rational scale = 1;   // declared map is scale * (true homomorphism)
  std::vector<std::pair<std::string, NamedCombo>> images;  // Q name -> combo over P names
  std::string guard;
};

struct ClassifyEntry {
  std::string name;
  bool isMultiplier;
  std::string guard;
};

struct VariantDecl {
  std::string name;
  bool isDefault = false;
  std::map<std::string, Rational> sets;  // parameter -> value
};

struct SystemFile {
  PDESystem system;
  std::vector<VariantDecl> variants;
  std::vector<NamedTuple> symmetries;
  std::vector<NamedTuple> adjointSymmetries;
  std::vector<NamedTuple> potentialSymmetries;  // augmented fixtures only
  std::vector<NamedOp> rops;
  std::vector<TableBlock> tables;
  std::vector<BracketBlock> brackets;
  std::vector<NoetherBlock> noethers;
  std::vector<VariationalBlock> variationals;
  std::vector<IsomorphismBlock> isomorphisms;
  std::vector<ClassifyEntry> classify;
  std::map<std::string, std::string> meta;
};

SystemFile parse_system(const std::string& text);
SystemFile parse_system_file(const std::string& path);

std::string render(const NamedCombo& combo);

}  // namespace jb
