#pragma once

// Runners that evaluate everything a fixture declares (determining checks,
// classification, commutators, action tables, brackets, Noether operators,
// variational identities, isomorphisms) and compare against the golden data.
// Shared by the CLI and the acceptance suite.

#include <string>
#include <vector>

#include "jetbrackets/fixtures.hpp"

namespace jb {

struct Verdict {
  std::string id;
  bool pass = false;
  std::string detail;  // rendered value or failure note
};

struct ComputedTable {
  std::string title;
  std::vector<std::string> rowNames, colNames;
  std::vector<std::vector<std::string>> cells;  // rendered combinations
};

struct BracketRun {
  ComputedTable table;
  std::vector<Verdict> verdicts;
  bool refused = false;       // IllDefinedBracket
  std::string refusalReason;
};

std::vector<Verdict> run_determining(const Fixture& f);
std::vector<Verdict> run_classify(const Fixture& f);
std::vector<Verdict> run_commutators(const Fixture& f, ComputedTable* out = nullptr);
std::vector<Verdict> run_action_table(const Fixture& f, const TableBlock& tb,
                                      ComputedTable* out = nullptr);
BracketRun run_bracket(const Fixture& f, const BracketBlock& bb,
                       const std::map<std::string, Rational>* instantiate = nullptr);
std::vector<Verdict> run_noether(const Fixture& f, const NoetherBlock& nb);
std::vector<Verdict> run_variational(const Fixture& f, const VariationalBlock& vb);
std::vector<Verdict> run_isomorphism(const Fixture& f, const IsomorphismBlock& ib);

struct FixtureReport {
  std::string fixture, variant;
  std::vector<std::pair<std::string, std::vector<Verdict>>> sections;
  std::vector<ComputedTable> tables;
  bool all_pass() const;
};

FixtureReport run_fixture(const Fixture& f);

// Internal helper shared with the acceptance suite: computes the bracket
// structure constants declared by a bracket block.
struct BracketComputation {
  std::vector<std::string> basisNames;
  std::vector<CoeffVec> basisVectors;      // over the adjoint basis
  StructureConstants algebra;              // computed bracket algebra
  DualActionAnalysis analysis;
  StructureConstants symAlgebra;
};
BracketComputation compute_bracket(const Fixture& f, const BracketBlock& bb,
                                   const std::map<std::string, Rational>* instantiate);

}  // namespace jb
