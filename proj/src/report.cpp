#include "jetbrackets/report.hpp"

#include <algorithm>

#include "jetbrackets/jetcalc.hpp"

namespace jb {

namespace {

std::string pass_str(bool b) { return b ? "pass" : "FAIL"; }

CoeffVec instantiated(const CoeffVec& v, const std::map<std::string, Rational>* inst) {
  if (!inst) return v;
  CoeffVec out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.instantiate(*inst));
  return out;
}

bool vec_equal(const CoeffVec& a, const CoeffVec& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!(a[i] - b[i]).is_zero()) return false;
  return true;
}

}  // namespace

std::vector<Verdict> run_determining(const Fixture& f) {
  std::vector<Verdict> out;
  const PDESystem& sys = f.system();
  if (f.potentialRealization) {
    for (const auto& o : f.potentialSymmetries) {
      CheckReport rep = check_determining(sys, o, Side::Symmetry);
      out.push_back({"symmetry " + o.name, rep.pass, rep.method});
    }
    for (const auto& o : f.adjointSymmetries) {
      SymObject img;
      img.name = o.name;
      for (const auto& c : o.components)
        img.components.push_back(-total_derivative(c, f.potentialVar));
      CheckReport rep = check_determining(sys, img, Side::Adjoint);
      out.push_back({"adjoint-symmetry " + o.name, rep.pass, rep.method + " (potential image)"});
    }
    return out;
  }
  for (const auto& o : f.symmetries) {
    CheckReport rep = check_determining(sys, o, Side::Symmetry);
    out.push_back({"symmetry " + o.name, rep.pass,
                   rep.pass ? rep.method : "residual " + render(rep.residual)});
  }
  for (const auto& o : f.adjointSymmetries) {
    CheckReport rep = check_determining(sys, o, Side::Adjoint);
    out.push_back({"adjoint-symmetry " + o.name, rep.pass,
                   rep.pass ? rep.method : "residual " + render(rep.residual)});
  }
  return out;
}

std::vector<Verdict> run_classify(const Fixture& f) {
  std::vector<Verdict> out;
  const PDESystem& sys = f.system();
  for (const auto& entry : f.file.classify) {
    const SymObject& q = f.adjoint(entry.name);
    MultiplierVerdict got;
    std::string how;
    if (f.potentialRealization && !is_local_object(f, q.components)) {
      got = classify_multiplier_potential(f, q.components);
      how = "euler-potential";
    } else if (f.potentialRealization) {
      // Local objects of an augmented system: test in original variables.
      ExprVec quv;
      Expr dot;
      for (size_t i = 0; i < q.components.size(); ++i)
        dot += q.components[i] * total_derivative(sys.equations[i], f.potentialVar);
      bool multiplier = true;
      Expr dotuv = unalias_expr(f, dot);
      for (const auto& [aliasName, target] : sys.aliases)
        if (!euler(dotuv, aliasName).is_zero()) multiplier = false;
      got = multiplier ? MultiplierVerdict::Multiplier : MultiplierVerdict::NonMultiplier;
      how = "euler-original";
    } else {
      got = classify_multiplier(sys, q.components);
      how = "euler";
    }
    bool pass = (got == MultiplierVerdict::Multiplier) == entry.isMultiplier;
    std::string detail = how;
    // Cross-check with the evolution self-adjointness test where applicable.
    if (!f.potentialRealization) {
      auto sa = classify_multiplier_selfadjoint(sys, q.components);
      if (sa) {
        bool agree = *sa == got;
        detail += agree ? ", self-adjointness agrees" : ", self-adjointness DISAGREES";
        pass = pass && agree;
      }
    }
    out.push_back({"classify " + entry.name, pass, detail});
  }
  return out;
}

std::vector<Verdict> run_commutators(const Fixture& f, ComputedTable* out) {
  std::vector<Verdict> verdicts;
  StructureConstants sc = symmetry_algebra(f);
  const auto names = f.symmetryNames();
  size_t n = names.size();

  const TableBlock* golden = nullptr;
  for (const auto& t : f.file.tables)
    if (t.name == "commutators") golden = &t;

  if (out) {
    out->title = "commutators";
    out->rowNames = names;
    out->colNames = names;
    out->cells.assign(n, std::vector<std::string>(n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) out->cells[i][j] = render(sc.c[i][j], names);
  }

  verdicts.push_back({"antisymmetry", check_antisymmetry(sc), ""});
  verdicts.push_back({"jacobi", check_jacobi(sc), ""});

  if (golden) {
    auto idx = [&](const std::string& nm) {
      auto it = std::find(names.begin(), names.end(), nm);
      if (it == names.end())
        throw Error(ErrorCode::ValidationFailure, "commutator table names unknown object " + nm);
      return static_cast<size_t>(it - names.begin());
    };
    std::vector<std::vector<bool>> listed(n, std::vector<bool>(n, false));
    for (const auto& e : golden->entries) {
      size_t i = idx(e.row), j = idx(e.col);
      listed[i][j] = listed[j][i] = true;
      CoeffVec expect(n, ParamScalar(Rational(0)));
      for (const auto& [nm, c] : e.value) expect[idx(nm)] = c;
      bool ok = vec_equal(sc.c[i][j], expect);
      verdicts.push_back({"[" + e.row + "," + e.col + "]", ok, render(sc.c[i][j], names)});
    }
    // Every unlisted pair must commute.
    bool allZero = true;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) {
        if (listed[i][j] || i == j) continue;
        for (const auto& s : sc.c[i][j])
          if (!s.is_zero()) allZero = false;
      }
    verdicts.push_back({"unlisted pairs vanish", allZero, ""});
  }
  return verdicts;
}

std::vector<Verdict> run_action_table(const Fixture& f, const TableBlock& tb,
                                      ComputedTable* out) {
  std::vector<Verdict> verdicts;
  const auto adjNames = f.adjointNames();
  const auto symNames = f.symmetryNames();
  ActionKind kind = static_cast<ActionKind>(tb.kind);

  std::map<std::pair<std::string, std::string>, CoeffVec> golden;
  for (const auto& e : tb.entries)
    golden[{e.row, e.col}] = f.combo_coeffs(e.value, true);

  if (out) {
    out->title = tb.name;
    out->rowNames = adjNames;
    out->colNames = symNames;
    out->cells.assign(adjNames.size(), std::vector<std::string>(symNames.size()));
  }

  for (size_t i = 0; i < adjNames.size(); ++i) {
    for (size_t j = 0; j < symNames.size(); ++j) {
      NamedCombo q;
      q[adjNames[i]] = ParamScalar(Rational(1));
      CoeffVec got = action_coords(f, kind, symNames[j], q);
      if (out) out->cells[i][j] = render(got, adjNames);
      auto it = golden.find({adjNames[i], symNames[j]});
      CoeffVec expect = it != golden.end()
                            ? it->second
                            : CoeffVec(adjNames.size(), ParamScalar(Rational(0)));
      bool ok = vec_equal(got, expect);
      verdicts.push_back({tb.name + "(" + adjNames[i] + "," + symNames[j] + ")", ok,
                          render(got, adjNames)});
    }
  }
  return verdicts;
}

BracketComputation compute_bracket(const Fixture& f, const BracketBlock& bb,
                                   const std::map<std::string, Rational>* inst) {
  BracketComputation bc;
  bc.symAlgebra = symmetry_algebra(f);
  ActionKind kind = static_cast<ActionKind>(bb.kind);
  Matrix action = action_matrix(f, kind, bb.q);
  if (inst) {
    for (auto& row : action) row = instantiated(row, inst);
    for (auto& row : bc.symAlgebra.c)
      for (auto& v : row) v = instantiated(v, inst);
  }
  bc.analysis = analyze_action_matrix(action, bc.symAlgebra,
                                      bb.policy.empty() ? "auto" : bb.policy,
                                      bb.scalingSymmetry);
  for (const auto& [nm, combo] : bb.basis) {
    bc.basisNames.push_back(nm);
    bc.basisVectors.push_back(instantiated(f.combo_coeffs(combo, true), inst));
  }
  size_t n = bc.basisNames.size();
  bc.algebra.names = bc.basisNames;
  bc.algebra.c.assign(n, std::vector<CoeffVec>(n));

  // Matrix with the primed basis vectors as columns, for re-expression.
  size_t nadj = f.adjointSymmetries.size();
  Matrix basisMat(nadj, CoeffVec(n, ParamScalar(Rational(0))));
  for (size_t j = 0; j < n; ++j)
    for (size_t i = 0; i < nadj; ++i) basisMat[i][j] = bc.basisVectors[j][i];

  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      CoeffVec br = adjsym_bracket(bc.analysis, bc.symAlgebra, bc.basisVectors[i],
                                   bc.basisVectors[j]);
      auto x = solve_unique(basisMat, br);
      if (!x)
        throw Error(ErrorCode::NotInSpan,
                    "bracket [" + bc.basisNames[i] + "," + bc.basisNames[j] +
                        "] is not in the declared domain basis");
      bc.algebra.c[i][j] = *x;
    }
  }
  return bc;
}

BracketRun run_bracket(const Fixture& f, const BracketBlock& bb,
                       const std::map<std::string, Rational>* inst) {
  BracketRun run;
  // Symbolic constraints: declared nonzero requirements must hold.
  for (const auto& [name, badValue] : bb.requires_nonzero) {
    if (inst) {
      auto it = inst->find(name);
      if (it != inst->end() && it->second == badValue)
        throw Error(ErrorCode::ValidationFailure,
                    "instantiation violates constraint " + name + " != " + rat_str(badValue));
    }
  }
  BracketComputation bc;
  try {
    bc = compute_bracket(f, bb, inst);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IllDefinedBracket || e.code() == ErrorCode::NoScalingSymmetry) {
      run.refused = true;
      run.refusalReason = e.what();
      return run;
    }
    throw;
  }

  size_t n = bc.basisNames.size();
  run.table.title = "bracket " + bb.name;
  run.table.rowNames = bc.basisNames;
  run.table.colNames = bc.basisNames;
  run.table.cells.assign(n, std::vector<std::string>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      run.table.cells[i][j] = render(bc.algebra.c[i][j], bc.basisNames);

  auto idx = [&](const std::string& nm) {
    auto it = std::find(bc.basisNames.begin(), bc.basisNames.end(), nm);
    if (it == bc.basisNames.end())
      throw Error(ErrorCode::ValidationFailure, "bracket table names unknown element " + nm);
    return static_cast<size_t>(it - bc.basisNames.begin());
  };

  std::vector<std::vector<bool>> listed(n, std::vector<bool>(n, false));
  for (const auto& e : bb.entries) {
    size_t i = idx(e.row), j = idx(e.col);
    listed[i][j] = listed[j][i] = true;
    CoeffVec expect(n, ParamScalar(Rational(0)));
    for (const auto& [nm, c] : e.value) expect[idx(nm)] = inst ? c.instantiate(*inst) : c;
    bool ok = vec_equal(bc.algebra.c[i][j], expect);
    run.verdicts.push_back({"[" + e.row + "," + e.col + "]", ok,
                            render(bc.algebra.c[i][j], bc.basisNames)});
  }
  bool unlistedZero = true;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      if (listed[i][j] || i == j) continue;
      for (const auto& s : bc.algebra.c[i][j])
        if (!s.is_zero()) unlistedZero = false;
    }
  run.verdicts.push_back({"unlisted pairs vanish", unlistedZero, ""});
  run.verdicts.push_back({"antisymmetry", check_antisymmetry(bc.algebra), ""});
  run.verdicts.push_back({"jacobi", check_jacobi(bc.algebra), ""});
  return run;
}

std::vector<Verdict> run_noether(const Fixture& f, const NoetherBlock& nb) {
  std::vector<Verdict> out;
  const PDESystem& sys = f.system();
  const SymObject& q = f.adjoint(nb.q);
  TotalDiffOp J = noether_operator(sys, q);
  TotalDiffOp scaled = op_scale(nb.scale, J);
  out.push_back({"noether " + nb.name + " operator", scaled == nb.op, render(scaled)});

  // The operator maps the symmetry basis onto the Action3 column.
  bool mapsActions = true;
  for (const auto& p : f.symmetries) {
    ExprVec viaOp = apply_op(scaled, sys.is_evolution()
                                         ? reduce_on_solutions(p.components, sys)
                                         : p.components);
    ExprVec viaAction = symmetry_action(sys, ActionKind::Action3, p, q);
    for (auto& e : viaAction) e = e.scaled(nb.scale);
    if (!(viaOp == viaAction)) mapsActions = false;
  }
  out.push_back({"noether " + nb.name + " reproduces action3 column", mapsActions, ""});

  if (sys.is_evolution()) {
    TotalDiffOp adj = adjoint_op(scaled);
    out.push_back({"noether " + nb.name + " skew-adjoint", adj == op_negate(scaled), ""});
  }
  return out;
}

std::vector<Verdict> run_variational(const Fixture& f, const VariationalBlock& vb) {
  CheckReport rep = variational_check(f.system(), vb.kind, vb.op, vb.density, vb.lhs);
  return {{"variational " + vb.name + " (" + vb.kind + ")", rep.pass,
           rep.pass ? "exact" : "residual " + render(rep.residual)}};
}

std::vector<Verdict> run_isomorphism(const Fixture& f, const IsomorphismBlock& ib) {
  const BracketBlock* bb = nullptr;
  for (const auto& b : f.file.brackets)
    if (b.name == ib.bracket) bb = &b;
  if (!bb)
    throw Error(ErrorCode::ValidationFailure,
                "isomorphism references unknown bracket " + ib.bracket);
  BracketComputation bc = compute_bracket(f, *bb, nullptr);
  std::vector<CoeffVec> images;
  for (const auto& nm : bc.basisNames) {
    const NamedCombo* combo = nullptr;
    for (const auto& [qn, c] : ib.images)
      if (qn == nm) combo = &c;
    if (!combo)
      throw Error(ErrorCode::ValidationFailure, "isomorphism misses image of " + nm);
    images.push_back(f.combo_coeffs(*combo, false));
  }
  bool ok = verify_isomorphism(bc.symAlgebra, bc.algebra, images, ParamScalar(ib.scale));
  return {{"isomorphism " + ib.name, ok, ""}};
}

bool FixtureReport::all_pass() const {
  for (const auto& [name, verdicts] : sections)
    for (const auto& v : verdicts)
      if (!v.pass) return false;
  return true;
}

FixtureReport run_fixture(const Fixture& f) {
  FixtureReport rep;
  rep.fixture = f.name;
  rep.variant = f.variant;
  rep.sections.emplace_back("determining", run_determining(f));
  if (!f.file.classify.empty()) rep.sections.emplace_back("classify", run_classify(f));
  {
    ComputedTable ct;
    auto v = run_commutators(f, &ct);
    rep.sections.emplace_back("commutators", std::move(v));
    rep.tables.push_back(std::move(ct));
  }
  for (const auto& tb : f.file.tables) {
    if (tb.name == "commutators") continue;
    ComputedTable ct;
    auto v = run_action_table(f, tb, &ct);
    rep.sections.emplace_back(tb.name, std::move(v));
    rep.tables.push_back(std::move(ct));
  }
  for (const auto& bb : f.file.brackets) {
    BracketRun br = run_bracket(f, bb, nullptr);
    if (br.refused) {
      rep.sections.emplace_back("bracket " + bb.name,
                                std::vector<Verdict>{{"refused", false, br.refusalReason}});
      continue;
    }
    rep.sections.emplace_back("bracket " + bb.name, br.verdicts);
    rep.tables.push_back(br.table);
    if (!bb.instantiate.empty()) {
      BracketRun bi = run_bracket(f, bb, &bb.instantiate);
      rep.sections.emplace_back("bracket " + bb.name + " (instantiated)", bi.verdicts);
    }
  }
  for (const auto& nb : f.file.noethers)
    rep.sections.emplace_back("noether " + nb.name, run_noether(f, nb));
  for (const auto& vb : f.file.variationals)
    rep.sections.emplace_back("variational " + vb.name, run_variational(f, vb));
  for (const auto& ib : f.file.isomorphisms)
    rep.sections.emplace_back("isomorphism " + ib.name, run_isomorphism(f, ib));
  return rep;
}

}  // namespace jb
