#include "jetbrackets/fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>

#include "jetbrackets/jetcalc.hpp"

namespace jb {

namespace {

const std::vector<std::string> kFixtures = {
    "reaction_diffusion", "navier_stokes",     "boussinesq",
    "coupled_kdv",        "coupled_kdv_potential", "acoustic_wave",
    "acoustic_potential", "acoustic_first_layer"};

bool guard_active(const std::string& guard, const std::string& variant) {
  return guard.empty() || guard == variant;
}

Expr apply_sets(Expr e, const std::map<std::string, Rational>& sets) {
  for (const auto& [p, v] : sets) e = set_parameter(e, p, v);
  return e;
}

ExprVec apply_sets(ExprVec v, const std::map<std::string, Rational>& sets) {
  for (auto& e : v) e = apply_sets(e, sets);
  return v;
}

TotalDiffOp apply_sets(TotalDiffOp op, const std::map<std::string, Rational>& sets) {
  for (auto& row : op.entries)
    for (auto& entry : row) {
      std::vector<OpTerm> ts;
      for (auto& t : entry) {
        Expr c = apply_sets(t.coeff, sets);
        if (!c.is_zero()) ts.push_back({std::move(c), t.index});
      }
      entry = entry_normalize(std::move(ts));
    }
  return op;
}

}  // namespace

std::string fixture_dir() {
  if (const char* env = std::getenv("JETBRACKETS_FIXTURE_DIR")) return env;
#ifdef JETBRACKETS_SOURCE_FIXTURE_DIR
  return JETBRACKETS_SOURCE_FIXTURE_DIR;
#else
  return "fixtures";
#endif
}

std::vector<std::string> fixture_names() { return kFixtures; }

std::vector<std::string> Fixture::symmetryNames() const {
  std::vector<std::string> out;
  for (const auto& o : symmetries) out.push_back(o.name);
  return out;
}

std::vector<std::string> Fixture::adjointNames() const {
  std::vector<std::string> out;
  for (const auto& o : adjointSymmetries) out.push_back(o.name);
  return out;
}

std::vector<ExprVec> Fixture::symmetryComponents() const {
  std::vector<ExprVec> out;
  for (const auto& o : symmetries) out.push_back(o.components);
  return out;
}

std::vector<ExprVec> Fixture::adjointComponents() const {
  std::vector<ExprVec> out;
  for (const auto& o : adjointSymmetries) out.push_back(o.components);
  return out;
}

namespace {
const SymObject& find_obj(const std::vector<SymObject>& v, const std::string& n,
                          const std::string& what) {
  for (const auto& o : v)
    if (o.name == n) return o;
  throw Error(ErrorCode::ValidationFailure, "unknown " + what + " '" + n + "'");
}
}  // namespace

const SymObject& Fixture::symmetry(const std::string& n) const {
  return find_obj(symmetries, n, "symmetry");
}
const SymObject& Fixture::adjoint(const std::string& n) const {
  return find_obj(adjointSymmetries, n, "adjoint-symmetry");
}
const SymObject& Fixture::potentialSymmetry(const std::string& n) const {
  return find_obj(potentialSymmetries, n, "potential symmetry");
}

SymObject Fixture::combo_object(const NamedCombo& combo, bool adjointSide) const {
  const auto& pool = adjointSide ? adjointSymmetries : symmetries;
  size_t ncomp = adjointSide ? system().equations.size() : system().dependents.size();
  SymObject out;
  out.components.assign(ncomp, Expr());
  bool haveAllR = true;
  TotalDiffOp rsum;
  bool rinit = false;
  std::string label;
  for (const auto& [name, coeff] : combo) {
    const SymObject& obj = find_obj(pool, name, adjointSide ? "adjoint-symmetry" : "symmetry");
    Expr ce(coeff);
    for (size_t i = 0; i < ncomp; ++i) out.components[i] += ce * obj.components[i];
    if (obj.R) {
      TotalDiffOp scaledR = *obj.R;
      for (auto& row : scaledR.entries)
        for (auto& entry : row) entry = entry_scale(ce, entry);
      if (!rinit) {
        rsum = scaledR;
        rinit = true;
      } else {
        rsum = op_add(rsum, scaledR);
      }
    } else {
      haveAllR = false;
    }
    label += (label.empty() ? "" : "+") + name;
  }
  out.name = label.empty() ? "0" : label;
  if (haveAllR && rinit) out.R = rsum;
  return out;
}

CoeffVec Fixture::combo_coeffs(const NamedCombo& combo, bool adjointSide) const {
  const auto names = adjointSide ? adjointNames() : symmetryNames();
  CoeffVec out(names.size(), ParamScalar(Rational(0)));
  for (const auto& [name, coeff] : combo) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
      throw Error(ErrorCode::ValidationFailure, "unknown object in combination: " + name);
    out[it - names.begin()] = coeff;
  }
  return out;
}

// --- loading -------------------------------------------------------------------

namespace {

void validate_fixture(const Fixture& f);

Fixture build_fixture(SystemFile file, const std::string& requestedVariant, bool validate) {
  // Resolve the variant.
  std::string variant;
  const VariantDecl* decl = nullptr;
  if (requestedVariant == "default") {
    for (const auto& v : file.variants)
      if (v.isDefault) decl = &v;
  } else if (!requestedVariant.empty() && requestedVariant != "base") {
    for (const auto& v : file.variants)
      if (v.name == requestedVariant) decl = &v;
    if (!decl)
      throw Error(ErrorCode::UnknownFixture,
                  "fixture has no variant '" + requestedVariant + "'");
  }
  std::map<std::string, Rational> sets;
  if (decl) {
    variant = decl->name;
    sets = decl->sets;
  }

  Fixture f;
  f.file = std::move(file);
  f.name = f.file.system.name;
  f.variant = variant;
  auto& sf = f.file;

  // Apply parameter substitutions everywhere.
  if (!sets.empty()) {
    sf.system.equations = apply_sets(sf.system.equations, sets);
    if (sf.system.evolution)
      sf.system.evolution->rhs = apply_sets(sf.system.evolution->rhs, sets);
  }

  // Filter guarded content.
  auto keep = [&](const std::string& g) { return guard_active(g, variant); };
  auto filter_tuples = [&](std::vector<NamedTuple>& v) {
    std::vector<NamedTuple> out;
    for (auto& o : v)
      if (keep(o.guard)) {
        o.components = apply_sets(std::move(o.components), sets);
        out.push_back(std::move(o));
      }
    v = std::move(out);
  };
  filter_tuples(sf.symmetries);
  filter_tuples(sf.adjointSymmetries);
  filter_tuples(sf.potentialSymmetries);
  {
    std::vector<NamedOp> rout;
    for (auto& r : sf.rops)
      if (keep(r.guard)) {
        r.op = apply_sets(std::move(r.op), sets);
        rout.push_back(std::move(r));
      }
    sf.rops = std::move(rout);
  }
  std::erase_if(sf.tables, [&](const TableBlock& t) { return !keep(t.guard); });
  std::erase_if(sf.brackets, [&](const BracketBlock& b) { return !keep(b.guard); });
  std::erase_if(sf.noethers, [&](const NoetherBlock& n) { return !keep(n.guard); });
  std::erase_if(sf.variationals, [&](const VariationalBlock& v) { return !keep(v.guard); });
  std::erase_if(sf.isomorphisms, [&](const IsomorphismBlock& i) { return !keep(i.guard); });
  std::erase_if(sf.classify, [&](const ClassifyEntry& c) { return !keep(c.guard); });
  for (auto& n : sf.noethers) n.op = apply_sets(std::move(n.op), sets);
  for (auto& v : sf.variationals) {
    v.op = apply_sets(std::move(v.op), sets);
    v.density = apply_sets(std::move(v.density), sets);
    v.lhs = apply_sets(std::move(v.lhs), sets);
  }

  // Assemble objects with R-operators.
  auto attach = [&](const std::vector<NamedTuple>& tuples) {
    std::vector<SymObject> out;
    for (const auto& t : tuples) {
      SymObject o;
      o.name = t.name;
      o.components = t.components;
      for (const auto& r : sf.rops)
        if (r.target == t.name) o.R = r.op;
      out.push_back(std::move(o));
    }
    return out;
  };
  f.symmetries = attach(sf.symmetries);
  f.adjointSymmetries = attach(sf.adjointSymmetries);
  f.potentialSymmetries = attach(sf.potentialSymmetries);

  auto real = sf.meta.find("realization");
  f.potentialRealization = real != sf.meta.end() && real->second == "potential";
  if (f.potentialRealization) {
    if (sf.system.aliases.empty() || sf.system.aliases.begin()->second.index.size() != 1)
      throw Error(ErrorCode::ValidationFailure,
                  "potential realization requires single-derivative aliases");
    f.potentialVar = sf.system.aliases.begin()->second.index[0];
  }

  if (validate) validate_fixture(f);
  return f;
}

void validate_fixture(const Fixture& f) {
  const PDESystem& sys = f.system();
  // R-operators must verify as off-solution identities.
  for (const auto& o : f.symmetries)
    if (o.R && !verify_R(sys, o.components, *o.R, Side::Symmetry))
      throw Error(ErrorCode::ValidationFailure,
                  f.name + ": R-operator of " + o.name + " fails verification");
  for (const auto& o : f.adjointSymmetries)
    if (o.R && !verify_R(sys, o.components, *o.R, Side::Adjoint))
      throw Error(ErrorCode::ValidationFailure,
                  f.name + ": R-operator of " + o.name + " fails verification");
  for (const auto& o : f.potentialSymmetries)
    if (o.R && !verify_R(sys, o.components, *o.R, Side::Symmetry))
      throw Error(ErrorCode::ValidationFailure,
                  f.name + ": R-operator of potential " + o.name + " fails verification");

  if (f.potentialRealization) {
    // Potential symmetries satisfy the determining equations directly.
    for (const auto& o : f.potentialSymmetries) {
      CheckReport rep = check_determining(sys, o, Side::Symmetry);
      if (!rep.pass)
        throw Error(ErrorCode::ValidationFailure,
                    f.name + ": potential symmetry " + o.name +
                        " fails determining check; residual " + render(rep.residual));
    }
    // The uv-realized symmetries are the alias derivatives of the potential
    // ones.
    for (const auto& o : f.symmetries) {
      const SymObject& pot = f.potentialSymmetry(o.name);
      for (size_t i = 0; i < o.components.size(); ++i) {
        Expr expect = total_derivative(pot.components[i], f.potentialVar);
        if (!(expect == o.components[i]))
          throw Error(ErrorCode::ValidationFailure,
                      f.name + ": " + o.name + " is not the alias derivative of its potential form");
      }
    }
    // Adjoint objects: -D_x(Q) must solve the potential adjoint equations.
    for (const auto& o : f.adjointSymmetries) {
      SymObject img;
      img.name = o.name;
      for (const auto& c : o.components)
        img.components.push_back(-total_derivative(c, f.potentialVar));
      CheckReport rep = check_determining(sys, img, Side::Adjoint);
      if (!rep.pass)
        throw Error(ErrorCode::ValidationFailure,
                    f.name + ": adjoint-symmetry " + o.name +
                        " fails the potential determining check; residual " +
                        render(rep.residual));
    }
    return;
  }

  for (const auto& o : f.symmetries) {
    CheckReport rep = check_determining(sys, o, Side::Symmetry);
    if (!rep.pass)
      throw Error(ErrorCode::ValidationFailure,
                  f.name + ": symmetry " + o.name + " fails determining check; residual " +
                      render(rep.residual));
  }
  for (const auto& o : f.adjointSymmetries) {
    CheckReport rep = check_determining(sys, o, Side::Adjoint);
    if (!rep.pass)
      throw Error(ErrorCode::ValidationFailure,
                  f.name + ": adjoint-symmetry " + o.name +
                      " fails determining check; residual " + render(rep.residual));
  }
}

}  // namespace

Fixture load_fixture_file(const std::string& path, const std::string& variant, bool validate) {
  return build_fixture(parse_system_file(path), variant, validate);
}

Fixture load_fixture(const std::string& name, const std::string& variant, bool validate) {
  if (std::find(kFixtures.begin(), kFixtures.end(), name) == kFixtures.end())
    throw Error(ErrorCode::UnknownFixture, "unknown fixture '" + name + "'");
  std::filesystem::path p = std::filesystem::path(fixture_dir()) / (name + ".sys");
  if (!std::filesystem::exists(p))
    throw Error(ErrorCode::UnknownFixture, "fixture file missing: " + p.string());
  return load_fixture_file(p.string(), variant, validate);
}

// --- potential realization -------------------------------------------------------

Expr alias_expr(const Fixture& f, const Expr& e) {
  return transform_bases(e, [&](const Base& b) -> Base {
    if (b.kind != Base::Kind::Jet) return b;
    for (const auto& [aliasName, target] : f.system().aliases) {
      if (b.name == aliasName) {
        std::vector<std::string> idx = b.index;
        idx.insert(idx.end(), target.index.begin(), target.index.end());
        JetCoordinate j(target.dependent, std::move(idx));
        return Base::jet(j);
      }
    }
    return b;
  });
}

Expr unalias_expr(const Fixture& f, const Expr& e) {
  // Inverse alias map: potential dependent -> original name.
  std::map<std::string, std::string> inv;
  for (const auto& [aliasName, target] : f.system().aliases)
    inv[target.dependent] = aliasName;
  return transform_bases(e, [&](const Base& b) -> Base {
    if (b.kind != Base::Kind::Jet) return b;
    auto it = inv.find(b.name);
    if (it == inv.end()) return b;
    std::vector<std::string> idx = b.index;
    auto pos = std::find(idx.begin(), idx.end(), f.potentialVar);
    if (pos == idx.end())
      throw Error(ErrorCode::NotInSpan,
                  "bare potential variable " + b.name + " cannot be unaliased");
    idx.erase(pos);
    return Base::jet(JetCoordinate(it->second, std::move(idx)));
  });
}

bool can_unalias(const Fixture& f, const Expr& e) {
  try {
    unalias_expr(f, e);
    return true;
  } catch (const Error&) {
    return false;
  }
}

bool is_local_object(const Fixture& f, const ExprVec& components) {
  for (const auto& c : components)
    if (!can_unalias(f, c)) return false;
  return true;
}

namespace {

// Decomposes target = D_x(sum c_i B_i) over the adjoint basis images and
// returns the realized antiderivative sum c_i B_i.
PotentialActionResult integrate_by_basis(const Fixture& f, const ExprVec& target) {
  std::vector<ExprVec> images;
  const auto basis = f.adjointComponents();
  for (const auto& b : basis) {
    ExprVec img;
    for (const auto& c : b) img.push_back(total_derivative(c, f.potentialVar));
    images.push_back(std::move(img));
  }
  // Drop identically-zero images (constants in the basis) but keep indices.
  std::vector<size_t> kept;
  std::vector<ExprVec> nz;
  for (size_t i = 0; i < images.size(); ++i) {
    bool zero = true;
    for (const auto& e : images[i])
      if (!e.is_zero()) zero = false;
    if (!zero) {
      kept.push_back(i);
      nz.push_back(images[i]);
    }
  }
  bool targetZero = true;
  for (const auto& e : target)
    if (!e.is_zero()) targetZero = false;
  PotentialActionResult res;
  res.coords.assign(basis.size(), ParamScalar(Rational(0)));
  res.value.assign(target.size(), Expr());
  if (targetZero) return res;
  auto coeffs = decompose(target, nz);
  if (!coeffs)
    throw Error(ErrorCode::NotInSpan,
                "potential-variable action does not integrate over the adjoint basis");
  for (size_t k = 0; k < kept.size(); ++k) {
    res.coords[kept[k]] = (*coeffs)[k];
    Expr ce((*coeffs)[k]);
    for (size_t i = 0; i < res.value.size(); ++i)
      res.value[i] += ce * basis[kept[k]][i];
  }
  return res;
}

ExprVec add_vec(const ExprVec& a, const ExprVec& b) {
  ExprVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

ExprVec sub_vec(const ExprVec& a, const ExprVec& b) {
  ExprVec out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// P'^*(Q) where P is given in original (uv) jets and Q lives in potential
// jets: partial derivatives of P are taken in uv form, alias-rewritten, then
// hit with (-D)_I.
ExprVec mixed_frechet_adjoint(const Fixture& f, const ExprVec& P_uv, const ExprVec& Q) {
  const std::vector<std::string> uvDeps = [&] {
    std::vector<std::string> out;
    for (const auto& [aliasName, target] : f.system().aliases) out.push_back(aliasName);
    return out;
  }();
  ExprVec Pj;
  for (const auto& c : P_uv) Pj.push_back(unalias_expr(f, c));
  ExprVec out(uvDeps.size());
  for (size_t b = 0; b < uvDeps.size(); ++b) {
    Expr acc;
    for (size_t a = 0; a < Pj.size(); ++a) {
      std::map<MultiIndex, bool> seen;
      for (const auto& m : Pj[a].terms())
        for (const auto& [base, ev] : m.factors)
          if (base.kind == Base::Kind::Jet && base.name == uvDeps[b]) seen.emplace(base.index, true);
      for (const auto& [idx, unused] : seen) {
        Expr coeff = partial_jet(Pj[a], JetCoordinate(uvDeps[b], idx));
        if (coeff.is_zero()) continue;
        Expr term = total_derivative(alias_expr(f, coeff) * Q[a], idx);
        if (idx.size() % 2 != 0) term = -term;
        acc += term;
      }
    }
    out[b] = acc;
  }
  return out;
}

}  // namespace

PotentialActionResult potential_action(const Fixture& f, ActionKind kind,
                                       const std::string& symName, const ExprVec& Q) {
  if (!f.potentialRealization)
    throw Error(ErrorCode::ValidationFailure, "fixture has no potential realization");
  const PDESystem& sys = f.system();
  const SymObject& Puv = f.symmetry(symName);
  const SymObject& Ppot = f.potentialSymmetry(symName);
  ExprVec Qr = reduce_on_solutions(Q, sys);
  ExprVec PuvR = reduce_on_solutions(Puv.components, sys);
  ExprVec PpotR = reduce_on_solutions(Ppot.components, sys);

  if (kind == ActionKind::Action1) {
    Expr dot;
    for (size_t i = 0; i < Qr.size(); ++i) dot += PuvR[i] * Qr[i];
    ExprVec target;
    for (const auto& dep : sys.dependents) target.push_back(-euler(dot, dep));
    return integrate_by_basis(f, target);
  }

  // Q'(P) in potential jets is local for both remaining actions.
  ExprVec qPrimeP = frechet(Qr, PpotR, sys.dependents);

  if (kind == ActionKind::Action2) {
    ExprVec value = add_vec(qPrimeP, mixed_frechet_adjoint(f, PuvR, Qr));
    PotentialActionResult res;
    res.value = value;
    auto coeffs = decompose(value, f.adjointComponents());
    if (!coeffs)
      throw Error(ErrorCode::NotInSpan, "action value is not in the adjoint basis span");
    res.coords = *coeffs;
    return res;
  }

  // Action3 = Q'(P) - Q'_{uv}^*(P); the adjoint in original variables is the
  // x-antiderivative of the potential-variable adjoint.
  ExprVec z = frechet_adjoint(Qr, PuvR, sys.dependents);
  PotentialActionResult anti = integrate_by_basis(f, z);
  PotentialActionResult res;
  res.value = add_vec(qPrimeP, anti.value);
  auto coeffs = decompose(res.value, f.adjointComponents());
  if (!coeffs)
    throw Error(ErrorCode::NotInSpan, "action value is not in the adjoint basis span");
  res.coords = *coeffs;
  return res;
}

MultiplierVerdict classify_multiplier_potential(const Fixture& f, const ExprVec& Q) {
  const PDESystem& sys = f.system();
  Expr dot;
  for (size_t i = 0; i < Q.size(); ++i)
    dot += Q[i] * total_derivative(sys.equations[i], f.potentialVar);
  for (const auto& dep : sys.dependents)
    if (!euler(dot, dep).is_zero()) return MultiplierVerdict::NonMultiplier;
  return MultiplierVerdict::Multiplier;
}

CoeffVec action_coords(const Fixture& f, ActionKind kind, const std::string& symName,
                       const NamedCombo& q) {
  const PDESystem& sys = f.system();
  if (f.potentialRealization) {
    // Linear in Q: realize each named member separately.
    CoeffVec out(f.adjointSymmetries.size(), ParamScalar(Rational(0)));
    for (const auto& [name, coeff] : q) {
      PotentialActionResult r = potential_action(f, kind, symName, f.adjoint(name).components);
      for (size_t i = 0; i < out.size(); ++i) out[i] += coeff * r.coords[i];
    }
    return out;
  }
  SymObject Qobj = f.combo_object(q, true);
  ExprVec value = symmetry_action(sys, kind, f.symmetry(symName), Qobj);
  bool zero = true;
  for (const auto& e : value)
    if (!e.is_zero()) zero = false;
  if (zero) return CoeffVec(f.adjointSymmetries.size(), ParamScalar(Rational(0)));
  auto coeffs = decompose(value, f.adjointComponents());
  if (!coeffs)
    throw Error(ErrorCode::NotInSpan,
                "action of " + symName + " is not in the adjoint basis span");
  return *coeffs;
}

Matrix action_matrix(const Fixture& f, ActionKind kind, const NamedCombo& q) {
  size_t nadj = f.adjointSymmetries.size();
  size_t nsym = f.symmetries.size();
  Matrix m(nadj, CoeffVec(nsym, ParamScalar(Rational(0))));
  for (size_t j = 0; j < nsym; ++j) {
    CoeffVec col = action_coords(f, kind, f.symmetries[j].name, q);
    for (size_t i = 0; i < nadj; ++i) m[i][j] = col[i];
  }
  return m;
}

StructureConstants symmetry_algebra(const Fixture& f) {
  return structure_constants(f.symmetryComponents(), f.symmetryNames(),
                             f.system().dependents);
}

}  // namespace jb
