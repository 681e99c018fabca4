#include "jetbrackets/structure.hpp"

#include "jetbrackets/jetcalc.hpp"

namespace jb {

TotalDiffOp resolve_R(const PDESystem& sys, const SymObject& obj, Side side) {
  if (obj.R) return *obj.R;
  if (sys.is_evolution()) return extract_R_evolution(sys, obj.components, side);
  throw Error(ErrorCode::UnverifiableWithoutR,
              "object " + obj.name + " of non-evolution system " + sys.name +
                  " has no fixture R-operator");
}

CheckReport check_determining(const PDESystem& sys, const SymObject& obj, Side side) {
  CheckReport rep;
  rep.subject = obj.name;
  if (sys.is_evolution() && !obj.R) {
    ExprVec lin = side == Side::Symmetry
                      ? frechet(sys.equations, obj.components, sys.dependents)
                      : frechet_adjoint(sys.equations, obj.components, sys.dependents);
    rep.residual = reduce_on_solutions(lin, sys);
    rep.method = "on-solution";
  } else {
    TotalDiffOp R = resolve_R(sys, obj, side);
    ExprVec lhs = side == Side::Symmetry
                      ? frechet(sys.equations, obj.components, sys.dependents)
                      : frechet_adjoint(sys.equations, obj.components, sys.dependents);
    ExprVec rhs = apply_op(R, sys.equations);
    rep.residual.reserve(lhs.size());
    for (size_t i = 0; i < lhs.size(); ++i) rep.residual.push_back(lhs[i] - rhs[i]);
    rep.method = "off-solution-R";
  }
  rep.pass = true;
  for (const auto& r : rep.residual)
    if (!r.is_zero()) rep.pass = false;
  return rep;
}

MultiplierVerdict classify_multiplier(const PDESystem& sys, const ExprVec& Q) {
  if (Q.size() != sys.equations.size())
    throw Error(ErrorCode::LengthMismatch, "multiplier tuple length != equation count");
  Expr dot;
  for (size_t i = 0; i < Q.size(); ++i) dot += Q[i] * sys.equations[i];
  for (const auto& dep : sys.dependents)
    if (!euler(dot, dep).is_zero()) return MultiplierVerdict::NonMultiplier;
  return MultiplierVerdict::Multiplier;
}

std::optional<MultiplierVerdict> classify_multiplier_selfadjoint(const PDESystem& sys,
                                                                 const ExprVec& Q) {
  if (!sys.is_evolution()) return std::nullopt;
  ExprVec qr = reduce_on_solutions(Q, sys);
  TotalDiffOp qp = frechet_op(qr, sys.dependents);
  return qp == adjoint_op(qp) ? MultiplierVerdict::Multiplier
                              : MultiplierVerdict::NonMultiplier;
}

ExprVec symmetry_action(const PDESystem& sys, ActionKind kind, const SymObject& P,
                        const SymObject& Q) {
  SymObject p = P, q = Q;
  if (sys.is_evolution()) {
    p.components = reduce_on_solutions(p.components, sys);
    q.components = reduce_on_solutions(q.components, sys);
  }
  TotalDiffOp RPs = adjoint_op(resolve_R(sys, p, Side::Symmetry));
  TotalDiffOp RQs = adjoint_op(resolve_R(sys, q, Side::Adjoint));
  auto sub = [](const ExprVec& a, const ExprVec& b) {
    ExprVec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
  };
  auto add = [](const ExprVec& a, const ExprVec& b) {
    ExprVec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
  };
  switch (kind) {
    case ActionKind::Action1:
      return sub(apply_op(RPs, q.components), apply_op(RQs, p.components));
    case ActionKind::Action2:
      return add(frechet(q.components, p.components, sys.dependents),
                 apply_op(RPs, q.components));
    case ActionKind::Action3:
      return add(frechet(q.components, p.components, sys.dependents),
                 apply_op(RQs, p.components));
  }
  throw Error(ErrorCode::Internal, "bad action kind");
}

ExprVec action1_euler_form(const PDESystem& sys, const ExprVec& P, const ExprVec& Q) {
  ExprVec p = reduce_on_solutions(P, sys);
  ExprVec q = reduce_on_solutions(Q, sys);
  Expr dot;
  for (size_t i = 0; i < p.size(); ++i) dot += p[i] * q[i];
  ExprVec out;
  out.reserve(sys.dependents.size());
  for (const auto& dep : sys.dependents) out.push_back(euler(dot, dep));
  return out;
}

TotalDiffOp noether_operator(const PDESystem& sys, const SymObject& Q) {
  SymObject q = Q;
  if (sys.is_evolution()) q.components = reduce_on_solutions(q.components, sys);
  TotalDiffOp qp = frechet_op(q.components, sys.dependents);
  TotalDiffOp rqs = adjoint_op(resolve_R(sys, q, Side::Adjoint));
  return op_add(qp, rqs);
}

Expr symplectic_integrand(const PDESystem& sys, const ExprVec& Q, const ExprVec& P1,
                          const ExprVec& P2) {
  if (!sys.is_evolution())
    throw Error(ErrorCode::NoEvolutionForm,
                "symplectic integrand requires an evolution system");
  ExprVec q = reduce_on_solutions(Q, sys);
  ExprVec qp2 = frechet(q, reduce_on_solutions(P2, sys), sys.dependents);
  ExprVec qp1 = frechet(q, reduce_on_solutions(P1, sys), sys.dependents);
  ExprVec p1 = reduce_on_solutions(P1, sys), p2 = reduce_on_solutions(P2, sys);
  Expr out;
  for (size_t i = 0; i < q.size(); ++i) out += p1[i] * qp2[i] - p2[i] * qp1[i];
  return out;
}

Expr noether_pairing(const TotalDiffOp& J, const ExprVec& P1, const ExprVec& P2) {
  ExprVec jp = apply_op(J, P1);
  Expr out;
  for (size_t i = 0; i < jp.size(); ++i) out += P2[i] * jp[i];
  return out;
}

CheckReport variational_check(const PDESystem& sys, const std::string& kind,
                              const TotalDiffOp& op, const Expr& density,
                              const ExprVec& lhs) {
  CheckReport rep;
  rep.subject = kind;
  rep.method = "exact";
  ExprVec grad;
  grad.reserve(sys.dependents.size());
  for (const auto& dep : sys.dependents) grad.push_back(euler(density, dep));
  if (kind == "lagrangian") {
    ExprVec lhsv = apply_op(op, sys.equations);
    rep.residual.reserve(lhsv.size());
    for (size_t i = 0; i < lhsv.size(); ++i) rep.residual.push_back(lhsv[i] - grad[i]);
  } else if (kind == "hamiltonian") {
    if (lhs.size() != sys.equations.size())
      throw Error(ErrorCode::ShapeMismatch, "hamiltonian lhs tuple has wrong length");
    ExprVec rhs = apply_op(op, grad);
    rep.residual.reserve(lhs.size());
    for (size_t i = 0; i < lhs.size(); ++i)
      rep.residual.push_back(lhs[i] - rhs[i] - sys.equations[i]);
  } else {
    throw Error(ErrorCode::ValidationFailure, "unknown variational kind " + kind);
  }
  rep.pass = true;
  for (const auto& r : rep.residual)
    if (!r.is_zero()) rep.pass = false;
  return rep;
}

}  // namespace jb
