#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jetbrackets/dsl.hpp"

using namespace jb;

namespace {

PDESystem rd_symbols() {
  PDESystem sys;
  sys.name = "rd";
  sys.independents = {"t", "x"};
  sys.dependents = {"u", "v"};
  sys.parameters = {"kappa1", "kappa2", "alpha", "p"};
  return sys;
}

const char* kRdFile = R"(
# reaction-diffusion system
system rd
independents t x
dependents u v
parameters kappa1 kappa2 alpha p ; p != 1

equations
  Gu = u[t] - kappa1*u[x,x] - alpha*u^p*v
  Gv = v[t] - kappa2*v[x,x] + alpha*u^p*v
end

evolution
  u[t] = kappa1*u[x,x] + alpha*u^p*v
  v[t] = kappa2*v[x,x] - alpha*u^p*v
end

symmetries
  P1 = (u[t], v[t])
  P2 = (u[x], v[x])
  P3 = (u + p*t*u[t] + (1/2)*p*x*u[x], v + p*t*v[t] + (1/2)*p*x*v[x])
end

adjoint_symmetries
  Q1 = (1, 1)
  Q2 = (x, x)
end

table commutators
  [P1,P3] = -p*P1
  [P2,P3] = -(1/2)*p*P2
end
)";

}  // namespace

TEST_CASE("parse the reaction-diffusion equation") {
  PDESystem sys = rd_symbols();
  Expr g = parse_expr("u[t] - kappa1*u[x,x] - alpha*u^p*v", sys);
  Expr built = Expr::jet(JetCoordinate("u", {"t"})) -
               Expr::symbol(Base::param("kappa1")) * Expr::jet(JetCoordinate("u", {"x", "x"})) -
               Expr::symbol(Base::param("alpha")) *
                   Expr::jet(JetCoordinate("u", {})).pow(ExponentVector::of_param("p")) *
                   Expr::jet(JetCoordinate("v", {}));
  CHECK(g == built);
}

TEST_CASE("zero literal and mixed partials") {
  PDESystem sys = rd_symbols();
  CHECK(parse_expr("0", sys).is_zero());
  CHECK(parse_expr("u[x,t]", sys) == parse_expr("u[t,x]", sys));
}

TEST_CASE("syntax errors carry position; undeclared symbols rejected") {
  PDESystem sys = rd_symbols();
  CHECK_THROWS_AS(parse_expr("u +* v", sys), SyntaxError);
  CHECK_THROWS_AS(parse_expr("u + w", sys), Error);
  CHECK_THROWS_AS(parse_expr("u[q]", sys), SyntaxError);  // q not independent
  try {
    parse_expr("u + (v", sys);
    CHECK(false);
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() > 1);
  }
}

TEST_CASE("render round-trips through parse") {
  PDESystem sys = rd_symbols();
  std::vector<std::string> samples = {
      "2*u",
      "u[t] - kappa1*u[x,x] - alpha*u^p*v",
      "u^(p-1)*v^2 - (1/2)*x",
      "x^(-2)*u[t,x] + t*u[x]^3",
      "u + p*t*u[t] + (1/2)*p*x*u[x]",
  };
  for (const auto& s : samples) {
    Expr e = parse_expr(s, sys);
    Expr again = parse_expr(render(e), sys);
    CHECK(again == e);
  }
}

TEST_CASE("random expressions round-trip") {
  PDESystem sys = rd_symbols();
  std::mt19937 rng(4242);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::vector<std::string> atoms = {"u", "v", "u[x]", "v[t]", "u[x,x]", "x",
                                    "t", "p", "alpha", "2", "1/2", "3"};
  for (int i = 0; i < 1000; ++i) {
    std::string s = atoms[pick(atoms.size())];
    int ops = 1 + pick(4);
    for (int k = 0; k < ops; ++k) {
      const char* binops[] = {" + ", " - ", "*"};
      s = "(" + s + ")" + binops[pick(3)] + atoms[pick(atoms.size())];
    }
    Expr e = parse_expr(s, sys);
    CHECK(parse_expr(render(e), sys) == e);
  }
}

TEST_CASE("parse a full system file") {
  SystemFile f = parse_system(kRdFile);
  CHECK(f.system.name == "rd");
  CHECK(f.system.equations.size() == 2);
  CHECK(f.symmetries.size() == 3);
  CHECK(f.adjointSymmetries.size() == 2);
  REQUIRE(f.system.evolution.has_value());
  CHECK(f.system.evolution->timeVar == "t");
  CHECK(f.system.constraints.size() == 1);
  CHECK(f.system.constraints[0].param == "p");
  CHECK(f.tables.size() == 1);
  CHECK(f.tables[0].entries.size() == 2);
  const auto& e = f.tables[0].entries[0];
  CHECK(e.row == "P1");
  CHECK(e.value.at("P1") == -ParamScalar::var("p"));
}

TEST_CASE("tuple length mismatch rejected") {
  std::string bad = kRdFile;
  auto pos = bad.find("Q1 = (1, 1)");
  bad.replace(pos, std::string("Q1 = (1, 1)").size(), "Q1 = (1, 1, 1)");
  CHECK_THROWS_AS(parse_system(bad), Error);
}

TEST_CASE("duplicate names rejected") {
  std::string bad = kRdFile;
  auto pos = bad.find("P2 = (u[x], v[x])");
  bad.replace(pos, std::string("P2").size(), "P1");
  CHECK_THROWS_AS(parse_system(bad), Error);
}

TEST_CASE("operator matrices parse and render") {
  PDESystem sys = rd_symbols();
  TotalDiffOp op = parse_op_matrix("[[t*D[t]+2, 0],[0, t*D[t]+3]]", sys);
  CHECK(op.rows == 2);
  CHECK(op.cols == 2);
  CHECK(render(op) == "[[t*D[t] + 2, 0], [0, t*D[t] + 3]]");
  TotalDiffOp j = parse_op_matrix("[[0, -1], [1, 0]]", sys);
  CHECK(render(j) == "[[0, -1], [1, 0]]");
  // composition in entries: x*D[x]*x = x^2*D[x] + x
  TotalDiffOp c = parse_op_matrix("[[x*D[x]*x]]", sys);
  CHECK(render(c) == "[[x^2*D[x] + x]]");
}

TEST_CASE("combo parsing over named objects") {
  PDESystem sys = rd_symbols();
  std::set<std::string> names = {"Q1", "Q2"};
  NamedCombo c = parse_combo("(1-(1/2)*p)*Q1", sys, names);
  REQUIRE(c.count("Q1"));
  ParamScalar expect = ParamScalar(Rational(1)) -
                       ParamScalar(Rational(1, 2)) * ParamScalar::var("p");
  CHECK(c.at("Q1") == expect);
  NamedCombo z = parse_combo("0", sys, names);
  CHECK(z.empty());
  NamedCombo frac = parse_combo("(p/(2*(p-1)))*Q1", sys, names);
  ParamScalar pv = ParamScalar::var("p");
  CHECK(frac.at("Q1") == pv / (ParamScalar(Rational(2)) * (pv - ParamScalar(Rational(1)))));
}

TEST_CASE("guards and variants parse") {
  const char* file = R"(
system wave
independents t r
dependents w
parameters alpha beta ; beta != 0

variant undamped default
  set alpha = 0
end

equations
  G = w[t,t] - alpha*w[t,t,t] - w[r,r]
end

symmetries
  P1 = w[t]
  P3 = t*w[t] + r*w[r] if undamped
end
)";
  SystemFile f = parse_system(file);
  CHECK(f.variants.size() == 1);
  CHECK(f.variants[0].isDefault);
  CHECK(f.variants[0].sets.at("alpha") == 0);
  CHECK(f.symmetries.size() == 2);
  CHECK(f.symmetries[1].guard == "undamped");
}
