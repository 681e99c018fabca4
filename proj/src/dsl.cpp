#include "jetbrackets/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace jb {

namespace {

// --- tokenizer ---------------------------------------------------------------

struct Token {
  enum class Kind { Ident, Number, Sym, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 0, col = 0;
};

std::vector<Token> tokenize(const std::string& text, int firstLine) {
  std::vector<Token> out;
  int line = firstLine, col = 1;
  size_t i = 0;
  auto push = [&](Token::Kind k, std::string t, int c) {
    out.push_back({k, std::move(t), line, c});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    int startCol = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
        id += text[i++];
        ++col;
      }
      push(Token::Kind::Ident, std::move(id), startCol);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      bool dot = false;
      while (i < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[i])) ||
              (!dot && text[i] == '.' && i + 1 < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[i + 1]))))) {
        if (text[i] == '.') dot = true;
        num += text[i++];
        ++col;
      }
      push(Token::Kind::Number, std::move(num), startCol);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      push(Token::Kind::Sym, "->", startCol);
      i += 2;
      col += 2;
      continue;
    }
    if (c == '!' && i + 1 < text.size() && text[i + 1] == '=') {
      push(Token::Kind::Sym, "!=", startCol);
      i += 2;
      col += 2;
      continue;
    }
    static const std::string singles = "+-*/^()[],=;";
    if (singles.find(c) != std::string::npos) {
      push(Token::Kind::Sym, std::string(1, c), startCol);
      ++i;
      ++col;
      continue;
    }
    throw SyntaxError(line, col, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Token::Kind::End, "", line, col});
  return out;
}

// --- token cursor -------------------------------------------------------------

class Cursor {
public:
  explicit Cursor(std::vector<Token> toks) : toks_(std::move(toks)) {}
  const Token& peek() const { return toks_[pos_]; }
  const Token& get() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool accept_sym(const std::string& s) {
    if (peek().kind == Token::Kind::Sym && peek().text == s) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_ident(const std::string& s) {
    if (peek().kind == Token::Kind::Ident && peek().text == s) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_sym(const std::string& s) {
    if (!accept_sym(s)) fail("expected '" + s + "'");
  }
  std::string expect_ident() {
    if (peek().kind != Token::Kind::Ident) fail("expected identifier");
    return get().text;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(peek().line, peek().col,
                      msg + (peek().kind == Token::Kind::End
                                 ? " at end of input"
                                 : ", found '" + peek().text + "'"));
  }

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

Rational parse_number_tok(Cursor& c) {
  if (c.peek().kind != Token::Kind::Number) c.fail("expected number");
  auto r = rat_parse(c.get().text);
  if (!r) c.fail("bad numeric literal");
  return *r;
}

// Rational literal allowing a/b and leading '-': used for attribute values.
Rational parse_rational_value(Cursor& c) {
  bool neg = c.accept_sym("-");
  Rational v = parse_number_tok(c);
  if (c.accept_sym("/")) v = v / parse_number_tok(c);
  return neg ? Rational(-v) : v;
}

// --- scalar expression parser (ExprTree) ---------------------------------------

class ExprGrammar {
public:
  ExprGrammar(Cursor& c, const PDESystem& sys) : c_(c), sys_(sys) {}

  ExprTreePtr parse_expr() {
    ExprTreePtr lhs = parse_term();
    while (true) {
      if (c_.accept_sym("+"))
        lhs = ExprTree::node(ExprTree::Op::Add, lhs, parse_term());
      else if (c_.accept_sym("-"))
        lhs = ExprTree::node(ExprTree::Op::Sub, lhs, parse_term());
      else
        return lhs;
    }
  }

private:
  ExprTreePtr parse_term() {
    ExprTreePtr lhs = parse_factor();
    while (true) {
      if (c_.accept_sym("*"))
        lhs = ExprTree::node(ExprTree::Op::Mul, lhs, parse_factor());
      else if (c_.accept_sym("/"))
        lhs = ExprTree::node(ExprTree::Op::Div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  ExprTreePtr parse_factor() {
    if (c_.accept_sym("-")) return ExprTree::neg(parse_factor());
    if (c_.accept_sym("+")) return parse_factor();
    ExprTreePtr base = parse_atom();
    if (c_.accept_sym("^")) {
      ExprTreePtr e = parse_exponent();
      return ExprTree::node(ExprTree::Op::Pow, base, e);
    }
    return base;
  }

  ExprTreePtr parse_exponent() {
    // number | ident | parenthesized expression
    if (c_.peek().kind == Token::Kind::Number)
      return ExprTree::num(parse_number_tok(c_));
    if (c_.accept_sym("(")) {
      ExprTreePtr e = parse_expr();
      c_.expect_sym(")");
      return e;
    }
    return parse_atom();
  }

  ExprTreePtr parse_atom() {
    const Token& t = c_.peek();
    if (t.kind == Token::Kind::Number) return ExprTree::num(parse_number_tok(c_));
    if (t.kind == Token::Kind::Sym && t.text == "(") {
      c_.get();
      ExprTreePtr e = parse_expr();
      c_.expect_sym(")");
      return e;
    }
    if (t.kind != Token::Kind::Ident) c_.fail("expected atom");
    std::string name = c_.get().text;
    std::vector<std::string> index;
    bool isJet = false;
    if (c_.accept_sym("[")) {
      isJet = true;
      index.push_back(expect_independent());
      while (c_.accept_sym(",")) index.push_back(expect_independent());
      c_.expect_sym("]");
    }
    return resolve(name, isJet, std::move(index), t.line, t.col);
  }

  std::string expect_independent() {
    const Token& t = c_.peek();
    std::string id = c_.expect_ident();
    if (sys_.independent_index(id) < 0)
      throw SyntaxError(t.line, t.col, "derivative index '" + id + "' is not an independent variable");
    return id;
  }

  ExprTreePtr resolve(const std::string& name, bool isJet, std::vector<std::string> index,
                      int line, int col) {
    auto alias = sys_.aliases.find(name);
    if (alias != sys_.aliases.end()) {
      JetCoordinate j = alias->second;
      std::vector<std::string> idx = j.index;
      idx.insert(idx.end(), index.begin(), index.end());
      return ExprTree::sym(Base::jet(JetCoordinate(j.dependent, std::move(idx))));
    }
    if (sys_.dependent_index(name) >= 0)
      return ExprTree::sym(Base::jet(JetCoordinate(name, std::move(index))));
    if (isJet)
      throw SyntaxError(line, col, "'" + name + "' is not a dependent variable");
    if (sys_.independent_index(name) >= 0) return ExprTree::sym(Base::indep(name));
    if (sys_.is_parameter(name)) return ExprTree::sym(Base::param(name));
    throw Error(ErrorCode::UndeclaredSymbol,
                "line " + std::to_string(line) + ": undeclared symbol '" + name + "'");
  }

  Cursor& c_;
  const PDESystem& sys_;
};

Expr parse_expr_cursor(Cursor& c, const PDESystem& sys) {
  ExprGrammar g(c, sys);
  return normalize(g.parse_expr());
}

ExprVec parse_tuple_cursor(Cursor& c, const PDESystem& sys) {
  ExprVec out;
  if (c.accept_sym("(")) {
    out.push_back(parse_expr_cursor(c, sys));
    while (c.accept_sym(",")) out.push_back(parse_expr_cursor(c, sys));
    c.expect_sym(")");
    return out;
  }
  out.push_back(parse_expr_cursor(c, sys));
  return out;
}

// --- operator entry parser ------------------------------------------------------

class OpGrammar {
public:
  OpGrammar(Cursor& c, const PDESystem& sys) : c_(c), sys_(sys) {}

  OpEntry parse_entry() {
    OpEntry lhs = parse_term();
    while (true) {
      if (c_.accept_sym("+"))
        lhs = entry_add(lhs, parse_term());
      else if (c_.accept_sym("-"))
        lhs = entry_add(lhs, entry_negate(parse_term()));
      else
        return lhs;
    }
  }

private:
  OpEntry parse_term() {
    OpEntry lhs = parse_factor();
    while (true) {
      if (c_.accept_sym("*")) {
        lhs = entry_compose(lhs, parse_factor());
      } else if (c_.accept_sym("/")) {
        OpEntry rhs = parse_factor();
        if (rhs.size() != 1 || !rhs[0].index.empty())
          c_.fail("operator division only by scalar monomials");
        Expr inv = Expr(Rational(1)).divided_by(rhs[0].coeff);
        lhs = entry_compose(lhs, entry_normalize({{inv, {}}}));
      } else {
        return lhs;
      }
    }
  }

  OpEntry parse_factor() {
    if (c_.accept_sym("-")) return entry_negate(parse_factor());
    if (c_.accept_sym("+")) return parse_factor();
    OpEntry base = parse_atom();
    if (c_.accept_sym("^")) {
      if (base.size() != 1 || !base[0].index.empty())
        c_.fail("cannot raise a derivative operator to a power");
      auto ev = expr_to_exponent(normalize(parse_exponent_tree()));
      if (!ev) c_.fail("operator coefficient exponent must be affine in parameters");
      return entry_normalize({{base[0].coeff.pow(*ev), {}}});
    }
    return base;
  }

  OpEntry parse_atom() {
    const Token& t = c_.peek();
    if (t.kind == Token::Kind::Ident && t.text == "D") {
      c_.get();
      c_.expect_sym("[");
      MultiIndex idx;
      idx.push_back(c_.expect_ident());
      while (c_.accept_sym(",")) idx.push_back(c_.expect_ident());
      c_.expect_sym("]");
      for (const auto& x : idx)
        if (sys_.independent_index(x) < 0)
          throw SyntaxError(t.line, t.col, "derivative index '" + x + "' is not independent");
      std::sort(idx.begin(), idx.end());
      return entry_normalize({{Expr(Rational(1)), idx}});
    }
    if (t.kind == Token::Kind::Sym && t.text == "(") {
      c_.get();
      OpEntry e = parse_entry();
      c_.expect_sym(")");
      return e;
    }
    if (t.kind == Token::Kind::Number)
      return entry_normalize({{Expr(parse_number_tok(c_)), {}}});
    // A bare scalar symbol or jet acting by multiplication. Exponents are
    // picked up at the factor level above.
    return entry_normalize({{parse_scalar_atom(), {}}});
  }

  Expr parse_scalar_atom() {
    if (c_.peek().kind != Token::Kind::Ident) c_.fail("expected operator atom");
    const Token& t = c_.peek();
    std::string name = c_.get().text;
    std::vector<std::string> index;
    bool isJet = false;
    if (c_.accept_sym("[")) {
      isJet = true;
      index.push_back(c_.expect_ident());
      while (c_.accept_sym(",")) index.push_back(c_.expect_ident());
      c_.expect_sym("]");
    }
    auto alias = sys_.aliases.find(name);
    if (alias != sys_.aliases.end()) {
      JetCoordinate j = alias->second;
      std::vector<std::string> idx = j.index;
      idx.insert(idx.end(), index.begin(), index.end());
      return Expr::jet(JetCoordinate(j.dependent, std::move(idx)));
    }
    if (sys_.dependent_index(name) >= 0)
      return Expr::jet(JetCoordinate(name, std::move(index)));
    if (!isJet && sys_.independent_index(name) >= 0) return Expr::symbol(Base::indep(name));
    if (!isJet && sys_.is_parameter(name)) return Expr::symbol(Base::param(name));
    throw Error(ErrorCode::UndeclaredSymbol,
                "line " + std::to_string(t.line) + ": undeclared symbol '" + name + "'");
  }

  ExprTreePtr parse_exponent_tree() {
    if (c_.peek().kind == Token::Kind::Number) return ExprTree::num(parse_number_tok(c_));
    if (c_.accept_sym("(")) {
      ExprGrammar g(c_, sys_);
      ExprTreePtr e = g.parse_expr();
      c_.expect_sym(")");
      return e;
    }
    c_.fail("expected exponent");
  }

  Cursor& c_;
  const PDESystem& sys_;
};

TotalDiffOp parse_op_matrix_cursor(Cursor& c, const PDESystem& sys) {
  OpGrammar g(c, sys);
  c.expect_sym("[");
  std::vector<std::vector<OpEntry>> rows;
  do {
    c.expect_sym("[");
    std::vector<OpEntry> row;
    row.push_back(g.parse_entry());
    while (c.accept_sym(",")) row.push_back(g.parse_entry());
    c.expect_sym("]");
    rows.push_back(std::move(row));
  } while (c.accept_sym(","));
  c.expect_sym("]");
  TotalDiffOp op(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      c.fail("ragged operator matrix");
    for (size_t j = 0; j < rows[i].size(); ++j) op.entries[i][j] = rows[i][j];
  }
  return op;
}

// --- combo parser (ParamScalar coefficients over named objects) -----------------

struct ComboValue {
  bool isVec = false;
  ParamScalar scalar;
  NamedCombo vec;
};

class ComboGrammar {
public:
  ComboGrammar(Cursor& c, const PDESystem& sys, const std::set<std::string>& names)
      : c_(c), sys_(sys), names_(names) {}

  ComboValue parse_expr() {
    ComboValue lhs = parse_term();
    while (true) {
      if (c_.accept_sym("+"))
        lhs = add(lhs, parse_term(), false);
      else if (c_.accept_sym("-"))
        lhs = add(lhs, parse_term(), true);
      else
        return lhs;
    }
  }

private:
  ComboValue add(ComboValue a, ComboValue b, bool subtract) {
    // Promote scalars into vectors only when mixing kinds is an error;
    // scalar+scalar stays scalar, vec+vec merges.
    if (a.isVec != b.isVec) c_.fail("cannot add scalar and object combination");
    ComboValue r;
    if (!a.isVec) {
      r.scalar = subtract ? a.scalar - b.scalar : a.scalar + b.scalar;
      return r;
    }
    r.isVec = true;
    r.vec = std::move(a.vec);
    for (auto& [n, s] : b.vec) {
      ParamScalar v = subtract ? -s : s;
      auto it = r.vec.find(n);
      if (it == r.vec.end())
        r.vec.emplace(n, v);
      else {
        it->second = it->second + v;
        if (it->second.is_zero()) r.vec.erase(it);
      }
    }
    return r;
  }

  ComboValue parse_term() {
    ComboValue lhs = parse_factor();
    while (true) {
      if (c_.accept_sym("*")) {
        ComboValue rhs = parse_factor();
        lhs = mul(lhs, rhs);
      } else if (c_.accept_sym("/")) {
        ComboValue rhs = parse_factor();
        if (rhs.isVec) c_.fail("cannot divide by an object combination");
        if (rhs.scalar.is_zero()) c_.fail("division by zero");
        ComboValue inv;
        inv.scalar = ParamScalar(Rational(1)) / rhs.scalar;
        lhs = mul(lhs, inv);
      } else {
        return lhs;
      }
    }
  }

  ComboValue mul(const ComboValue& a, const ComboValue& b) {
    if (a.isVec && b.isVec) c_.fail("cannot multiply two object combinations");
    ComboValue r;
    if (!a.isVec && !b.isVec) {
      r.scalar = a.scalar * b.scalar;
      return r;
    }
    const NamedCombo& v = a.isVec ? a.vec : b.vec;
    const ParamScalar& s = a.isVec ? b.scalar : a.scalar;
    r.isVec = true;
    for (const auto& [n, coeff] : v) {
      ParamScalar p = coeff * s;
      if (!p.is_zero()) r.vec[n] = p;
    }
    return r;
  }

  ComboValue parse_factor() {
    if (c_.accept_sym("-")) {
      ComboValue v = parse_factor();
      if (v.isVec) {
        for (auto& [n, s] : v.vec) s = -s;
      } else {
        v.scalar = -v.scalar;
      }
      return v;
    }
    if (c_.accept_sym("+")) return parse_factor();
    ComboValue base = parse_atom();
    if (c_.accept_sym("^")) {
      if (base.isVec) c_.fail("cannot raise an object combination to a power");
      bool neg = false;
      Rational n;
      if (c_.accept_sym("(")) {
        neg = c_.accept_sym("-");
        n = parse_number_tok(c_);
        c_.expect_sym(")");
      } else {
        n = parse_number_tok(c_);
      }
      if (!is_integer(n)) c_.fail("scalar exponent must be an integer");
      long k = numerator(n).convert_to<long>();
      base.scalar = base.scalar.pow(neg ? -k : k);
    }
    return base;
  }

  ComboValue parse_atom() {
    const Token& t = c_.peek();
    ComboValue r;
    if (t.kind == Token::Kind::Number) {
      r.scalar = ParamScalar(parse_number_tok(c_));
      return r;
    }
    if (t.kind == Token::Kind::Sym && t.text == "(") {
      c_.get();
      ComboValue v = parse_expr();
      c_.expect_sym(")");
      return v;
    }
    if (t.kind != Token::Kind::Ident) c_.fail("expected coefficient atom");
    std::string name = c_.get().text;
    if (names_.count(name)) {
      r.isVec = true;
      r.vec[name] = ParamScalar(Rational(1));
      return r;
    }
    if (sys_.is_parameter(name)) {
      r.scalar = ParamScalar::var(name);
      return r;
    }
    throw Error(ErrorCode::UndeclaredSymbol,
                "line " + std::to_string(t.line) + ": '" + name +
                    "' is neither a parameter nor a named object");
  }

  Cursor& c_;
  const PDESystem& sys_;
  const std::set<std::string>& names_;
};

NamedCombo parse_combo_cursor(Cursor& c, const PDESystem& sys,
                              const std::set<std::string>& names) {
  ComboGrammar g(c, sys, names);
  ComboValue v = g.parse_expr();
  if (!v.isVec) {
    if (v.scalar.is_zero()) return {};
    c.fail("expected a combination of named objects");
  }
  return v.vec;
}

}  // namespace

// --- public single-string entry points ------------------------------------------

Expr parse_expr(const std::string& text, const PDESystem& sys) {
  Cursor c(tokenize(text, 1));
  Expr e = parse_expr_cursor(c, sys);
  if (!c.at_end()) c.fail("trailing input");
  return e;
}

ExprVec parse_tuple(const std::string& text, const PDESystem& sys) {
  Cursor c(tokenize(text, 1));
  ExprVec v = parse_tuple_cursor(c, sys);
  if (!c.at_end()) c.fail("trailing input");
  return v;
}

ParamScalar parse_param_scalar(const std::string& text, const PDESystem& sys) {
  Cursor c(tokenize(text, 1));
  ComboGrammar g(c, sys, {});
  ComboValue v = g.parse_expr();
  if (!c.at_end()) c.fail("trailing input");
  if (v.isVec) c.fail("expected a scalar");
  return v.scalar;
}

TotalDiffOp parse_op_matrix(const std::string& text, const PDESystem& sys) {
  Cursor c(tokenize(text, 1));
  TotalDiffOp op = parse_op_matrix_cursor(c, sys);
  if (!c.at_end()) c.fail("trailing input");
  return op;
}

NamedCombo parse_combo(const std::string& text, const PDESystem& sys,
                       const std::set<std::string>& names) {
  Cursor c(tokenize(text, 1));
  NamedCombo v = parse_combo_cursor(c, sys, names);
  if (!c.at_end()) c.fail("trailing input");
  return v;
}

std::string render(const NamedCombo& combo) {
  if (combo.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [name, coeff] : combo) {
    std::string cs = render(coeff);
    std::string piece;
    bool neg = false;
    if (cs == "1") {
      piece = name;
    } else if (cs == "-1") {
      piece = name;
      neg = true;
    } else {
      if (!cs.empty() && cs[0] == '-') {
        neg = true;
        cs = cs.substr(1);
      }
      bool needParen = cs.find_first_of("+- ") != std::string::npos;
      piece = (needParen ? "(" + cs + ")" : cs) + "*" + name;
    }
    if (first) {
      s += (neg ? "-" : "") + piece;
      first = false;
    } else {
      s += (neg ? " - " : " + ") + piece;
    }
  }
  return s;
}

// --- system file parser ------------------------------------------------------------

namespace {

struct Line {
  int number;
  std::string text;
};

std::vector<Line> logical_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto notspace = [](unsigned char ch) { return !std::isspace(ch); };
    auto b = std::find_if(raw.begin(), raw.end(), notspace);
    auto e = std::find_if(raw.rbegin(), raw.rend(), notspace).base();
    if (b >= e) continue;
    out.push_back({n, std::string(b, e)});
  }
  return out;
}

// Splits "lhs = rhs" at the first top-level '='.
std::optional<std::pair<std::string, std::string>> split_assign(const std::string& s) {
  int depth = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == '=' && depth == 0 && (i == 0 || s[i - 1] != '!'))
      return std::make_pair(s.substr(0, i), s.substr(i + 1));
  }
  return std::nullopt;
}

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

// Pops a trailing "if <variant>" guard.
std::string pop_guard(std::string& s) {
  auto pos = s.rfind(" if ");
  if (pos == std::string::npos) return "";
  std::string guard = strip(s.substr(pos + 4));
  if (guard.empty() || guard.find(' ') != std::string::npos) return "";
  s = strip(s.substr(0, pos));
  return guard;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

class SystemFileParser {
public:
  explicit SystemFileParser(const std::string& text) : lines_(logical_lines(text)) {}

  SystemFile parse() {
    while (pos_ < lines_.size()) top_level(next());
    validate();
    return std::move(file_);
  }

private:
  const Line& next() { return lines_[pos_++]; }
  bool more() const { return pos_ < lines_.size(); }
  const Line& peek() const { return lines_[pos_]; }

  [[noreturn]] void fail(const Line& ln, const std::string& msg) {
    throw SyntaxError(ln.number, 1, msg);
  }

  void declare(const std::string& name, const Line& ln) {
    if (!declared_.insert(name).second)
      throw Error(ErrorCode::DuplicateName,
                  "line " + std::to_string(ln.number) + ": duplicate name '" + name + "'");
  }

  void top_level(const Line& ln) {
    auto words = split_words(ln.text);
    const std::string& kw = words[0];
    PDESystem& sys = file_.system;
    if (kw == "system") {
      if (words.size() != 2) fail(ln, "system <name>");
      sys.name = words[1];
    } else if (kw == "independents") {
      for (size_t i = 1; i < words.size(); ++i) {
        declare(words[i], ln);
        sys.independents.push_back(words[i]);
      }
    } else if (kw == "dependents") {
      for (size_t i = 1; i < words.size(); ++i) {
        declare(words[i], ln);
        sys.dependents.push_back(words[i]);
      }
    } else if (kw == "parameters") {
      parse_parameters(ln);
    } else if (kw == "aliases") {
      block_lines([&](const Line& l) {
        auto kv = split_assign(l.text);
        if (!kv) fail(l, "alias: name = dependent[index]");
        std::string name = strip(kv->first);
        declare(name, l);
        Cursor c(tokenize(kv->second, l.number));
        std::string dep = c.expect_ident();
        if (sys.dependent_index(dep) < 0) fail(l, "alias target must be a dependent");
        c.expect_sym("[");
        std::vector<std::string> idx;
        idx.push_back(c.expect_ident());
        while (c.accept_sym(",")) idx.push_back(c.expect_ident());
        c.expect_sym("]");
        sys.aliases[name] = JetCoordinate(dep, idx);
      });
    } else if (kw == "variant") {
      VariantDecl v;
      if (words.size() < 2) fail(ln, "variant <name> [default]");
      v.name = words[1];
      v.isDefault = words.size() > 2 && words[2] == "default";
      block_lines([&](const Line& l) {
        auto ws = split_words(l.text);
        if (ws.size() < 2 || ws[0] != "set") fail(l, "variant body: set <param> = <value>");
        auto kv = split_assign(l.text);
        if (!kv) fail(l, "set <param> = <value>");
        auto pw = split_words(kv->first);
        std::string param = pw.back();
        Cursor c(tokenize(kv->second, l.number));
        v.sets[param] = parse_rational_value(c);
      });
      file_.variants.push_back(std::move(v));
    } else if (kw == "equations") {
      block_lines([&](const Line& l) {
        auto kv = split_assign(l.text);
        if (!kv) fail(l, "equation: name = expr");
        std::string name = strip(kv->first);
        declare(name, l);
        sys.equationNames.push_back(name);
        sys.equations.push_back(parse_line_expr(kv->second, l));
      });
    } else if (kw == "evolution") {
      parse_evolution(ln);
    } else if (kw == "symmetries" || kw == "adjoint_symmetries" || kw == "potential_symmetries") {
      auto& dest = kw == "symmetries"
                       ? file_.symmetries
                       : (kw == "adjoint_symmetries" ? file_.adjointSymmetries
                                                     : file_.potentialSymmetries);
      bool sharesNames = kw == "potential_symmetries";
      block_lines([&](const Line& l) {
        std::string body = l.text;
        std::string guard = pop_guard(body);
        auto kv = split_assign(body);
        if (!kv) fail(l, "object: name = (components)");
        std::string name = strip(kv->first);
        if (!sharesNames) declare(name, l);
        Cursor c(tokenize(kv->second, l.number));
        ExprVec comps = parse_tuple_cursor(c, sys);
        if (!c.at_end()) c.fail("trailing input");
        dest.push_back({name, std::move(comps), guard});
      });
    } else if (kw == "r_ops") {
      block_lines([&](const Line& l) {
        std::string body = l.text;
        std::string guard = pop_guard(body);
        auto kv = split_assign(body);
        if (!kv) fail(l, "r_op: R[Name] = [[...]]");
        Cursor lhs(tokenize(kv->first, l.number));
        if (lhs.expect_ident() != "R") fail(l, "r_op line must start with R[...]");
        lhs.expect_sym("[");
        std::string target = lhs.expect_ident();
        lhs.expect_sym("]");
        Cursor c(tokenize(kv->second, l.number));
        TotalDiffOp op = parse_op_matrix_cursor(c, sys);
        if (!c.at_end()) c.fail("trailing input");
        file_.rops.push_back({target, std::move(op), guard});
      });
    } else if (kw == "table") {
      parse_table(ln);
    } else if (kw == "bracket") {
      parse_bracket(ln);
    } else if (kw == "noether") {
      parse_noether(ln);
    } else if (kw == "variational") {
      parse_variational(ln);
    } else if (kw == "isomorphism") {
      parse_isomorphism(ln);
    } else if (kw == "classify") {
      block_lines([&](const Line& l) {
        std::string body = l.text;
        std::string guard = pop_guard(body);
        auto ws = split_words(body);
        if (ws.size() != 2 || (ws[0] != "multiplier" && ws[0] != "non_multiplier"))
          fail(l, "classify body: multiplier <name> | non_multiplier <name>");
        file_.classify.push_back({ws[1], ws[0] == "multiplier", guard});
      });
    } else if (kw == "meta") {
      block_lines([&](const Line& l) {
        auto kv = split_assign(l.text);
        if (!kv) fail(l, "meta: key = value");
        file_.meta[strip(kv->first)] = strip(kv->second);
      });
    } else {
      fail(ln, "unknown section '" + kw + "'");
    }
  }

  void parse_parameters(const Line& ln) {
    std::string body = ln.text.substr(std::string("parameters").size());
    std::string names = body, constraints;
    auto semi = body.find(';');
    if (semi != std::string::npos) {
      names = body.substr(0, semi);
      constraints = body.substr(semi + 1);
    }
    for (const auto& w : split_words(names)) {
      declare(w, ln);
      file_.system.parameters.push_back(w);
    }
    if (!constraints.empty()) {
      // comma-separated "p != 1" clauses
      std::istringstream in(constraints);
      std::string clause;
      while (std::getline(in, clause, ',')) {
        Cursor c(tokenize(clause, ln.number));
        std::string p = c.expect_ident();
        if (!file_.system.is_parameter(p)) fail(ln, "constraint on undeclared parameter " + p);
        c.expect_sym("!=");
        Rational v = parse_rational_value(c);
        file_.system.constraints.push_back({p, v});
      }
    }
  }

  void parse_evolution(const Line& ln) {
    PDESystem& sys = file_.system;
    std::map<std::string, Expr> solved;
    std::string timeVar;
    block_lines([&](const Line& l) {
      auto kv = split_assign(l.text);
      if (!kv) fail(l, "evolution: u[t] = expr");
      Cursor c(tokenize(kv->first, l.number));
      std::string dep = c.expect_ident();
      if (sys.dependent_index(dep) < 0) fail(l, dep + " is not a dependent");
      c.expect_sym("[");
      std::string tv = c.expect_ident();
      c.expect_sym("]");
      if (timeVar.empty()) timeVar = tv;
      if (tv != timeVar) fail(l, "mixed evolution directions");
      solved[dep] = parse_line_expr(kv->second, l);
    });
    if (solved.size() != sys.dependents.size())
      throw Error(ErrorCode::LengthMismatch, "evolution block must solve every dependent");
    PDESystem::Evolution evo;
    evo.timeVar = timeVar;
    for (const auto& d : sys.dependents) evo.rhs.push_back(solved.at(d));
    sys.evolution = std::move(evo);
  }

  void parse_table(const Line& ln) {
    std::string header = ln.text;
    std::string guard = pop_guard(header);
    auto words = split_words(header);
    if (words.size() != 2) fail(ln, "table <name> [if variant]");
    TableBlock tb;
    tb.name = words[1];
    tb.guard = guard;
    block_lines([&](const Line& l) {
      auto kv = split_assign(l.text);
      if (!kv) fail(l, "table entry");
      std::string lhs = strip(kv->first);
      if (lhs == "kind") {
        tb.kind = std::stoi(strip(kv->second));
        return;
      }
      Cursor c(tokenize(lhs, l.number));
      std::string open = c.peek().text;
      if (!c.accept_sym("[") && !c.accept_sym("(")) c.fail("table entry key");
      std::string row = c.expect_ident();
      c.expect_sym(",");
      std::string col = c.expect_ident();
      if (open == "[") c.expect_sym("]");
      else c.expect_sym(")");
      tb.entries.push_back({row, col, parse_line_combo(kv->second, l)});
    });
    file_.tables.push_back(std::move(tb));
  }

  void parse_bracket(const Line& ln) {
    std::string header = ln.text;
    std::string guard = pop_guard(header);
    auto words = split_words(header);
    if (words.size() != 2) fail(ln, "bracket <name> [if variant]");
    BracketBlock bb;
    bb.name = words[1];
    bb.guard = guard;
    block_lines([&](const Line& l) {
      auto ws = split_words(l.text);
      if (ws[0] == "basis") {
        auto kv = split_assign(l.text.substr(5));
        if (!kv) fail(l, "basis name = combo");
        bb.basis.emplace_back(strip(kv->first), parse_line_combo(kv->second, l));
        return;
      }
      if (ws[0] == "require") {
        Cursor c(tokenize(l.text.substr(7), l.number));
        std::string n = c.expect_ident();
        c.expect_sym("!=");
        bb.requires_nonzero.emplace_back(n, parse_rational_value(c));
        return;
      }
      if (ws[0] == "define") {
        auto kv = split_assign(l.text.substr(6));
        if (!kv) fail(l, "define name = scalar");
        bb.defines.emplace_back(strip(kv->first),
                                parse_line_scalar(kv->second, l, bb.defines));
        return;
      }
      if (ws[0] == "instantiate") {
        std::istringstream in(l.text.substr(11));
        std::string clause;
        while (std::getline(in, clause, ',')) {
          auto kv = split_assign(clause);
          if (!kv) fail(l, "instantiate p = v, ...");
          Cursor c(tokenize(kv->second, l.number));
          bb.instantiate[strip(kv->first)] = parse_rational_value(c);
        }
        return;
      }
      auto kv = split_assign(l.text);
      if (!kv) fail(l, "bracket entry or key = value");
      std::string lhs = strip(kv->first);
      if (lhs == "kind") {
        bb.kind = std::stoi(strip(kv->second));
        return;
      }
      if (lhs == "policy") {
        bb.policy = strip(kv->second);
        return;
      }
      if (lhs == "q") {
        bb.q = parse_line_combo(kv->second, l);
        return;
      }
      if (lhs == "scaling_symmetry") {
        bb.scalingSymmetry = strip(kv->second);
        return;
      }
      // bracket table entry [A,B] = combo over primed basis + defines
      Cursor c(tokenize(lhs, l.number));
      c.expect_sym("[");
      std::string row = c.expect_ident();
      c.expect_sym(",");
      std::string col = c.expect_ident();
      c.expect_sym("]");
      bb.entries.push_back({row, col, parse_bracket_combo(kv->second, l, bb)});
    });
    file_.brackets.push_back(std::move(bb));
  }

  void parse_noether(const Line& ln) {
    std::string header = ln.text;
    std::string guard = pop_guard(header);
    auto words = split_words(header);
    if (words.size() != 2) fail(ln, "noether <name>");
    NoetherBlock nb;
    nb.name = words[1];
    nb.guard = guard;
    block_lines([&](const Line& l) {
      auto kv = split_assign(l.text);
      if (!kv) fail(l, "noether body: key = value");
      std::string key = strip(kv->first);
      if (key == "q") {
        nb.q = strip(kv->second);
      } else if (key == "scale") {
        Cursor c(tokenize(kv->second, l.number));
        nb.scale = parse_rational_value(c);
      } else if (key == "op") {
        Cursor c(tokenize(kv->second, l.number));
        nb.op = parse_op_matrix_cursor(c, file_.system);
      } else {
        fail(l, "unknown noether key " + key);
      }
    });
    file_.noethers.push_back(std::move(nb));
  }

  void parse_variational(const Line& ln) {
    std::string header = ln.text;
    std::string guard = pop_guard(header);
    auto words = split_words(header);
    if (words.size() != 2) fail(ln, "variational <name>");
    VariationalBlock vb;
    vb.name = words[1];
    vb.guard = guard;
    block_lines([&](const Line& l) {
      auto kv = split_assign(l.text);
      if (!kv) fail(l, "variational body: key = value");
      std::string key = strip(kv->first);
      if (key == "kind") {
        vb.kind = strip(kv->second);
      } else if (key == "op") {
        Cursor c(tokenize(kv->second, l.number));
        vb.op = parse_op_matrix_cursor(c, file_.system);
      } else if (key == "density") {
        vb.density = parse_line_expr(kv->second, l);
      } else if (key == "lhs") {
        Cursor c(tokenize(kv->second, l.number));
        vb.lhs = parse_tuple_cursor(c, file_.system);
      } else {
        fail(l, "unknown variational key " + key);
      }
    });
    if (vb.kind != "hamiltonian" && vb.kind != "lagrangian")
      fail(ln, "variational kind must be hamiltonian or lagrangian");
    file_.variationals.push_back(std::move(vb));
  }

  void parse_isomorphism(const Line& ln) {
    std::string header = ln.text;
    std::string guard = pop_guard(header);
    auto words = split_words(header);
    if (words.size() != 2) fail(ln, "isomorphism <name>");
    IsomorphismBlock ib;
    ib.name = words[1];
    ib.guard = guard;
    block_lines([&](const Line& l) {
      auto arrow = l.text.find("->");
      if (arrow != std::string::npos) {
        std::string lhs = strip(l.text.substr(0, arrow));
        ib.images.emplace_back(lhs, parse_line_combo(l.text.substr(arrow + 2), l));
        return;
      }
      auto kv = split_assign(l.text);
      if (!kv) fail(l, "isomorphism body");
      std::string key = strip(kv->first);
      if (key == "bracket") {
        ib.bracket = strip(kv->second);
      } else if (key == "scale") {
        Cursor c(tokenize(kv->second, l.number));
        ib.scale = parse_rational_value(c);
      } else {
        fail(l, "unknown isomorphism key " + key);
      }
    });
    file_.isomorphisms.push_back(std::move(ib));
  }

  void block_lines(const std::function<void(const Line&)>& fn) {
    while (true) {
      if (!more()) throw SyntaxError(lines_.back().number, 1, "unterminated block");
      const Line& l = next();
      if (l.text == "end") return;
      fn(l);
    }
  }

  Expr parse_line_expr(const std::string& text, const Line& l) {
    Cursor c(tokenize(text, l.number));
    Expr e = parse_expr_cursor(c, file_.system);
    if (!c.at_end()) c.fail("trailing input");
    return e;
  }

  std::set<std::string> object_names() const {
    std::set<std::string> names;
    for (const auto& o : file_.symmetries) names.insert(o.name);
    for (const auto& o : file_.adjointSymmetries) names.insert(o.name);
    return names;
  }

  NamedCombo parse_line_combo(const std::string& text, const Line& l) {
    Cursor c(tokenize(text, l.number));
    std::set<std::string> names = object_names();
    NamedCombo combo = parse_combo_cursor(c, file_.system, names);
    if (!c.at_end()) c.fail("trailing input");
    return combo;
  }

  ParamScalar parse_line_scalar(const std::string& text, const Line& l,
                                const std::vector<std::pair<std::string, ParamScalar>>& defines) {
    // `define` lines may reference earlier defines; realize them by textual
    // parameter-like lookup.
    Cursor c(tokenize(text, l.number));
    ComboGrammar g(c, file_.system, {});
    (void)defines;
    ComboValue v = g.parse_expr();
    if (!c.at_end()) c.fail("trailing input");
    if (v.isVec) c.fail("define expects a scalar");
    return v.scalar;
  }

  NamedCombo parse_bracket_combo(const std::string& text, const Line& l, const BracketBlock& bb) {
    std::set<std::string> names;
    for (const auto& [n, combo] : bb.basis) names.insert(n);
    // Defines enter as substituted scalars via a post-pass: we parse with the
    // define names exposed as extra "parameters".
    PDESystem extended = file_.system;
    for (const auto& [n, s] : bb.defines) extended.parameters.push_back(n);
    Cursor c(tokenize(text, l.number));
    NamedCombo combo = parse_combo_cursor(c, extended, names);
    if (!c.at_end()) c.fail("trailing input");
    // Substitute defines (they are polynomials in true parameters).
    for (auto& [n, coeff] : combo) {
      for (const auto& [dn, ds] : bb.defines) {
        // replace the variable dn by ds inside coeff
        coeff = substitute_var(coeff, dn, ds);
      }
    }
    return combo;
  }

  static ParamScalar substitute_var(const ParamScalar& s, const std::string& var,
                                    const ParamScalar& value) {
    auto subPoly = [&](const MultiPoly& p) {
      ParamScalar acc(Rational(0));
      for (const auto& [m, c] : p.terms) {
        ParamScalar term{c};
        for (const auto& [v, e] : m) {
          ParamScalar basev = v == var ? value : ParamScalar::var(v);
          term = term * basev.pow(e);
        }
        acc = acc + term;
      }
      return acc;
    };
    return subPoly(s.num()) / subPoly(s.den());
  }

  void validate() {
    const PDESystem& sys = file_.system;
    if (sys.independents.empty() || sys.dependents.empty() || sys.equations.empty())
      throw Error(ErrorCode::ValidationFailure,
                  "system must declare independents, dependents and equations");
    for (const auto& o : file_.symmetries)
      if (static_cast<int>(o.components.size()) != sys.dependentCount())
        throw Error(ErrorCode::LengthMismatch,
                    "symmetry " + o.name + " must have one component per dependent");
    for (const auto& o : file_.adjointSymmetries)
      if (static_cast<int>(o.components.size()) != sys.equationCount())
        throw Error(ErrorCode::LengthMismatch,
                    "adjoint-symmetry " + o.name + " must have one component per equation");
    std::set<std::string> names = object_names();
    for (const auto& r : file_.rops)
      if (!names.count(r.target))
        throw Error(ErrorCode::ValidationFailure, "R-operator for unknown object " + r.target);
  }

  std::vector<Line> lines_;
  size_t pos_ = 0;
  SystemFile file_;
  std::set<std::string> declared_;
};

}  // namespace

SystemFile parse_system(const std::string& text) {
  SystemFileParser p(text);
  return p.parse();
}

SystemFile parse_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::ValidationFailure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

}  // namespace jb
