#pragma once

// The step-question language.
//
//   program  := (unitdecl | ratedecl | datadecl | question | step | return | comment)*
//   unitdecl := "unit" NAME
//   ratedecl := "rate" QUANTITY "==" QUANTITY
//   datadecl := ("data" | "helpful") NAME "=" (QUANTITY | SYMBOL [unit])
//   question := "?" text-to-end-of-line          (attaches to the next step)
//   step     := NAME ":=" expr
//   return   := "return" NAME
//   comment  := "%" text-to-end-of-line
//
// Statements end at a newline or ';'.  Expressions use + - * / with the usual
// precedence, unary minus, integer powers (^), sqrt(...), parentheses and the
// constant pi.  A numeral directly followed by a unit name is a quantity
// literal: `72 cherry`, `1/2 min`, `4 leg/head`.

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "namedcalc/error.hpp"
#include "namedcalc/numeric.hpp"
#include "namedcalc/scalar.hpp"
#include "namedcalc/units.hpp"

namespace namedcalc {

// ------------------------------------------------------------------- AST

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct LiteralExpr {
  Quantity value;
};
struct VarExpr {
  std::string name;
};
struct NegateExpr {
  ExprPtr operand;
};
struct BinaryExpr {
  char op;  // + - * /
  ExprPtr lhs;
  ExprPtr rhs;
};
struct SqrtExpr {
  ExprPtr operand;
};
struct PowerExpr {
  ExprPtr base;
  int exponent;
};

struct Expr {
  std::variant<LiteralExpr, VarExpr, NegateExpr, BinaryExpr, SqrtExpr, PowerExpr> node;
  int line = 0;
  int column = 0;
};

inline bool structurally_equal(const Expr& a, const Expr& b);

inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  return structurally_equal(*a, *b);
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, LiteralExpr>) return x.value == y.value;
        if constexpr (std::is_same_v<T, VarExpr>) return x.name == y.name;
        if constexpr (std::is_same_v<T, NegateExpr>) return structurally_equal(x.operand, y.operand);
        if constexpr (std::is_same_v<T, BinaryExpr>) {
          return x.op == y.op && structurally_equal(x.lhs, y.lhs) && structurally_equal(x.rhs, y.rhs);
        }
        if constexpr (std::is_same_v<T, SqrtExpr>) return structurally_equal(x.operand, y.operand);
        if constexpr (std::is_same_v<T, PowerExpr>) {
          return x.exponent == y.exponent && structurally_equal(x.base, y.base);
        }
      },
      a.node);
}

/// Names an expression reads, in first-use order.
inline void collect_references(const Expr& e, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, VarExpr>) {
          if (std::find(out.begin(), out.end(), x.name) == out.end()) out.push_back(x.name);
        } else if constexpr (std::is_same_v<T, NegateExpr> || std::is_same_v<T, SqrtExpr>) {
          collect_references(*x.operand, out);
        } else if constexpr (std::is_same_v<T, BinaryExpr>) {
          collect_references(*x.lhs, out);
          collect_references(*x.rhs, out);
        } else if constexpr (std::is_same_v<T, PowerExpr>) {
          collect_references(*x.base, out);
        }
      },
      e.node);
}

// ------------------------------------------------------------ statements

enum class Role { Datum, Helpful };

inline std::string_view to_string(Role r) { return r == Role::Datum ? "data" : "helpful"; }

/// A declaration value that stands for a letter, e.g. `A min`.
struct SymbolValue {
  std::string symbol;
  UnitExpr unit;

  friend bool operator==(const SymbolValue&, const SymbolValue&) = default;
};

using DeclValue = std::variant<Quantity, SymbolValue>;

inline bool is_symbolic(const DeclValue& v) { return std::holds_alternative<SymbolValue>(v); }

inline const UnitExpr& unit_of(const DeclValue& v) {
  return std::visit([](const auto& x) -> const UnitExpr& { return x.unit; }, v);
}

struct UnitDecl {
  std::string name;
};
struct RateDecl {
  Quantity lhs;
  Quantity rhs;
};
struct Declaration {
  std::string name;
  Role role = Role::Datum;
  DeclValue value;
};
struct Step {
  std::string name;
  std::optional<std::string> question;
  ExprPtr expr;
};
struct ReturnStmt {
  std::string name;
};
struct CommentLine {};

struct Statement {
  std::variant<UnitDecl, RateDecl, Declaration, Step, ReturnStmt, CommentLine> node;
  std::string comment;  // text after % on the same line, without the %
  int line = 0;
};

class StepProgram {
 public:
  const std::vector<Statement>& statements() const { return statements_; }
  const UnitRegistry& registry() const { return registry_; }
  const std::vector<Declaration>& decls() const { return decls_; }
  const std::vector<Step>& steps() const { return steps_; }
  const std::string& target() const { return target_; }

  std::vector<std::string> unit_decls() const {
    std::vector<std::string> out;
    for (const auto& s : statements_) {
      if (std::holds_alternative<UnitDecl>(s.node) || std::holds_alternative<RateDecl>(s.node)) {
        out.push_back(render_unit_statement(s));
      }
    }
    return out;
  }

  const Declaration* find_decl(const std::string& name) const {
    for (const auto& d : decls_) {
      if (d.name == name) return &d;
    }
    return nullptr;
  }
  const Step* find_step(const std::string& name) const {
    for (const auto& s : steps_) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  std::vector<std::string> helpful_names() const {
    std::vector<std::string> out;
    for (const auto& d : decls_) {
      if (d.role == Role::Helpful) out.push_back(d.name);
    }
    return out;
  }

  static std::string render_unit_statement(const Statement& s) {
    if (const auto* u = std::get_if<UnitDecl>(&s.node)) return "unit " + u->name;
    const auto& r = std::get<RateDecl>(s.node);
    return "rate " + render(r.lhs) + " == " + render(r.rhs);
  }

 private:
  friend class Parser;
  friend StepProgram with_declaration_value(const StepProgram&, const std::string&, const DeclValue&);

  std::vector<Statement> statements_;
  UnitRegistry registry_;
  std::vector<Declaration> decls_;
  std::vector<Step> steps_;
  std::string target_;
};

// ----------------------------------------------------------------- lexer

enum class Tok {
  Ident,
  Integer,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  Assign,  // :=
  Equals,  // =
  EqEq,    // ==
  Question,
  Comment,
  End,  // newline or ;
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto error = [&](const std::string& what) {
    throw Error(ErrorCode::SyntaxError, what).at_position(line, col);
  };
  auto rest_of_line = [&]() {
    std::size_t start = i;
    while (i < src.size() && src[i] != '\n') ++i;
    std::string text(src.substr(start, i - start));
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    std::size_t lead = 0;
    while (lead < text.size() && std::isspace(static_cast<unsigned char>(text[lead]))) ++lead;
    col += static_cast<int>(i - start);
    return text.substr(lead);
  };
  while (i < src.size()) {
    char c = src[i];
    int tok_col = col;
    if (c == '\n') {
      out.push_back({Tok::End, "\n", line, tok_col});
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++col;
      continue;
    }
    if (c == '%') {
      ++i;
      ++col;
      out.push_back({Tok::Comment, rest_of_line(), line, tok_col});
      continue;
    }
    if (c == '?') {
      ++i;
      ++col;
      out.push_back({Tok::Question, rest_of_line(), line, tok_col});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && (std::isalpha(static_cast<unsigned char>(src[i])) || src[i] == '_' || src[i] == '.')) {
        col += static_cast<int>(i - start);
        error(src[i] == '.' ? "decimal points are not exact; write a fraction such as 3/2"
                            : "a number must be separated from the name that follows it");
      }
      out.push_back({Tok::Integer, std::string(src.substr(start, i - start)), line, tok_col});
      col += static_cast<int>(i - start);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), line, tok_col});
      col += static_cast<int>(i - start);
      continue;
    }
    auto two = src.substr(i, 2);
    if (two == ":=") {
      out.push_back({Tok::Assign, ":=", line, tok_col});
      i += 2;
      col += 2;
      continue;
    }
    if (two == "==") {
      out.push_back({Tok::EqEq, "==", line, tok_col});
      i += 2;
      col += 2;
      continue;
    }
    Tok kind;
    switch (c) {
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '^': kind = Tok::Caret; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '=': kind = Tok::Equals; break;
      case ';': kind = Tok::End; break;
      case ':':
        error("':' is not division here; write '/' (':=' assigns)");
      default:
        error(std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, std::string(1, c), line, tok_col});
    ++i;
    ++col;
  }
  out.push_back({Tok::Eof, "", line, col});
  return out;
}

inline bool is_keyword(std::string_view s) {
  return s == "unit" || s == "rate" || s == "data" || s == "helpful" || s == "return" || s == "sqrt";
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  /// `registry` seeds the unit atoms visible before the first statement.
  Parser(std::string_view source, UnitRegistry registry)
      : tokens_(tokenize(source)), registry_(std::move(registry)) {}

  StepProgram parse_program() {
    StepProgram p;
    std::optional<std::string> pending_question;
    int pending_line = 0;
    for (;;) {
      skip_blank_ends();
      if (peek().kind == Tok::Eof) break;
      Statement st;
      st.line = peek().line;
      if (peek().kind == Tok::Comment) {
        st.node = CommentLine{};
        st.comment = next().text;
        if (pending_question) fail_here("a question line must be followed by a step");
        p.statements_.push_back(std::move(st));
        continue;
      }
      if (peek().kind == Tok::Question) {
        if (pending_question) fail_here("two question lines in a row");
        pending_line = peek().line;
        pending_question = next().text;
        end_statement(nullptr);
        continue;
      }
      const Token& head = peek();
      if (head.kind != Tok::Ident) fail_here("expected a statement");
      if (head.text == "unit") {
        next();
        std::string name = expect_name("unit name");
        registry_ = registry_.declare_unit(name);
        st.node = UnitDecl{name};
      } else if (head.text == "rate") {
        next();
        Quantity lhs = parse_quantity_literal();
        expect(Tok::EqEq, "'=='");
        Quantity rhs = parse_quantity_literal();
        try {
          registry_ = registry_.declare_rate(lhs, rhs);
        } catch (Error& e) {
          e.at_position(head.line, head.column);
          throw;
        }
        st.node = RateDecl{lhs, rhs};
      } else if (head.text == "data" || head.text == "helpful") {
        Role role = next().text == "data" ? Role::Datum : Role::Helpful;
        const Token& name_tok = peek();
        std::string name = expect_name("variable name");
        define(name, name_tok);
        expect(Tok::Equals, "'='");
        Declaration d{name, role, parse_decl_value()};
        p.decls_.push_back(d);
        st.node = std::move(d);
      } else if (head.text == "return") {
        next();
        const Token& name_tok = peek();
        std::string name = expect_name("variable name");
        if (!defined_.count(name)) {
          throw Error(ErrorCode::UseBeforeDefinition, "return of undefined '" + name + "'")
              .at_position(name_tok.line, name_tok.column);
        }
        if (!p.target_.empty()) fail_here("more than one return");
        p.target_ = name;
        st.node = ReturnStmt{name};
      } else {
        const Token& name_tok = peek();
        std::string name = expect_name("variable name");
        expect(Tok::Assign, "':='");
        ExprPtr e = parse_expr();
        define(name, name_tok);
        Step s{name, pending_question, e};
        pending_question.reset();
        p.steps_.push_back(s);
        st.node = std::move(s);
      }
      if (pending_question && !std::holds_alternative<Step>(st.node)) {
        throw Error(ErrorCode::SyntaxError, "a question line must be followed by a step")
            .at_position(pending_line, 1);
      }
      end_statement(&st.comment);
      p.statements_.push_back(std::move(st));
    }
    if (pending_question) {
      throw Error(ErrorCode::SyntaxError, "a question line must be followed by a step").at_position(pending_line, 1);
    }
    if (p.target_.empty()) {
      if (p.steps_.empty()) fail_here("program has no steps and no return");
      p.target_ = p.steps_.back().name;
    }
    p.registry_ = registry_;
    return p;
  }

  /// A whole-text expression; names resolve freely (no definition checks).
  ExprPtr parse_standalone_expr() {
    free_names_ = true;
    ExprPtr e = parse_expr();
    if (peek().kind != Tok::Eof) fail_here("unexpected input after expression");
    return e;
  }

  /// A whole-text declaration value: `48 cherry`, `1/2 min`, `A`, `A min`.
  DeclValue parse_standalone_value() {
    DeclValue v = parse_decl_value();
    if (peek().kind != Tok::Eof) fail_here("unexpected input after value");
    return v;
  }

  Quantity parse_standalone_quantity() {
    Quantity q = parse_quantity_literal();
    if (peek().kind != Tok::Eof) fail_here("unexpected input after quantity");
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail_here(const std::string& what) const {
    const Token& t = peek();
    std::string near = t.kind == Tok::Eof ? "end of input" : t.kind == Tok::End ? "end of line" : "'" + t.text + "'";
    throw Error(ErrorCode::SyntaxError, what + " near " + near).at_position(t.line, t.column);
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail_here(std::string("expected ") + what);
    next();
  }

  std::string expect_name(const char* what) {
    if (peek().kind != Tok::Ident || is_keyword(peek().text)) fail_here(std::string("expected ") + what);
    return next().text;
  }

  void skip_blank_ends() {
    while (peek().kind == Tok::End) next();
  }

  void end_statement(std::string* comment) {
    if (peek().kind == Tok::Comment) {
      std::string text = next().text;
      if (comment) *comment = text;
    }
    if (peek().kind == Tok::Eof) return;
    if (peek().kind != Tok::End) fail_here("expected end of statement");
    next();
  }

  void define(const std::string& name, const Token& at) {
    if (!defined_.insert(name).second) {
      throw Error(ErrorCode::Redefinition, "'" + name + "' is already defined").at_position(at.line, at.column);
    }
  }

  // ---- quantities and units

  Rational parse_numeral() {
    if (peek().kind != Tok::Integer) fail_here("expected a number");
    Rational value(Integer(next().text));
    if (peek().kind == Tok::Slash && peek(1).kind == Tok::Integer && peek(2).kind != Tok::Caret) {
      next();
      Integer den(next().text);
      if (den == 0) {
        throw Error(ErrorCode::DivisionByZero, "fraction with zero denominator")
            .at_position(peek().line, peek().column);
      }
      value /= den;
    }
    return value;
  }

  int parse_small_int() {
    bool negative = false;
    if (peek().kind == Tok::Minus) {
      next();
      negative = true;
    }
    if (peek().kind != Tok::Integer || peek().text.size() > 6) fail_here("expected a small integer exponent");
    int v = std::stoi(next().text);
    return negative ? -v : v;
  }

  bool is_unit_name(const Token& t) const { return t.kind == Tok::Ident && registry_.contains(t.text); }

  void require_unit(const Token& t) const {
    if (t.kind != Tok::Ident) fail_here("expected a unit name");
    if (!registry_.contains(t.text)) {
      throw Error(ErrorCode::UnknownUnit, "unknown unit '" + t.text + "'").at_position(t.line, t.column);
    }
  }

  UnitExpr parse_unit_atom_power() {
    require_unit(peek());
    std::string atom = next().text;
    int e = 1;
    if (peek().kind == Tok::Caret) {
      next();
      e = parse_small_int();
    }
    return UnitExpr::atom(atom, e);
  }

  // atom(^int)? ((*|/) atom(^int)?)*.  In expressions the chain stops before
  // a name that is a variable, so `72 cherry/A` divides by the variable A.
  UnitExpr parse_unit_expr(bool in_expression) {
    UnitExpr u = parse_unit_atom_power();
    while ((peek().kind == Tok::Star || peek().kind == Tok::Slash) && peek(1).kind == Tok::Ident) {
      const Token& name = peek(1);
      if (in_expression && (!is_unit_name(name) || defined_.count(name.text) || free_names_)) break;
      bool divide = next().kind == Tok::Slash;
      UnitExpr factor = parse_unit_atom_power();
      u = divide ? u / factor : u * factor;
    }
    return u;
  }

  Quantity parse_quantity_literal() {
    bool negative = false;
    if (peek().kind == Tok::Minus) {
      next();
      negative = true;
    }
    Rational value = parse_numeral();
    if (negative) value = -value;
    UnitExpr unit;
    if (peek().kind == Tok::Ident) unit = parse_unit_expr(false);
    return Quantity{ExactScalar(value), unit};
  }

  DeclValue parse_decl_value() {
    if (peek().kind == Tok::Ident) {
      std::string symbol = expect_name("symbol");
      UnitExpr unit;
      if (peek().kind == Tok::Ident) unit = parse_unit_expr(false);
      return SymbolValue{symbol, unit};
    }
    return parse_quantity_literal();
  }

  // ---- expressions

  ExprPtr make(const Token& at, decltype(Expr::node) node) const {
    auto e = std::make_shared<Expr>();
    e->node = std::move(node);
    e->line = at.line;
    e->column = at.column;
    return e;
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token& op = next();
      ExprPtr rhs = parse_term();
      lhs = make(op, BinaryExpr{op.text[0], lhs, rhs});
    }
    return lhs;
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Token& op = next();
      ExprPtr rhs = parse_unary();
      lhs = make(op, BinaryExpr{op.text[0], lhs, rhs});
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (peek().kind == Tok::Minus) {
      const Token& op = next();
      return make(op, NegateExpr{parse_unary()});
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (peek().kind == Tok::Caret) {
      const Token& op = next();
      int k = parse_small_int();
      return make(op, PowerExpr{base, k});
    }
    return base;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Integer: {
        Rational value = parse_numeral();
        UnitExpr unit;
        if (is_unit_name(peek())) unit = parse_unit_expr(true);
        return make(t, LiteralExpr{Quantity{ExactScalar(value), unit}});
      }
      case Tok::LParen: {
        next();
        ExprPtr inner = parse_expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        if (t.text == "sqrt") {
          next();
          expect(Tok::LParen, "'(' after sqrt");
          ExprPtr inner = parse_expr();
          expect(Tok::RParen, "')'");
          return make(t, SqrtExpr{inner});
        }
        if (is_keyword(t.text)) fail_here("unexpected keyword");
        next();
        if (t.text == "pi" && !defined_.count("pi") && !free_names_) {
          return make(t, LiteralExpr{Quantity{ExactScalar::pi(), {}}});
        }
        if (!free_names_ && !defined_.count(t.text)) {
          throw Error(ErrorCode::UseBeforeDefinition, "'" + t.text + "' is used before it is defined")
              .at_position(t.line, t.column);
        }
        return make(t, VarExpr{t.text});
      }
      default:
        fail_here("expected an expression");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  UnitRegistry registry_;
  std::set<std::string> defined_;
  bool free_names_ = false;
};

/// Parses a step program.  Unit atoms start from `registry` (SI + min by default).
inline StepProgram parse(std::string_view source, const UnitRegistry& registry = UnitRegistry::standard()) {
  return Parser(source, registry).parse_program();
}

inline ExprPtr parse_expression(std::string_view text, const UnitRegistry& registry = UnitRegistry::standard()) {
  return Parser(text, registry).parse_standalone_expr();
}

inline DeclValue parse_value(std::string_view text, const UnitRegistry& registry) {
  return Parser(text, registry).parse_standalone_value();
}

inline Quantity parse_quantity(std::string_view text, const UnitRegistry& registry) {
  return Parser(text, registry).parse_standalone_quantity();
}

/// Copy of `p` with one declaration's value replaced.
inline StepProgram with_declaration_value(const StepProgram& p, const std::string& name, const DeclValue& value) {
  StepProgram out = p;
  bool found = false;
  for (auto& d : out.decls_) {
    if (d.name == name) {
      d.value = value;
      found = true;
    }
  }
  for (auto& s : out.statements_) {
    if (auto* d = std::get_if<Declaration>(&s.node); d && d->name == name) d->value = value;
  }
  if (!found) fail(ErrorCode::NotFound, "no declaration named '" + name + "'");
  return out;
}

// ------------------------------------------------------------ formatting

namespace detail {

inline int precedence(const Expr& e) {
  return std::visit(
      [](const auto& x) -> int {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BinaryExpr>) return (x.op == '+' || x.op == '-') ? 1 : 2;
        if constexpr (std::is_same_v<T, NegateExpr>) return 3;
        if constexpr (std::is_same_v<T, PowerExpr>) return 4;
        if constexpr (std::is_same_v<T, LiteralExpr>) {
          // a literal with a unit or a sign is not atomic next to operators
          if (!x.value.unit.empty() || x.value.magnitude.terms().size() > 1) return 2;
          if (!x.value.magnitude.is_rational()) return 5;
          Rational q = x.value.magnitude.as_rational();
          if (q < 0) return 3;
          return is_integer(q) ? 5 : 2;
        }
        return 5;
      },
      e.node);
}

}  // namespace detail

/// How variable references print; empty optional prints the name itself.
using ValuePrinter = std::function<std::optional<std::string>(const std::string&)>;

inline std::string format_expr(const Expr& e, const ValuePrinter& values = {}, bool spaced = false);

namespace detail {

inline std::string wrap(const Expr& e, bool paren, const ValuePrinter& values, bool spaced) {
  std::string s = format_expr(e, values, spaced);
  return paren ? "(" + s + ")" : s;
}

}  // namespace detail

/// Minimal-parenthesis rendering that parses back to the same tree.
/// `spaced` puts spaces around every operator (used in traces).
inline std::string format_expr(const Expr& e, const ValuePrinter& values, bool spaced) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LiteralExpr>) {
          return render(x.value);
        } else if constexpr (std::is_same_v<T, VarExpr>) {
          if (values) {
            if (auto v = values(x.name)) return *v;
          }
          return x.name;
        } else if constexpr (std::is_same_v<T, NegateExpr>) {
          return "-" + detail::wrap(*x.operand, detail::precedence(*x.operand) < 3, values, spaced);
        } else if constexpr (std::is_same_v<T, SqrtExpr>) {
          return "sqrt(" + format_expr(*x.operand, values, spaced) + ")";
        } else if constexpr (std::is_same_v<T, PowerExpr>) {
          return detail::wrap(*x.base, detail::precedence(*x.base) < 5, values, spaced) + "^" +
                 std::to_string(x.exponent);
        } else {
          const int p = (x.op == '+' || x.op == '-') ? 1 : 2;
          bool traced = static_cast<bool>(values);
          auto operand_prec = [&](const Expr& o) {
            // substituted values print like literals
            if (traced && std::holds_alternative<VarExpr>(o.node)) return 5;
            return detail::precedence(o);
          };
          std::string lhs = detail::wrap(*x.lhs, operand_prec(*x.lhs) < p, values, spaced);
          std::string rhs = detail::wrap(*x.rhs, operand_prec(*x.rhs) <= p, values, spaced);
          if (p == 1 || spaced) return lhs + " " + x.op + " " + rhs;
          return lhs + x.op + rhs;
        }
      },
      e.node);
}

inline std::string format_value(const DeclValue& v) {
  if (const auto* q = std::get_if<Quantity>(&v)) return render(*q);
  const auto& s = std::get<SymbolValue>(v);
  return s.unit.empty() ? s.symbol : s.symbol + " " + s.unit.render();
}

/// Canonical source text; comments and question lines are kept.
inline std::string format_program(const StepProgram& p) {
  std::string out;
  for (const auto& st : p.statements()) {
    std::string line;
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, UnitDecl> || std::is_same_v<T, RateDecl>) {
            line = StepProgram::render_unit_statement(st);
          } else if constexpr (std::is_same_v<T, Declaration>) {
            line = std::string(to_string(x.role)) + " " + x.name + " = " + format_value(x.value);
          } else if constexpr (std::is_same_v<T, Step>) {
            if (x.question) out += "? " + *x.question + "\n";
            line = x.name + " := " + format_expr(*x.expr);
          } else if constexpr (std::is_same_v<T, ReturnStmt>) {
            line = "return " + x.name;
          }
        },
        st.node);
    if (!st.comment.empty()) {
      line += line.empty() ? "% " + st.comment : "  % " + st.comment;
    } else if (std::holds_alternative<CommentLine>(st.node)) {
      line = "%";
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace namedcalc
