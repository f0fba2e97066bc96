#pragma once

// Call-by-value and call-by-name evaluation of step programs, the
// helpful-number independence check, and the cross-check between the two
// evaluators.

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "namedcalc/error.hpp"
#include "namedcalc/program.hpp"
#include "namedcalc/scalar.hpp"
#include "namedcalc/symbolic.hpp"
#include "namedcalc/units.hpp"

namespace namedcalc {

// ------------------------------------------------------------ by value

struct TraceEntry {
  std::string name;
  std::optional<std::string> question;
  Quantity value;
  std::string equation;  // `U := C/A = 72 cherry / 24 min = 3 cherry/min`
};

struct Trace {
  std::vector<TraceEntry> steps;
  std::map<std::string, Quantity> values;  // every declaration and step
  std::string target;
  Quantity answer;
};

namespace detail {

inline Error tagged(Error e, const Step& s) {
  e.at_step(s.name, s.question.value_or(""));
  return e;
}

// Sums and negatives are wrapped so a substituted value reads as one operand.
inline std::string trace_operand(const Quantity& q) {
  std::string s = render(q);
  bool compound = (q.unit.empty() && q.magnitude.terms().size() > 1) || s.front() == '-';
  return compound ? "(" + s + ")" : s;
}

inline bool is_bare_reference(const Expr& e) { return std::holds_alternative<VarExpr>(e.node); }

class ValueEvaluator {
 public:
  ValueEvaluator(const UnitRegistry& reg, const std::map<std::string, Quantity>& env) : reg_(reg), env_(env) {}

  Quantity eval(const Expr& e) const {
    return std::visit(
        [&](const auto& x) -> Quantity {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, LiteralExpr>) {
            return x.value;
          } else if constexpr (std::is_same_v<T, VarExpr>) {
            auto it = env_.find(x.name);
            if (it == env_.end()) fail(ErrorCode::UseBeforeDefinition, "'" + x.name + "' has no value");
            return it->second;
          } else if constexpr (std::is_same_v<T, NegateExpr>) {
            return q_neg(eval(*x.operand));
          } else if constexpr (std::is_same_v<T, SqrtExpr>) {
            return q_sqrt(reg_, eval(*x.operand));
          } else if constexpr (std::is_same_v<T, PowerExpr>) {
            return q_pow(reg_, eval(*x.base), x.exponent);
          } else {
            Quantity a = eval(*x.lhs);
            Quantity b = eval(*x.rhs);
            switch (x.op) {
              case '+': return q_add(reg_, a, b);
              case '-': return q_sub(reg_, a, b);
              case '*': return q_mul(reg_, a, b);
              default: {
                if (b.magnitude.is_zero()) {
                  fail(ErrorCode::DivisionByZero, "divisor " + format_expr(*x.rhs) + " is zero");
                }
                // every divisor in a step program stands for a positive amount
                if (b.magnitude.is_algebraic() && sign(b.magnitude) < 0) {
                  fail(ErrorCode::Infeasible,
                       "divisor " + format_expr(*x.rhs) + " = " + render(b) + " is negative");
                }
                return q_div(reg_, a, b);
              }
            }
          }
        },
        e.node);
  }

 private:
  const UnitRegistry& reg_;
  const std::map<std::string, Quantity>& env_;
};

}  // namespace detail

/// Concrete values of the declarations, with overrides applied.
inline std::map<std::string, Quantity> declaration_values(const StepProgram& p,
                                                          const std::map<std::string, Quantity>& overrides) {
  std::map<std::string, Quantity> env;
  for (const auto& d : p.decls()) {
    if (auto it = overrides.find(d.name); it != overrides.end()) {
      env[d.name] = it->second;
    } else if (const auto* q = std::get_if<Quantity>(&d.value)) {
      env[d.name] = *q;
    } else {
      fail(ErrorCode::NotConcrete, "'" + d.name + "' is the letter " + std::get<SymbolValue>(d.value).symbol +
                                       " and has no numeric value");
    }
  }
  for (const auto& [name, q] : overrides) {
    if (!p.find_decl(name)) fail(ErrorCode::NotFound, "no declaration named '" + name + "'");
    for (const auto& [atom, e] : q.unit.exponents()) p.registry().atom(atom);
  }
  return env;
}

inline Trace eval_by_value(const StepProgram& p, const std::map<std::string, Quantity>& overrides = {}) {
  Trace t;
  t.values = declaration_values(p, overrides);
  detail::ValueEvaluator ev(p.registry(), t.values);
  for (const auto& s : p.steps()) {
    Quantity v;
    try {
      v = ev.eval(*s.expr);
    } catch (const Error& e) {
      throw detail::tagged(e, s);
    }
    std::string equation = s.name + " := " + format_expr(*s.expr);
    std::vector<std::string> refs;
    collect_references(*s.expr, refs);
    if (!refs.empty() && !detail::is_bare_reference(*s.expr)) {
      auto printer = [&](const std::string& name) -> std::optional<std::string> {
        return detail::trace_operand(t.values.at(name));
      };
      equation += " = " + format_expr(*s.expr, printer, true);
    }
    equation += " = " + render(v);
    t.values[s.name] = v;
    t.steps.push_back(TraceEntry{s.name, s.question, v, equation});
  }
  t.target = p.target();
  t.answer = t.values.at(p.target());
  return t;
}

/// Question lines, equations, then the answer line.
inline std::string render_trace(const Trace& t) {
  std::string out;
  int k = 0;
  for (const auto& e : t.steps) {
    ++k;
    if (e.question) out += "Question " + std::to_string(k) + ". " + *e.question + "\n";
    out += e.equation + "\n";
  }
  out += "Answer: " + t.target + " = " + render(t.answer) + "\n";
  return out;
}

// ------------------------------------------------------------- by name

/// A feasibility requirement `positive > 0` met by every valid input.
struct SignCondition {
  std::string step;
  Polynomial positive;

  std::string render() const { return namedcalc::render(positive) + " > 0"; }
  friend bool operator==(const SignCondition&, const SignCondition&) = default;
};

struct SymbolicStep {
  std::string name;
  std::optional<std::string> question;
  SymbolicQuantity value;
};

struct SymbolicResult {
  SymbolicQuantity answer;
  std::set<std::string> eliminated;  // symbolized helpful names absent from the answer
  std::vector<SignCondition> conditions;
  std::vector<SymbolicStep> steps;
  std::map<std::string, Symbol> symbols;  // declaration name -> its letter
  std::map<std::string, SymbolicQuantity> values;
};

namespace detail {

// Positive rescaling to integer coefficients with gcd 1.
inline Polynomial primitive_positive(const Polynomial& p) {
  Integer g = 0;
  Integer l = 1;
  for (const auto& [m, c] : p.terms()) {
    g = boost::multiprecision::gcd(g, numer(c));
    l = boost::multiprecision::lcm(l, denom(c));
  }
  if (g < 0) g = -g;
  return p.scaled(Rational(l, g));
}

class NameEvaluator {
 public:
  NameEvaluator(const UnitRegistry& reg, const std::map<std::string, SymbolicQuantity>& env,
                std::vector<SignCondition>& conditions)
      : reg_(reg), env_(env), conditions_(conditions) {}

  std::string step;
  bool divisors_positive = true;  // letters and divisors are amounts

  SymbolicQuantity eval(const Expr& e) const {
    return std::visit(
        [&](const auto& x) -> SymbolicQuantity {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, LiteralExpr>) {
            return literal(x.value);
          } else if constexpr (std::is_same_v<T, VarExpr>) {
            auto it = env_.find(x.name);
            if (it == env_.end()) fail(ErrorCode::UseBeforeDefinition, "'" + x.name + "' has no value");
            return it->second;
          } else if constexpr (std::is_same_v<T, NegateExpr>) {
            return q_neg(eval(*x.operand));
          } else if constexpr (std::is_same_v<T, SqrtExpr>) {
            return root(eval(*x.operand));
          } else if constexpr (std::is_same_v<T, PowerExpr>) {
            SymbolicQuantity b = simplify_units(reg_, eval(*x.base));
            return SymbolicQuantity{rf_pow(b.magnitude, x.exponent), b.unit.pow(x.exponent)};
          } else {
            SymbolicQuantity a = eval(*x.lhs);
            SymbolicQuantity b = eval(*x.rhs);
            switch (x.op) {
              case '+': return q_add(reg_, a, b);
              case '-': return q_sub(reg_, a, b);
              case '*': return q_mul(reg_, a, b);
              default:
                if (b.magnitude.is_zero()) {
                  fail(ErrorCode::DivisionByZero, "divisor " + format_expr(*x.rhs) + " is identically zero");
                }
                if (divisors_positive) require_positive(b.magnitude, *x.rhs);
                return q_div(reg_, a, b);
            }
          }
        },
        e.node);
  }

 private:
  SymbolicQuantity literal(const Quantity& q) const {
    if (!q.magnitude.is_rational()) {
      fail(ErrorCode::SymbolicRadicalUnsupported,
           "the number " + render(q.magnitude) + " has no place in a rational function");
    }
    Dimension dim = reg_.dimension_of(q.unit);
    return SymbolicQuantity{RationalFunction::constant(q.magnitude.as_rational(), dim), q.unit};
  }

  SymbolicQuantity root(const SymbolicQuantity& q) const {
    SymbolicQuantity s = simplify_units(reg_, q);
    if (!s.magnitude.is_constant()) {
      fail(ErrorCode::SymbolicRadicalUnsupported, "square root of " + render(s.magnitude) + " over letters");
    }
    if (!s.unit.all_even()) {
      fail(ErrorCode::OddExponent, "square root of " + detail::unit_name(s.unit) + " is not a unit");
    }
    Rational c = s.magnitude.constant_value();
    if (c < 0) fail(ErrorCode::NegativeRadicand, "square root of negative " + render_rational(c));
    ExactScalar r = normalize_sqrt(c);
    if (!r.is_rational()) {
      fail(ErrorCode::SymbolicRadicalUnsupported, "square root of " + render_rational(c) + " is a surd");
    }
    Dimension half = s.magnitude.dim();
    Dimension halved;
    for (const auto& [k, e] : half.exponents()) halved.add(k, e / 2);
    return SymbolicQuantity{RationalFunction::constant(r.as_rational(), halved), s.unit.halved()};
  }

  // Letters stand for positive amounts, so a divisor is positive exactly
  // when num*den with monomial factors removed is.
  void require_positive(const RationalFunction& d, const Expr& divisor) const {
    if (d.is_constant()) {
      if (d.constant_value() < 0) {
        fail(ErrorCode::Infeasible, "divisor " + format_expr(divisor) + " is negative");
      }
      return;
    }
    Polynomial p = split_monomial_content(d.num()).second * split_monomial_content(d.den()).second;
    p = primitive_positive(p);
    bool all_positive = true;
    bool all_negative = true;
    for (const auto& [m, c] : p.terms()) {
      if (c < 0) all_positive = false;
      if (c > 0) all_negative = false;
    }
    if (all_positive) return;
    if (all_negative) {
      fail(ErrorCode::Infeasible, "divisor " + format_expr(divisor) + " is negative for every positive input");
    }
    SignCondition cond{step, p};
    for (const auto& c : conditions_) {
      if (c.positive == p) return;
    }
    conditions_.push_back(cond);
  }

  const UnitRegistry& reg_;
  const std::map<std::string, SymbolicQuantity>& env_;
  std::vector<SignCondition>& conditions_;
};

}  // namespace detail

/// Evaluates with the named declarations replaced by letters.  Declarations
/// whose value is already a letter are always symbolic.  A symbolized datum
/// keeps its unit: `24 min` becomes `A min`.
inline SymbolicResult eval_by_name(const StepProgram& p, const std::set<std::string>& symbolize,
                                   const std::map<std::string, Quantity>& overrides = {}) {
  for (const auto& name : symbolize) {
    if (!p.find_decl(name)) {
      fail(ErrorCode::NotFound, "'" + name + "' is not a data or helpful declaration");
    }
  }
  SymbolicResult r;
  const UnitRegistry& reg = p.registry();
  std::map<std::string, Dimension> letter_dims;
  for (const auto& d : p.decls()) {
    const auto* sym = std::get_if<SymbolValue>(&d.value);
    bool symbolic = sym || symbolize.count(d.name);
    auto ov = overrides.find(d.name);
    if (symbolic && !(ov != overrides.end() && !symbolize.count(d.name) && !sym)) {
      std::string letter = sym ? sym->symbol : d.name;
      UnitExpr unit = ov != overrides.end() ? ov->second.unit : unit_of(d.value);
      Dimension dim = reg.dimension_of(unit);
      if (auto [it, fresh] = letter_dims.emplace(letter, dim); !fresh && it->second != dim) {
        fail(ErrorCode::DimensionMismatch, "letter " + letter + " stands for values of different dimensions");
      }
      Symbol s{letter, dim};
      r.symbols[d.name] = s;
      r.values[d.name] = SymbolicQuantity{RationalFunction::symbol(s), unit};
      continue;
    }
    Quantity q = ov != overrides.end() ? ov->second : std::get<Quantity>(d.value);
    if (!q.magnitude.is_rational()) {
      fail(ErrorCode::SymbolicRadicalUnsupported, "value of '" + d.name + "' is not rational");
    }
    r.values[d.name] = SymbolicQuantity{
        RationalFunction::constant(q.magnitude.as_rational(), reg.dimension_of(q.unit)), q.unit};
  }
  detail::NameEvaluator ev(reg, r.values, r.conditions);
  for (const auto& s : p.steps()) {
    ev.step = s.name;
    SymbolicQuantity v;
    try {
      v = ev.eval(*s.expr);
    } catch (const Error& e) {
      throw detail::tagged(e, s);
    }
    r.values[s.name] = v;
    r.steps.push_back(SymbolicStep{s.name, s.question, v});
  }
  r.answer = r.values.at(p.target());
  std::set<std::string> used = r.answer.magnitude.variables();
  for (const auto& d : p.decls()) {
    if (d.role != Role::Helpful) continue;
    auto it = r.symbols.find(d.name);
    if (it != r.symbols.end() && !used.count(it->second.name)) r.eliminated.insert(d.name);
  }
  return r;
}

inline std::string render_symbolic(const StepProgram& p, const SymbolicResult& r) {
  std::string out;
  int k = 0;
  for (const auto& s : r.steps) {
    ++k;
    if (s.question) out += "Question " + std::to_string(k) + ". " + *s.question + "\n";
    out += s.name + " := " + format_expr(*p.find_step(s.name)->expr) + " = " + render(s.value) + "\n";
  }
  out += "Answer: " + p.target() + " = " + render(r.answer) + "\n";
  for (const auto& c : r.conditions) out += "Condition (step " + c.step + "): " + c.render() + "\n";
  if (!r.eliminated.empty()) {
    out += "Eliminated:";
    for (const auto& n : r.eliminated) out += " " + n;
    out += "\n";
  }
  return out;
}

// -------------------------------------------------- helpful independence

enum class Independence { Independent, Entangled };

inline std::string_view to_string(Independence i) {
  return i == Independence::Independent ? "Independent" : "Entangled";
}

struct IndependenceEntry {
  std::string name;
  Independence verdict;
  bool absent_from_answer;
  bool dimension_disjoint;
};

inline std::vector<IndependenceEntry> check_helpful_independence(const StepProgram& p) {
  std::set<std::string> all;
  for (const auto& d : p.decls()) all.insert(d.name);
  SymbolicResult r = eval_by_name(p, all);
  const Dimension& answer_dim = r.answer.magnitude.dim();
  std::set<std::string> vars = r.answer.magnitude.variables();
  std::vector<IndependenceEntry> out;
  for (const auto& d : p.decls()) {
    if (d.role != Role::Helpful) continue;
    const Symbol& s = r.symbols.at(d.name);
    bool absent = !vars.count(s.name);
    bool disjoint = true;
    for (const auto& [cls, e] : s.dim.exponents()) {
      if (answer_dim.exponent(cls) != 0) disjoint = false;
    }
    out.push_back({d.name, absent && disjoint ? Independence::Independent : Independence::Entangled, absent,
                   disjoint});
  }
  return out;
}

// ---------------------------------------------------- evaluator agreement

struct AgreementReport {
  bool agreed = true;
  int trials = 0;   // assignments compared
  int skipped = 0;  // infeasible draws that were resampled
  std::string counterexample;
};

/// Positive rationals with small numerators and denominators.
class RationalSampler {
 public:
  explicit RationalSampler(std::uint64_t seed) : rng_(seed) {}

  Rational next() {
    std::uniform_int_distribution<int> num(1, 60);
    std::uniform_int_distribution<int> den(1, 12);
    return Rational(num(rng_), den(rng_));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

namespace detail {

inline std::string describe_point(const std::map<std::string, Quantity>& point) {
  std::string s;
  for (const auto& [n, q] : point) {
    if (!s.empty()) s += ", ";
    s += n + " = " + render(q);
  }
  return s;
}

inline std::map<std::string, Quantity> random_point(const StepProgram& p, RationalSampler& rng) {
  std::map<std::string, Quantity> point;
  for (const auto& d : p.decls()) point[d.name] = Quantity{ExactScalar(rng.next()), unit_of(d.value)};
  return point;
}

}  // namespace detail

/// Compares call-by-name (every declaration a letter, then substituted) with
/// call-by-value at random positive rational inputs.  Draws where by-value
/// reports an infeasible or zero divisor are resampled, provided the symbolic
/// conditions agree that the draw is outside the feasible region.
inline AgreementReport agreement_check(const StepProgram& p, int trials, std::uint64_t seed = 1) {
  std::set<std::string> all;
  for (const auto& d : p.decls()) all.insert(d.name);
  SymbolicResult sym = eval_by_name(p, all);
  RationalSampler rng(seed);
  AgreementReport report;
  const int max_draws = trials * 20 + 100;
  for (int draw = 0; report.trials < trials && draw < max_draws; ++draw) {
    auto point = detail::random_point(p, rng);
    std::map<std::string, Rational> at;
    for (const auto& [name, q] : point) at[sym.symbols.at(name).name] = q.magnitude.as_rational();
    bool outside = false;
    for (const auto& c : sym.conditions) {
      if (c.positive.evaluate(at) <= 0) outside = true;
    }
    Trace t;
    try {
      t = eval_by_value(p, point);
    } catch (const Error& e) {
      if ((e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::DivisionByZero) && outside) {
        ++report.skipped;
        continue;
      }
      report.agreed = false;
      report.counterexample = detail::describe_point(point) + ": by value failed with " + e.describe();
      return report;
    }
    ++report.trials;
    if (outside) {
      report.agreed = false;
      report.counterexample = detail::describe_point(point) + ": by value succeeded outside the conditions";
      return report;
    }
    Rational expected = sym.answer.magnitude.evaluate(at);
    Quantity got = convert(p.registry(), t.answer, sym.answer.unit);
    if (!got.magnitude.is_rational() || got.magnitude.as_rational() != expected) {
      report.agreed = false;
      report.counterexample = detail::describe_point(point) + ": by value " + render(t.answer) + ", by name " +
                              render_rational(expected) + " " + sym.answer.unit.render();
      return report;
    }
  }
  if (report.trials < trials) {
    report.agreed = false;
    report.counterexample = "too many infeasible draws";
  }
  return report;
}

/// Like agreement_check, for programs the symbolic engine cannot express:
/// every by-value answer is checked by `oracle`.
inline AgreementReport agreement_against(
    const StepProgram& p, int trials, std::uint64_t seed,
    const std::function<bool(const std::map<std::string, Quantity>&, const Quantity&)>& oracle) {
  RationalSampler rng(seed);
  AgreementReport report;
  for (; report.trials < trials; ++report.trials) {
    auto point = detail::random_point(p, rng);
    Trace t;
    try {
      t = eval_by_value(p, point);
    } catch (const Error& e) {
      report.agreed = false;
      report.counterexample = detail::describe_point(point) + ": " + e.describe();
      return report;
    }
    if (!oracle(point, t.answer)) {
      report.agreed = false;
      report.counterexample = detail::describe_point(point) + ": answer " + render(t.answer);
      return report;
    }
  }
  return report;
}

// ------------------------------------------------------ polynomial input

/// Reads `A*B/(A + B)` as a dimensionless rational function of free
/// letters.  Units and radicals are rejected.
inline RationalFunction parse_rational_function(std::string_view text) {
  ExprPtr e = parse_expression(text, UnitRegistry::empty());
  std::vector<std::string> names;
  collect_references(*e, names);
  std::map<std::string, SymbolicQuantity> env;
  for (const auto& n : names) env[n] = SymbolicQuantity{RationalFunction::symbol(Symbol{n, {}}), {}};
  std::vector<SignCondition> ignored;
  detail::NameEvaluator ev(UnitRegistry::empty(), env, ignored);
  ev.divisors_positive = false;
  return ev.eval(*e).magnitude;
}

/// Reads `x^2023 + 1` or `(x - 2)*(x + 2)` as a polynomial.
inline Polynomial parse_polynomial(std::string_view text) {
  RationalFunction f = parse_rational_function(text);
  if (!f.den().is_constant()) fail(ErrorCode::SyntaxError, "'" + std::string(text) + "' is not a polynomial");
  return f.num().scaled(Rational(1) / f.den().constant_value());
}

}  // namespace namedcalc
