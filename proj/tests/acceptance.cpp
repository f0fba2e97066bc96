// Acceptance gate: one PASS/FAIL line per criterion, exact comparisons
// only.  Exits non-zero if any criterion fails.

#include <functional>
#include <iostream>

#include "support.hpp"

using namespace namedcalc;
using testing_support::Gen;
using testing_support::qty;
using testing_support::sample;

namespace {

// A criterion returns an empty string when met, else what went wrong.
using Criterion = std::function<std::string()>;

struct Failures {
  std::string text;
  void expect(bool ok, const std::string& what) {
    if (!ok && text.empty()) text = what;
  }
};

std::set<std::string> all_decls(const StepProgram& p) {
  std::set<std::string> out;
  for (const auto& d : p.decls()) out.insert(d.name);
  return out;
}

bool same_function(const RationalFunction& f, const char* expected) {
  return rf_equal(f.with_dim({}), parse_rational_function(expected));
}

std::string cherries_numeric() {
  Failures f;
  StepProgram p = sample("cherries.step");
  for (auto [bowl, speeds] : std::vector<std::pair<std::string, std::vector<std::string>>>{
           {"72 cherry", {"3 cherry/min", "9 cherry/min", "12 cherry/min"}},
           {"48 cherry", {"2 cherry/min", "6 cherry/min", "8 cherry/min"}}}) {
    Trace t = eval_by_value(p, {{"C", qty(bowl, p.registry())}});
    for (int i = 0; i < 3; ++i) {
      f.expect(render(t.steps[i].value) == speeds[i], "C = " + bowl + ": step " + t.steps[i].name + " is " +
                                                           render(t.steps[i].value));
    }
    f.expect(t.answer == qty("6 min", p.registry()), "C = " + bowl + ": answer " + render(t.answer));
  }
  return f.text;
}

std::string cherries_symbolic() {
  Failures f;
  StepProgram p = sample("cherries.step");
  SymbolicResult all = eval_by_name(p, {"A", "B", "C"});
  f.expect(same_function(all.answer.magnitude, "A*B/(A + B)"), "answer " + render(all.answer));
  f.expect(all.answer.unit == UnitExpr::atom("min"), "unit " + all.answer.unit.render());
  f.expect(all.eliminated == std::set<std::string>{"C"}, "C not eliminated");
  SymbolicResult one = eval_by_name(p, {"A"});
  f.expect(same_function(one.answer.magnitude, "8*A/(A + 8)"), "symbolize A: " + render(one.answer));
  f.expect(render(one.answer) == "8*A/(A + 8) min", "symbolize A renders " + render(one.answer));
  return f.text;
}

std::string kevin() {
  Failures f;
  StepProgram p = sample("kevin.step");
  SymbolicResult r = eval_by_name(p, all_decls(p));
  f.expect(same_function(r.answer.magnitude, "A*B*K/(A*K + B*K - A*B)"), "answer " + render(r.answer));
  f.expect(r.conditions.size() == 1 && r.conditions[0].positive == parse_polynomial("A*K + B*K - A*B"),
           "missing positivity condition");
  // AB/(A + B) = 6 min at A = 24, B = 8
  for (const char* k : {"6 min", "11/2 min", "5 min", "1 min", "1/100 min"}) {
    try {
      eval_by_value(p, {{"K", qty(k, p.registry())}});
      f.expect(false, std::string("K = ") + k + " was accepted");
    } catch (const Error& e) {
      f.expect(e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::DivisionByZero,
               std::string("K = ") + k + ": " + e.describe());
    }
  }
  f.expect(eval_by_value(p).answer == qty("12 min", p.registry()), "K = 12 min answer");
  return f.text;
}

std::string rabbits() {
  Failures f;
  StepProgram p = sample("rabbits.step");
  Trace t = eval_by_value(p);
  f.expect(t.values.at("ExcessiveLegs") == qty("16 leg", p.registry()), "ExcessiveLegs");
  f.expect(t.values.at("Chicken") == qty("8 head", p.registry()), "Chicken");
  f.expect(t.values.at("Rabbits") == qty("4 head", p.registry()), "Rabbits");
  StepProgram alt = sample("rabbits_alt.step");
  Trace a = eval_by_value(alt);
  f.expect(a.values.at("ChickenLegs") == qty("24 leg", alt.registry()), "12 head x 2 leg/head");
  f.expect(a.values.at("Rabbits") == qty("4 head", alt.registry()), "alternative Rabbits");
  return f.text;
}

std::string named_number_laws() {
  Failures f;
  StepProgram metres = sample("metres.step");
  f.expect(eval_by_value(metres).answer == qty("101 cm", metres.registry()), "1 m + 1 cm");
  StepProgram p = parse(
      "unit apple\nunit people\ndata Apples = 10 apple\ndata People = 5 people\ndata Share = 2 apple/people\n"
      "PerHead := Apples/People\nHeads := Apples/Share\n");
  Trace t = eval_by_value(p);
  f.expect(t.values.at("PerHead") == qty("2 apple/people", p.registry()), "10 apple / 5 people");
  f.expect(t.values.at("Heads") == qty("5 people", p.registry()), "10 apple / (2 apple/people)");
  try {
    eval_by_value(sample("apples.step"));
    f.expect(false, "10 apple + 10 people was accepted");
  } catch (const Error& e) {
    f.expect(e.code() == ErrorCode::IncommensurableAddition, e.describe());
  }
  return f.text;
}

std::string polynomial() {
  Failures f;
  Polynomial x = Polynomial::variable("x");
  DivMod d = poly_divmod(x.pow(2023) + Polynomial(1), x * x - Polynomial(4));
  Polynomial expected = Polynomial(Rational(ipow(Integer(2), 2022))) * x + Polynomial(1);
  f.expect(d.remainder == expected, "remainder " + render(d.remainder));
  f.expect(render(d.remainder) == "2^2022*x + 1", "printed as " + render(d.remainder));
  return f.text;
}

std::string dimensional_solver() {
  Failures f;
  UnitRegistry reg = UnitRegistry::standard();
  auto dim = [&](const char* u) { return reg.dimension_of(qty(std::string("1 ") + u, reg).unit); };
  std::vector<Dimension> basis{dim("m"), dim("m/s^2")};
  f.expect(solve_dimensions(dim("s"), basis) == std::vector<Rational>{Rational(1, 2), Rational(-1, 2)},
           "target s");
  f.expect(solve_dimensions(dim("m/s"), basis) == std::vector<Rational>{Rational(1, 2), Rational(1, 2)},
           "target m/s");
  return f.text;
}

std::string problem_suite() {
  Failures f;
  for (auto [file, form] : std::vector<std::pair<const char*, const char*>>{
           {"taps.step", "a*b/(a + b)"}, {"speed.step", "2*a*b/(a + b)"}, {"raft.step", "2*a*b/(a - b)"}}) {
    StepProgram p = sample(file);
    SymbolicResult r = eval_by_name(p, all_decls(p));
    f.expect(same_function(r.answer.magnitude, form), std::string(file) + ": " + render(r.answer));
    AgreementReport a = agreement_check(p, 100, 9);
    f.expect(a.agreed && a.trials == 100, std::string(file) + ": " + a.counterexample);
  }
  StepProgram raft = sample("raft.step");
  SymbolicResult r = eval_by_name(raft, all_decls(raft));
  f.expect(r.conditions.size() == 1 && r.conditions[0].positive == parse_polynomial("a - b"), "raft condition");

  StepProgram sunrise = sample("sunrise.step");
  f.expect(eval_by_value(sunrise).answer == qty("2 hour", sunrise.registry()), "sunrise a=1, b=4");
  AgreementReport a = agreement_against(sunrise, 100, 9, [](const auto& at, const Quantity& t) {
    ExactScalar ab = at.at("a").magnitude * at.at("b").magnitude;
    return sign(t.magnitude) > 0 && t.magnitude * t.magnitude == ab;
  });
  f.expect(a.agreed && a.trials == 100, "sunrise: " + a.counterexample);
  return f.text;
}

// Random expression over x, y evaluated as a rational function and
// directly on rationals.
struct Evaluated {
  RationalFunction f;
  std::function<std::optional<Rational>(const Rational&, const Rational&)> at;
};

Evaluated random_expression(Gen& g, int depth) {
  if (depth == 0 || g.integer(0, 3) == 0) {
    int pick = g.integer(0, 2);
    if (pick == 0) return {RationalFunction::symbol(Symbol{"x", {}}), [](auto& x, auto&) { return x; }};
    if (pick == 1) return {RationalFunction::symbol(Symbol{"y", {}}), [](auto&, auto& y) { return y; }};
    Rational c = g.rational(5, 3);
    return {RationalFunction::constant(c), [c](auto&, auto&) { return c; }};
  }
  Evaluated l = random_expression(g, depth - 1);
  Evaluated r = random_expression(g, depth - 1);
  char op = "+-*/"[g.integer(0, 3)];
  RationalFunction f = op == '+' ? l.f + r.f : op == '-' ? l.f - r.f : op == '*' ? l.f * r.f : l.f / r.f;
  auto at = [op, la = l.at, ra = r.at](const Rational& x, const Rational& y) -> std::optional<Rational> {
    auto a = la(x, y);
    auto b = ra(x, y);
    if (!a || !b) return std::nullopt;
    if (op == '+') return *a + *b;
    if (op == '-') return *a - *b;
    if (op == '*') return *a * *b;
    if (*b == 0) return std::nullopt;
    return *a / *b;
  };
  return {f, at};
}

std::string property_suites() {
  Failures f;
  Gen g(1);

  // scalar field laws over random surd sums
  static const long radicands[] = {1, 2, 3, 5, 6, 7, 8, 12};
  auto surd_sum = [&] {
    ExactScalar s;
    for (int k = g.integer(1, 3); k > 0; --k) {
      s += ExactScalar(g.rational()) * normalize_sqrt(Rational(radicands[g.integer(0, 7)]));
    }
    return s;
  };
  for (int i = 0; i < 10000 && f.text.empty(); ++i) {
    ExactScalar a = surd_sum(), b = surd_sum(), c = surd_sum();
    f.expect(is_canonical(a * b) && is_canonical(a + b), "non-canonical result");
    f.expect(a + b == b + a && a * b == b * a, "commutativity");
    f.expect((a + b) + c == a + (b + c) && (a * b) * c == a * (b * c), "associativity");
    f.expect(a * (b + c) == a * b + a * c, "distributivity");
    if (!a.is_zero()) f.expect(a * div(ExactScalar(1), a) == ExactScalar(1), "inverse of " + render(a));
  }

  // rational-function normal form against point evaluation
  int trees = 0;
  while (trees < 1000 && f.text.empty()) {
    Evaluated e;
    try {
      e = random_expression(g, 4);
    } catch (const Error&) {
      continue;
    }
    ++trees;
    f.expect(e.f.den().leading_coefficient() == 1, "denominator not monic");
    f.expect(e.f.num().is_zero() || gcd(e.f.num(), e.f.den()).is_constant(), "not in lowest terms");
    for (int k = 0; k < 10; ++k) {
      Rational x = g.rational(9, 5), y = g.rational(9, 5);
      auto direct = e.at(x, y);
      if (direct) f.expect(e.f.evaluate({{"x", x}, {"y", y}}) == *direct, "point value of " + render(e.f));
    }
  }

  const char* fixtures[] = {"cherries.step", "cherries_alt.step", "kevin.step", "rabbits.step", "rabbits_alt.step",
                            "taps.step", "speed.step", "raft.step", "ducat.step", "metres.step"};
  for (const char* file : fixtures) {
    AgreementReport a = agreement_check(sample(file), 100, 2);
    f.expect(a.agreed && a.trials >= 100, std::string(file) + " disagrees: " + a.counterexample);
  }

  StepProgram cherries = sample("cherries.step");
  Quantity answer = eval_by_value(cherries).answer;
  for (int i = 0; i < 50; ++i) {
    Rational k = g.positive_rational();
    Quantity bowl{ExactScalar(72) * ExactScalar(k), UnitExpr::atom("cherry")};
    f.expect(eval_by_value(cherries, {{"C", bowl}}).answer == answer, "rescaled bowl " + render(bowl));
  }

  for (const char* file : fixtures) {
    Worksheet w = worksheet_from_program(sample(file), file, "", "fixture");
    for (int pass = 0; pass < 2; ++pass) {
      std::string text = save_text(w);
      Worksheet back = load_text(text);
      f.expect(back == w && save_text(back) == text, std::string(file) + " save/load");
      run(w);
    }
  }
  return f.text;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Criterion>> criteria{
      {"cherries numeric fixture", cherries_numeric},
      {"cherries symbolic fixture", cherries_symbolic},
      {"kevin fixture", kevin},
      {"rabbits and chicken", rabbits},
      {"named-number laws", named_number_laws},
      {"polynomial remainder", polynomial},
      {"dimensional solver", dimensional_solver},
      {"problem suite", problem_suite},
      {"property suites", property_suites},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string problem;
    try {
      problem = check();
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    if (problem.empty()) {
      std::cout << "PASS  " << name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL  " << name << ": " << problem << "\n";
    }
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria met\n";
  return failed == 0 ? 0 : 1;
}
