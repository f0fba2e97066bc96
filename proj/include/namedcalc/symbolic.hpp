#pragma once

// Multivariate polynomials and rational functions over Q, tagged with a
// dimension.  This is what call-by-name evaluation computes in.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "namedcalc/error.hpp"
#include "namedcalc/numeric.hpp"
#include "namedcalc/units.hpp"

namespace namedcalc {

/// Power product of named variables; exponents are positive.
using PowerProduct = std::map<std::string, int>;

inline int total_degree(const PowerProduct& m) {
  int d = 0;
  for (const auto& [v, e] : m) d += e;
  return d;
}

/// Graded lexicographic order; alphabetically earlier variables are more
/// significant.
struct GrlexLess {
  bool operator()(const PowerProduct& a, const PowerProduct& b) const {
    int da = total_degree(a);
    int db = total_degree(b);
    if (da != db) return da < db;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
      const std::string& name = (ib == b.end() || (ia != a.end() && ia->first < ib->first)) ? ia->first
                                                                                            : ib->first;
      int ea = (ia != a.end() && ia->first == name) ? ia->second : 0;
      int eb = (ib != b.end() && ib->first == name) ? ib->second : 0;
      if (ea != eb) return ea < eb;
      if (ia != a.end() && ia->first == name) ++ia;
      if (ib != b.end() && ib->first == name) ++ib;
    }
    return false;
  }
};

inline PowerProduct multiply(const PowerProduct& a, const PowerProduct& b) {
  PowerProduct r = a;
  for (const auto& [v, e] : b) r[v] += e;
  return r;
}

inline bool divides(const PowerProduct& d, const PowerProduct& m) {
  for (const auto& [v, e] : d) {
    auto it = m.find(v);
    if (it == m.end() || it->second < e) return false;
  }
  return true;
}

inline PowerProduct quotient(const PowerProduct& m, const PowerProduct& d) {
  PowerProduct r = m;
  for (const auto& [v, e] : d) {
    auto it = r.find(v);
    it->second -= e;
    if (it->second == 0) r.erase(it);
  }
  return r;
}

class Polynomial {
 public:
  using TermMap = std::map<PowerProduct, Rational, GrlexLess>;

  Polynomial() = default;
  Polynomial(const Rational& c) {  // NOLINT(google-explicit-constructor)
    if (c != 0) terms_.emplace(PowerProduct{}, c);
  }
  Polynomial(int c) : Polynomial(Rational(c)) {}  // NOLINT(google-explicit-constructor)

  static Polynomial variable(const std::string& name, int exponent = 1) {
    Polynomial p;
    p.terms_.emplace(PowerProduct{{name, exponent}}, 1);
    return p;
  }

  static Polynomial term(const PowerProduct& m, const Rational& c) {
    Polynomial p;
    if (c != 0) p.terms_.emplace(m, c);
    return p;
  }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
  Rational constant_value() const {
    auto it = terms_.find(PowerProduct{});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  const PowerProduct& leading_monomial() const { return terms_.rbegin()->first; }
  const Rational& leading_coefficient() const { return terms_.rbegin()->second; }

  std::set<std::string> variables() const {
    std::set<std::string> vars;
    for (const auto& [m, c] : terms_) {
      for (const auto& [v, e] : m) vars.insert(v);
    }
    return vars;
  }

  int degree_in(const std::string& var) const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
      auto it = m.find(var);
      if (it != m.end()) d = std::max(d, it->second);
    }
    return d;
  }

  int total_degree() const {
    return terms_.empty() ? 0 : namedcalc::total_degree(leading_monomial());
  }

  void add_term(const PowerProduct& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }
  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r;
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) r.add_term(multiply(ma, mb), ca * cb);
    }
    return r;
  }

  Polynomial scaled(const Rational& c) const {
    if (c == 0) return {};
    Polynomial r = *this;
    for (auto& [m, coef] : r.terms_) coef *= c;
    return r;
  }

  Polynomial pow(unsigned k) const {
    Polynomial result = 1;
    Polynomial square = *this;
    while (k > 0) {
      if (k & 1U) result = result * square;
      k >>= 1U;
      if (k > 0) square = square * square;
    }
    return result;
  }

  Rational evaluate(const std::map<std::string, Rational>& point) const {
    Rational total = 0;
    for (const auto& [m, c] : terms_) {
      Rational t = c;
      for (const auto& [v, e] : m) {
        auto it = point.find(v);
        if (it == point.end()) fail(ErrorCode::NotConcrete, "no value for symbol '" + v + "'");
        t *= rpow(it->second, e);
      }
      total += t;
    }
    return total;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

 private:
  TermMap terms_;
};

// ------------------------------------------------------------ division

/// Multivariate exact division; throws if `divisor` does not divide.
inline Polynomial divide_exact(const Polynomial& dividend, const Polynomial& divisor) {
  if (divisor.is_zero()) fail(ErrorCode::DivisionByZero, "polynomial division by zero");
  if (divisor.is_constant()) return dividend.scaled(Rational(1) / divisor.constant_value());
  Polynomial q;
  Polynomial r = dividend;
  const PowerProduct& lm = divisor.leading_monomial();
  const Rational& lc = divisor.leading_coefficient();
  while (!r.is_zero()) {
    const PowerProduct& rm = r.leading_monomial();
    if (!divides(lm, rm)) throw std::logic_error("divide_exact: divisor does not divide dividend");
    Polynomial t = Polynomial::term(quotient(rm, lm), r.leading_coefficient() / lc);
    q += t;
    r -= t * divisor;
  }
  return q;
}

namespace detail {

// P viewed in Q[others][var]: degree -> coefficient
inline std::map<int, Polynomial> coefficients_in(const Polynomial& p, const std::string& var) {
  std::map<int, Polynomial> out;
  for (const auto& [m, c] : p.terms()) {
    PowerProduct rest = m;
    int e = 0;
    if (auto it = rest.find(var); it != rest.end()) {
      e = it->second;
      rest.erase(it);
    }
    out[e].add_term(rest, c);
  }
  return out;
}

inline Polynomial leading_coefficient_in(const Polynomial& p, const std::string& var) {
  auto coeffs = coefficients_in(p, var);
  return coeffs.empty() ? Polynomial{} : coeffs.rbegin()->second;
}

inline Polynomial times_var_power(const Polynomial& p, const std::string& var, int k) {
  if (k == 0) return p;
  return p * Polynomial::variable(var, k);
}

// lc(B)^(deg A - deg B + 1) * A = Q*B + R, returns R
inline Polynomial pseudo_remainder(const Polynomial& a, const Polynomial& b, const std::string& var) {
  const int db = b.degree_in(var);
  const Polynomial lcb = leading_coefficient_in(b, var);
  Polynomial r = a;
  int e = a.degree_in(var) - db + 1;
  while (!r.is_zero() && r.degree_in(var) >= db) {
    int dr = r.degree_in(var);
    Polynomial t = times_var_power(leading_coefficient_in(r, var), var, dr - db);
    r = lcb * r - t * b;
    --e;
  }
  return e > 0 ? lcb.pow(static_cast<unsigned>(e)) * r : r;
}

}  // namespace detail

Polynomial gcd(const Polynomial& a, const Polynomial& b);

namespace detail {

inline Polynomial content_in(const Polynomial& p, const std::string& var) {
  Polynomial c;
  for (const auto& [deg, coef] : coefficients_in(p, var)) {
    c = gcd(c, coef);
    if (c.is_constant() && !c.is_zero()) return Polynomial(1);
  }
  return c;
}

inline Polynomial primitive_part_in(const Polynomial& p, const std::string& var) {
  if (p.is_zero()) return p;
  return divide_exact(p, content_in(p, var));
}

// gcd of two primitive polynomials of positive degree in var, via the
// subresultant remainder sequence.
inline Polynomial subresultant_gcd(Polynomial a, Polynomial b, const std::string& var) {
  if (a.degree_in(var) < b.degree_in(var)) std::swap(a, b);
  Polynomial g = 1;
  Polynomial h = 1;
  for (;;) {
    const int delta = a.degree_in(var) - b.degree_in(var);
    Polynomial r = pseudo_remainder(a, b, var);
    if (r.is_zero()) return primitive_part_in(b, var);
    if (r.degree_in(var) == 0) return Polynomial(1);
    a = b;
    b = divide_exact(r, g * h.pow(static_cast<unsigned>(delta)));
    g = leading_coefficient_in(a, var);
    if (delta == 0) {
      // h unchanged
    } else if (delta == 1) {
      h = g;
    } else {
      h = divide_exact(g.pow(static_cast<unsigned>(delta)), h.pow(static_cast<unsigned>(delta - 1)));
    }
  }
}

}  // namespace detail

/// Greatest common divisor over Q, defined up to a rational unit.  Recursive
/// content / primitive-part split on the alphabetically first variable.
inline Polynomial gcd(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_constant() || b.is_constant()) return Polynomial(1);
  std::set<std::string> vars = a.variables();
  for (const auto& v : b.variables()) vars.insert(v);
  const std::string& var = *vars.begin();

  const bool a_has = a.degree_in(var) > 0;
  const bool b_has = b.degree_in(var) > 0;
  Polynomial ca = a_has ? detail::content_in(a, var) : a;
  Polynomial cb = b_has ? detail::content_in(b, var) : b;
  Polynomial c = gcd(ca, cb);
  if (!a_has || !b_has) return c;
  Polynomial pa = divide_exact(a, ca);
  Polynomial pb = divide_exact(b, cb);
  return c * detail::subresultant_gcd(pa, pb, var);
}

/// Strips the largest monomial dividing every term: p = monomial * rest.
inline std::pair<PowerProduct, Polynomial> split_monomial_content(const Polynomial& p) {
  if (p.is_zero()) return {{}, p};
  PowerProduct common = p.terms().begin()->first;
  for (const auto& [m, c] : p.terms()) {
    for (auto it = common.begin(); it != common.end();) {
      auto found = m.find(it->first);
      if (found == m.end()) {
        it = common.erase(it);
      } else {
        it->second = std::min(it->second, found->second);
        ++it;
      }
    }
  }
  Polynomial rest;
  for (const auto& [m, c] : p.terms()) rest.add_term(quotient(m, common), c);
  return {common, rest};
}

// -------------------------------------------------- univariate division

struct DivMod {
  Polynomial quotient;
  Polynomial remainder;
};

namespace detail {

inline std::string common_variable(const Polynomial& a, const Polynomial& b) {
  std::set<std::string> vars = a.variables();
  for (const auto& v : b.variables()) vars.insert(v);
  if (vars.size() > 1) fail(ErrorCode::NotUnivariate, "polynomial division needs a single variable");
  return vars.empty() ? std::string{} : *vars.begin();
}

// plain long division in one variable
inline DivMod long_division(const Polynomial& dividend, const Polynomial& divisor, const std::string& var) {
  DivMod out{{}, dividend};
  const int dd = divisor.degree_in(var);
  const Rational lc = divisor.leading_coefficient();
  while (!out.remainder.is_zero() && out.remainder.degree_in(var) >= dd) {
    int k = out.remainder.degree_in(var) - dd;
    Polynomial t = times_var_power(Polynomial(out.remainder.leading_coefficient() / lc), var, k);
    out.quotient += t;
    out.remainder -= t * divisor;
  }
  return out;
}

}  // namespace detail

/// Remainder of a univariate division.  Each high power x^k of the dividend
/// is reduced by square-and-multiply modulo the divisor, so x^2023 never
/// expands densely.
inline Polynomial poly_rem(const Polynomial& dividend, const Polynomial& divisor) {
  if (divisor.is_zero()) fail(ErrorCode::DivisionByZero, "polynomial division by zero");
  const std::string var = detail::common_variable(dividend, divisor);
  if (divisor.is_constant()) return {};
  const int dd = divisor.degree_in(var);
  auto mod = [&](const Polynomial& p) { return detail::long_division(p, divisor, var).remainder; };
  Polynomial remainder;
  for (const auto& [m, c] : dividend.terms()) {
    int k = m.empty() ? 0 : m.begin()->second;
    if (k < dd) {
      remainder.add_term(m, c);
      continue;
    }
    Polynomial result = 1;
    Polynomial base = mod(Polynomial::variable(var));
    auto e = static_cast<unsigned>(k);
    while (e > 0) {
      if (e & 1U) result = mod(result * base);
      e >>= 1U;
      if (e > 0) base = mod(base * base);
    }
    remainder += result.scaled(c);
  }
  return remainder;
}

/// dividend = quotient * divisor + remainder with deg(remainder) < deg(divisor).
inline DivMod poly_divmod(const Polynomial& dividend, const Polynomial& divisor) {
  Polynomial remainder = poly_rem(dividend, divisor);
  const std::string var = detail::common_variable(dividend, divisor);
  DivMod exact = detail::long_division(dividend - remainder, divisor, var);
  return DivMod{exact.quotient, remainder};
}

// ------------------------------------------------------- rendering

namespace detail {

inline std::string render_power_product(const PowerProduct& m) {
  std::string out;
  for (const auto& [v, e] : m) {
    if (!out.empty()) out += "*";
    out += v;
    if (e != 1) out += "^" + std::to_string(e);
  }
  return out;
}

}  // namespace detail

/// Terms in descending graded-lex order: `A*B + 8`, `2^2022*x + 1`.
inline std::string render(const Polynomial& p, const RenderOptions& opts = {}) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [m, c] = *it;
    bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    std::string body;
    if (m.empty()) {
      body = render_rational(mag, opts);
    } else if (mag == 1) {
      body = detail::render_power_product(m);
    } else {
      body = render_rational(mag, opts) + "*" + detail::render_power_product(m);
    }
    if (first) {
      out = negative ? "-" + body : body;
      first = false;
    } else {
      out += negative ? " - " : " + ";
      out += body;
    }
  }
  return out;
}

// --------------------------------------------------- rational functions

struct Symbol {
  std::string name;
  Dimension dim;

  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend bool operator<(const Symbol& a, const Symbol& b) { return a.name < b.name; }
};

/// num/den in lowest terms with den's leading coefficient 1, plus the
/// dimension of the represented quantity.
class RationalFunction {
 public:
  RationalFunction() : den_(1) {}

  static RationalFunction make(Polynomial num, Polynomial den, Dimension dim = {}) {
    RationalFunction f;
    f.num_ = std::move(num);
    f.den_ = std::move(den);
    f.dim_ = std::move(dim);
    f.normalize();
    return f;
  }

  static RationalFunction constant(const Rational& c, Dimension dim = {}) {
    return make(Polynomial(c), Polynomial(1), std::move(dim));
  }

  static RationalFunction symbol(const Symbol& s) {
    return make(Polynomial::variable(s.name), Polynomial(1), s.dim);
  }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  const Dimension& dim() const { return dim_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }

  std::set<std::string> variables() const {
    std::set<std::string> vars = num_.variables();
    for (const auto& v : den_.variables()) vars.insert(v);
    return vars;
  }

  RationalFunction with_dim(Dimension dim) const {
    RationalFunction f = *this;
    f.dim_ = std::move(dim);
    return f;
  }

  RationalFunction operator-() const {
    RationalFunction f = *this;
    f.num_ = -f.num_;
    return f;
  }

  RationalFunction scaled(const Rational& c) const {
    RationalFunction f = *this;
    f.num_ = f.num_.scaled(c);
    if (c == 0) f.den_ = Polynomial(1);
    return f;
  }

  Rational evaluate(const std::map<std::string, Rational>& point) const {
    Rational d = den_.evaluate(point);
    if (d == 0) fail(ErrorCode::DivisionByZero, "denominator vanishes at the evaluation point");
    return num_.evaluate(point) / d;
  }

  friend bool operator==(const RationalFunction&, const RationalFunction&) = default;

 private:
  void normalize() {
    if (den_.is_zero()) fail(ErrorCode::DivisionByZero, "rational function with zero denominator");
    if (num_.is_zero()) {
      den_ = Polynomial(1);
      return;
    }
    if (!den_.is_constant() && !num_.is_constant()) {
      Polynomial g = gcd(num_, den_);
      if (!g.is_constant()) {
        num_ = divide_exact(num_, g);
        den_ = divide_exact(den_, g);
      }
    }
    Rational lc = den_.leading_coefficient();
    if (lc != 1) {
      num_ = num_.scaled(Rational(1) / lc);
      den_ = den_.scaled(Rational(1) / lc);
    }
  }

  Polynomial num_;
  Polynomial den_;
  Dimension dim_;
};

inline void require_same_dimension(const RationalFunction& a, const RationalFunction& b, const char* op) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::DimensionMismatch, std::string("cannot ") + op + " values of dimension " +
                                           (a.dim().empty() ? "1" : a.dim().render()) + " and " +
                                           (b.dim().empty() ? "1" : b.dim().render()));
  }
}

inline RationalFunction rf_add(const RationalFunction& a, const RationalFunction& b) {
  require_same_dimension(a, b, "add");
  if (a.den() == b.den()) return RationalFunction::make(a.num() + b.num(), a.den(), a.dim());
  return RationalFunction::make(a.num() * b.den() + b.num() * a.den(), a.den() * b.den(), a.dim());
}

inline RationalFunction rf_sub(const RationalFunction& a, const RationalFunction& b) {
  require_same_dimension(a, b, "subtract");
  if (a.den() == b.den()) return RationalFunction::make(a.num() - b.num(), a.den(), a.dim());
  return RationalFunction::make(a.num() * b.den() - b.num() * a.den(), a.den() * b.den(), a.dim());
}

inline RationalFunction rf_mul(const RationalFunction& a, const RationalFunction& b) {
  return RationalFunction::make(a.num() * b.num(), a.den() * b.den(), a.dim() * b.dim());
}

inline RationalFunction rf_div(const RationalFunction& a, const RationalFunction& b) {
  if (b.is_zero()) fail(ErrorCode::DivisionByZero, "division by an identically zero expression");
  return RationalFunction::make(a.num() * b.den(), a.den() * b.num(), a.dim() / b.dim());
}

inline RationalFunction rf_pow(const RationalFunction& a, int k) {
  if (k >= 0) {
    auto e = static_cast<unsigned>(k);
    return RationalFunction::make(a.num().pow(e), a.den().pow(e), a.dim().pow(k));
  }
  if (a.is_zero()) fail(ErrorCode::DivisionByZero, "zero raised to a negative power");
  auto e = static_cast<unsigned>(-k);
  return RationalFunction::make(a.den().pow(e), a.num().pow(e), a.dim().pow(k));
}

inline RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) { return rf_add(a, b); }
inline RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return rf_sub(a, b); }
inline RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) { return rf_mul(a, b); }
inline RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) { return rf_div(a, b); }

/// a == b as functions: a.num * b.den == b.num * a.den.
inline bool rf_equal(const RationalFunction& a, const RationalFunction& b) {
  return a.num() * b.den() == b.num() * a.den();
}

using Binding = std::variant<RationalFunction, Rational>;

/// Simultaneous substitution of symbols.  Rational bindings are read in the
/// symbol's own dimension.
inline RationalFunction rf_substitute(const RationalFunction& f, const std::map<Symbol, Binding>& bindings) {
  if (bindings.empty()) return f;
  std::map<std::string, RationalFunction> values;
  for (const auto& [sym, binding] : bindings) {
    if (const auto* rf = std::get_if<RationalFunction>(&binding)) {
      if (rf->dim() != sym.dim) {
        fail(ErrorCode::DimensionMismatch, "binding for '" + sym.name + "' has the wrong dimension");
      }
      values[sym.name] = rf->with_dim({});
    } else {
      values[sym.name] = RationalFunction::constant(std::get<Rational>(binding));
    }
  }
  // the substituted value keeps f's dimension, so work dimensionless inside
  auto substitute = [&](const Polynomial& p) {
    RationalFunction acc;
    for (const auto& [m, c] : p.terms()) {
      RationalFunction term = RationalFunction::constant(c);
      for (const auto& [v, e] : m) {
        auto it = values.find(v);
        RationalFunction factor = it == values.end()
                                      ? RationalFunction::symbol(Symbol{v, {}})
                                      : it->second;
        term = rf_mul(term, rf_pow(factor, e));
      }
      acc = rf_add(acc, term);
    }
    return acc;
  };
  RationalFunction den = substitute(f.den());
  if (den.is_zero()) fail(ErrorCode::DivisionByZero, "denominator vanishes after substitution");
  return rf_div(substitute(f.num()), den).with_dim(f.dim());
}

/// `A*B/(A + B)`, `8*A/(A + 8)`, `(A + B)/C`.
inline std::string render(const RationalFunction& f, const RenderOptions& opts = {}) {
  std::string num = render(f.num(), opts);
  if (f.den() == Polynomial(1)) return num;
  if (f.num().terms().size() > 1) num = "(" + num + ")";
  std::string den = render(f.den(), opts);
  bool single_factor = f.den().terms().size() == 1 && f.den().leading_coefficient() == 1 &&
                       f.den().leading_monomial().size() == 1;
  if (!single_factor) den = "(" + den + ")";
  return num + "/" + den;
}

// Magnitude hooks so BasicQuantity<RationalFunction> works with q_add & co.
inline RationalFunction scale_magnitude(const RationalFunction& m, const Rational& factor) {
  return m.scaled(factor);
}
inline bool magnitude_is_zero(const RationalFunction& m) { return m.is_zero(); }

using SymbolicQuantity = BasicQuantity<RationalFunction>;

inline std::string render(const SymbolicQuantity& q, const RenderOptions& opts = {}) {
  std::string mag = render(q.magnitude, opts);
  if (q.unit.empty()) return mag;
  if (q.magnitude.den() == Polynomial(1) && q.magnitude.num().terms().size() > 1) mag = "(" + mag + ")";
  return mag + " " + q.unit.render();
}

}  // namespace namedcalc
