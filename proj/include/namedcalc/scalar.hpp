#pragma once

// Exact scalars: Q-linear combinations of monomials sqrt(d) * pi^a * e^b with
// d square-free.  The stored term map is the canonical form, so structural
// equality is numeric equality.

#include <cctype>
#include <compare>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "namedcalc/error.hpp"
#include "namedcalc/numeric.hpp"

namespace namedcalc {

struct Monomial {
  Integer radicand = 1;
  int pi_exp = 0;
  int e_exp = 0;

  bool is_unit() const { return radicand == 1 && pi_exp == 0 && e_exp == 0; }
  bool is_algebraic() const { return pi_exp == 0 && e_exp == 0; }

  friend bool operator==(const Monomial&, const Monomial&) = default;
  friend std::strong_ordering operator<=>(const Monomial& a, const Monomial& b) {
    if (a.radicand != b.radicand) {
      return a.radicand < b.radicand ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (auto c = a.pi_exp <=> b.pi_exp; c != 0) return c;
    return a.e_exp <=> b.e_exp;
  }
};

class ExactScalar {
 public:
  using TermMap = std::map<Monomial, Rational>;

  ExactScalar() = default;
  ExactScalar(int value) : ExactScalar(Rational(value)) {}  // NOLINT(google-explicit-constructor)
  ExactScalar(const Integer& value) : ExactScalar(Rational(value)) {}  // NOLINT
  ExactScalar(const Rational& value) {  // NOLINT
    if (value != 0) terms_.emplace(Monomial{}, value);
  }

  static ExactScalar pi() { return from_term(Monomial{1, 1, 0}, 1); }
  static ExactScalar e() { return from_term(Monomial{1, 0, 1}, 1); }

  /// q * m, dropping zero.  Caller guarantees m.radicand is square-free.
  static ExactScalar from_term(const Monomial& m, const Rational& q) {
    ExactScalar s;
    if (q != 0) s.terms_.emplace(m, q);
    return s;
  }

  const TermMap& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_unit());
  }
  bool is_algebraic() const {
    for (const auto& [m, q] : terms_) {
      if (!m.is_algebraic()) return false;
    }
    return true;
  }

  Rational rational_part() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Only meaningful when is_rational().
  Rational as_rational() const { return rational_part(); }

  ExactScalar operator-() const {
    ExactScalar r = *this;
    for (auto& [m, q] : r.terms_) q = -q;
    return r;
  }

  ExactScalar& operator+=(const ExactScalar& other) {
    for (const auto& [m, q] : other.terms_) accumulate(m, q);
    return *this;
  }
  ExactScalar& operator-=(const ExactScalar& other) {
    for (const auto& [m, q] : other.terms_) accumulate(m, -q);
    return *this;
  }

  friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { return a += b; }
  friend ExactScalar operator-(ExactScalar a, const ExactScalar& b) { return a -= b; }
  friend ExactScalar operator*(const ExactScalar& a, const ExactScalar& b);
  friend ExactScalar operator/(const ExactScalar& a, const ExactScalar& b);

  friend bool operator==(const ExactScalar&, const ExactScalar&) = default;

 private:
  friend struct ScalarAccess;

  void accumulate(const Monomial& m, const Rational& q) {
    if (q == 0) return;
    auto [it, inserted] = terms_.try_emplace(m, q);
    if (!inserted) {
      it->second += q;
      if (it->second == 0) terms_.erase(it);
    }
  }

  TermMap terms_;
};

struct ScalarAccess {
  static void accumulate(ExactScalar& s, const Monomial& m, const Rational& q) { s.accumulate(m, q); }
};

namespace detail {

// sqrt(a) * sqrt(b) = g * sqrt((a/g) * (b/g)) with g = gcd(a, b); for
// square-free a, b the cofactors are coprime and square-free.
inline std::pair<Integer, Monomial> multiply_monomials(const Monomial& a, const Monomial& b) {
  Integer g = boost::multiprecision::gcd(a.radicand, b.radicand);
  Monomial m{(a.radicand / g) * (b.radicand / g), a.pi_exp + b.pi_exp, a.e_exp + b.e_exp};
  return {g, m};
}

}  // namespace detail

inline ExactScalar operator*(const ExactScalar& a, const ExactScalar& b) {
  ExactScalar out;
  for (const auto& [ma, qa] : a.terms()) {
    for (const auto& [mb, qb] : b.terms()) {
      auto [g, m] = detail::multiply_monomials(ma, mb);
      ScalarAccess::accumulate(out, m, qa * qb * g);
    }
  }
  return out;
}

inline ExactScalar add(const ExactScalar& a, const ExactScalar& b) { return a + b; }
inline ExactScalar sub(const ExactScalar& a, const ExactScalar& b) { return a - b; }
inline ExactScalar mul(const ExactScalar& a, const ExactScalar& b) { return a * b; }

/// q * sqrt(d) with d square-free such that the square equals n exactly.
inline ExactScalar normalize_sqrt(const Rational& n) {
  if (n < 0) fail(ErrorCode::NegativeRadicand, "square root of a negative number " + render_rational(n));
  if (n == 0) return {};
  // sqrt(p/q) = sqrt(p*q)/q
  Integer p = numer(n);
  Integer q = denom(n);
  auto [outside, inside] = square_free_split(p * q);
  return ExactScalar::from_term(Monomial{inside, 0, 0}, Rational(outside) / q);
}

namespace detail {

// Multiplies the algebraic sum b by every sign-conjugate other than itself.
// The full product over all 2^k sign vectors is fixed by every automorphism of
// Q(sqrt d_1, ..., sqrt d_k), hence rational.
inline ExactScalar conjugate_cofactor(const ExactScalar& b) {
  std::vector<Integer> radicands;
  for (const auto& [m, q] : b.terms()) {
    if (m.radicand != 1) radicands.push_back(m.radicand);
  }
  const std::size_t k = radicands.size();
  ExactScalar product = 1;
  for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
    ExactScalar conj;
    for (const auto& [m, q] : b.terms()) {
      Rational coef = q;
      for (std::size_t i = 0; i < k; ++i) {
        if ((mask >> i & 1U) && radicands[i] == m.radicand) coef = -coef;
      }
      conj += ExactScalar::from_term(m, coef);
    }
    product = product * conj;
  }
  return product;
}

}  // namespace detail

inline ExactScalar operator/(const ExactScalar& a, const ExactScalar& b) {
  if (b.is_zero()) fail(ErrorCode::DivisionByZero, "division by zero");
  if (b.terms().size() == 1) {
    const auto& [m, q] = *b.terms().begin();
    // 1/(q sqrt d pi^x e^y) = sqrt d / (q d) pi^-x e^-y
    return a * ExactScalar::from_term(Monomial{m.radicand, -m.pi_exp, -m.e_exp},
                                      Rational(1) / (q * m.radicand));
  }
  const Monomial& first = b.terms().begin()->first;
  for (const auto& [m, q] : b.terms()) {
    if (m.pi_exp != first.pi_exp || m.e_exp != first.e_exp) {
      fail(ErrorCode::UnsupportedDenominator,
           "cannot divide by a sum mixing pi/e monomials with other terms");
    }
  }
  ExactScalar numerator = a;
  ExactScalar denominator = b;
  if (!first.is_algebraic()) {
    // factor out the shared transcendental part
    ExactScalar shared = ExactScalar::from_term(Monomial{1, first.pi_exp, first.e_exp}, 1);
    numerator = numerator / shared;
    denominator = denominator / shared;
  }
  ExactScalar cofactor = detail::conjugate_cofactor(denominator);
  ExactScalar rational_den = denominator * cofactor;
  return numerator * cofactor * ExactScalar(Rational(1) / rational_den.as_rational());
}

inline ExactScalar div(const ExactScalar& a, const ExactScalar& b) { return a / b; }

/// Exact sign of an algebraic scalar: -1, 0 or +1.  Zero is syntactic because
/// distinct square-free radicands are linearly independent over Q; otherwise
/// rational enclosures of each sqrt(d) are bisected until the sum excludes 0.
inline int sign(const ExactScalar& a) {
  if (!a.is_algebraic()) {
    fail(ErrorCode::TranscendentalSign, "sign of a value involving pi or e is not decided");
  }
  if (a.is_zero()) return 0;
  if (a.is_rational()) return sign_of(a.as_rational());

  struct Enclosure {
    Rational coef;
    Integer radicand;
    Rational lo;
    Rational hi;
  };
  Rational constant = a.rational_part();
  std::vector<Enclosure> parts;
  for (const auto& [m, q] : a.terms()) {
    if (m.radicand == 1) continue;
    Integer r = isqrt(m.radicand);
    parts.push_back({q, m.radicand, Rational(r), Rational(r + 1)});
  }
  for (;;) {
    Rational low = constant;
    Rational high = constant;
    for (const auto& p : parts) {
      if (p.coef > 0) {
        low += p.coef * p.lo;
        high += p.coef * p.hi;
      } else {
        low += p.coef * p.hi;
        high += p.coef * p.lo;
      }
    }
    if (low > 0) return 1;
    if (high < 0) return -1;
    for (auto& p : parts) {
      Rational mid = (p.lo + p.hi) / 2;
      if (mid * mid < Rational(p.radicand)) {
        p.lo = mid;
      } else {
        p.hi = mid;
      }
    }
  }
}

inline ExactScalar pow_int(const ExactScalar& a, long k) {
  if (k < 0) {
    if (a.is_zero()) fail(ErrorCode::DivisionByZero, "zero raised to a negative power");
    return ExactScalar(1) / pow_int(a, -k);
  }
  if (a.is_rational()) return ExactScalar(rpow(a.as_rational(), k));
  ExactScalar result = 1;
  ExactScalar square = a;
  auto e = static_cast<unsigned long>(k);
  while (e > 0) {
    if (e & 1U) result = result * square;
    e >>= 1U;
    if (e > 0) square = square * square;
  }
  return result;
}

/// Checks every structural invariant of the canonical form.
inline bool is_canonical(const ExactScalar& s) {
  for (const auto& [m, q] : s.terms()) {
    if (q == 0) return false;
    if (boost::multiprecision::gcd(numer(q), denom(q)) != 1 || denom(q) <= 0) return false;
    if (!is_square_free(m.radicand)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- rendering

namespace detail {

inline std::string render_monomial_factors(const Monomial& m) {
  std::string out;
  auto append = [&](const std::string& f) {
    if (!out.empty()) out += "*";
    out += f;
  };
  if (m.radicand != 1) append("sqrt(" + m.radicand.str() + ")");
  if (m.pi_exp == 1) {
    append("pi");
  } else if (m.pi_exp != 0) {
    append("pi^" + std::to_string(m.pi_exp));
  }
  if (m.e_exp == 1) {
    append("e");
  } else if (m.e_exp != 0) {
    append("e^" + std::to_string(m.e_exp));
  }
  return out;
}

// |coefficient| * monomial, sign handled by the caller
inline std::string render_term_magnitude(const Monomial& m, const Rational& abs_coef,
                                         const RenderOptions& opts) {
  if (m.is_unit()) return render_rational(abs_coef, opts);
  std::string factors = render_monomial_factors(m);
  if (abs_coef == 1) return factors;
  return render_rational(abs_coef, opts) + "*" + factors;
}

}  // namespace detail

/// Canonical text: rational part first, then terms by (radicand, pi, e), e.g.
/// "1/2 - 1/2*sqrt(3)".
inline std::string render(const ExactScalar& s, const RenderOptions& opts = {}) {
  if (s.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, q] : s.terms()) {
    bool negative = q < 0;
    std::string body = detail::render_term_magnitude(m, negative ? Rational(-q) : q, opts);
    if (first) {
      out += negative ? "-" + body : body;
      first = false;
    } else {
      out += negative ? " - " : " + ";
      out += body;
    }
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const ExactScalar& s) { return os << render(s); }

// ------------------------------------------------------------------ parsing

namespace detail {

class ScalarReader {
 public:
  explicit ScalarReader(std::string_view text) : text_(text) {}

  ExactScalar read_all() {
    ExactScalar value = read_sum();
    skip_space();
    if (pos_ != text_.size()) error("unexpected trailing input");
    return value;
  }

 private:
  ExactScalar read_sum() {
    skip_space();
    bool negative = consume('-');
    ExactScalar total = read_product();
    if (negative) total = -total;
    for (;;) {
      skip_space();
      if (consume('+')) {
        total += read_product();
      } else if (consume('-')) {
        total -= read_product();
      } else {
        return total;
      }
    }
  }

  ExactScalar read_product() {
    ExactScalar value = read_factor();
    for (;;) {
      skip_space();
      if (consume('*')) {
        value = value * read_factor();
      } else if (consume('/')) {
        value = value / read_factor();
      } else {
        return value;
      }
    }
  }

  ExactScalar read_factor() {
    skip_space();
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      Integer base = read_integer();
      if (consume('^')) {
        long k = read_signed_small();
        return ExactScalar(rpow(Rational(base), k));
      }
      return ExactScalar(base);
    }
    if (consume_word("sqrt")) {
      expect('(');
      skip_space();
      bool negative = consume('-');
      Rational arg = Rational(read_integer());
      skip_space();
      if (consume('/')) arg /= Rational(read_integer());
      expect(')');
      return normalize_sqrt(negative ? Rational(-arg) : arg);
    }
    if (consume_word("pi")) return power_of(Monomial{1, 1, 0});
    if (consume_word("e")) return power_of(Monomial{1, 0, 1});
    if (consume('(')) {
      ExactScalar inner = read_sum();
      expect(')');
      return inner;
    }
    error("expected a number, sqrt(...), pi or e");
  }

  ExactScalar power_of(Monomial unit) {
    long k = 1;
    skip_space();
    if (consume('^')) k = read_signed_small();
    unit.pi_exp *= static_cast<int>(k);
    unit.e_exp *= static_cast<int>(k);
    return ExactScalar::from_term(unit, 1);
  }

  Integer read_integer() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) error("expected digits");
    return Integer(std::string(text_.substr(start, pos_ - start)));
  }

  long read_signed_small() {
    skip_space();
    bool negative = consume('-');
    Integer n = read_integer();
    if (n > 1'000'000) error("exponent too large");
    long v = n.convert_to<long>();
    return negative ? -v : v;
  }

  bool consume_word(std::string_view word) {
    skip_space();
    if (text_.substr(pos_, word.size()) != word) return false;
    std::size_t end = pos_ + word.size();
    if (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
      return false;
    }
    pos_ = end;
    return true;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) error(std::string("expected '") + c + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void error(const std::string& what) const {
    throw Error(ErrorCode::ParseError, what + " in scalar '" + std::string(text_) + "'")
        .at_position(1, static_cast<int>(pos_) + 1);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the canonical rendering (and any sum/product of the same atoms).
inline ExactScalar parse_scalar(std::string_view text) {
  return detail::ScalarReader(text).read_all();
}

}  // namespace namedcalc
