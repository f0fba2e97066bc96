#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "namedcalc/error.hpp"

namespace namedcalc {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Integer numer(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denom(const Rational& q) { return boost::multiprecision::denominator(q); }
inline bool is_integer(const Rational& q) { return denom(q) == 1; }

inline int sign_of(const Integer& n) { return n.sign(); }
inline int sign_of(const Rational& q) { return q.sign(); }

inline Integer ipow(const Integer& base, unsigned exponent) {
  return boost::multiprecision::pow(base, exponent);
}

inline Rational rpow(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base == 0) fail(ErrorCode::DivisionByZero, "zero raised to a negative power");
    return Rational(1) / rpow(base, -exponent);
  }
  Rational result = 1;
  Rational square = base;
  auto e = static_cast<unsigned long>(exponent);
  while (e > 0) {
    if (e & 1U) result *= square;
    e >>= 1U;
    if (e > 0) square *= square;
  }
  return result;
}

/// floor(sqrt(n)) for n >= 0
inline Integer isqrt(const Integer& n) { return boost::multiprecision::sqrt(n); }

inline bool is_perfect_square(const Integer& n, Integer* root = nullptr) {
  if (n < 0) return false;
  Integer r = isqrt(n);
  if (root) *root = r;
  return r * r == n;
}

/// Largest trial divisor tried while splitting a radicand.  Anything whose
/// square-free decomposition needs more is rejected instead of guessed.
inline constexpr std::uint64_t kTrialDivisionLimit = 2'000'000;

/// Splits n > 0 as square * square_free.  Returns {s, d} with n = s^2 * d and
/// d square-free.  Trial division runs while p^3 <= remaining cofactor; what is
/// left then has at most two prime factors, so a perfect-square test settles it.
inline std::pair<Integer, Integer> square_free_split(Integer n) {
  if (n <= 0) fail(ErrorCode::NegativeRadicand, "square-free split of a non-positive integer");
  Integer outside = 1;
  Integer inside = 1;
  auto extract = [&](const Integer& p) {
    int multiplicity = 0;
    while (n % p == 0) {
      n /= p;
      ++multiplicity;
    }
    if (multiplicity >= 2) outside *= ipow(p, static_cast<unsigned>(multiplicity / 2));
    if (multiplicity % 2 == 1) inside *= p;
  };
  extract(2);
  extract(3);
  // 6k +- 1 wheel
  for (std::uint64_t p = 5;; p += 6) {
    Integer cube = Integer(p) * p * p;
    if (cube > n) break;
    if (p > kTrialDivisionLimit) {
      fail(ErrorCode::RadicandTooLarge, "radicand too large to decompose exactly");
    }
    extract(p);
    extract(p + 2);
  }
  if (n > 1) {
    Integer root;
    if (is_perfect_square(n, &root)) {
      outside *= root;
    } else {
      inside *= n;
    }
  }
  return {outside, inside};
}

inline bool is_square_free(const Integer& n) {
  if (n <= 0) return false;
  return square_free_split(n).first == 1;
}

struct RenderOptions {
  // print every integer in full decimal; otherwise large exact powers of a
  // small base print as base^k (2^2022)
  bool expand_powers = false;
};

namespace detail {

inline constexpr unsigned kPowerRenderMinDigits = 16;
inline constexpr unsigned kPowerRenderMaxBase = 1000;

inline bool is_perfect_power_base(unsigned b) {
  for (unsigned r = 2; r * r <= b; ++r) {
    unsigned v = r * r;
    while (v < b) v *= r;
    if (v == b) return true;
  }
  return false;
}

// If |n| is base^k for a small non-power base and k >= 2, return {base, k}.
inline std::optional<std::pair<unsigned, unsigned>> as_small_power(const Integer& n) {
  Integer m = boost::multiprecision::abs(n);
  for (unsigned b = 2; b <= kPowerRenderMaxBase; ++b) {
    if (m % b != 0) continue;
    if (is_perfect_power_base(b)) continue;
    unsigned k = 0;
    Integer rest = m;
    while (rest % b == 0) {
      rest /= b;
      ++k;
    }
    if (rest == 1 && k >= 2) return std::pair{b, k};
  }
  return std::nullopt;
}

}  // namespace detail

inline std::string render_integer(const Integer& n, const RenderOptions& opts = {}) {
  std::string digits = n.str();
  if (opts.expand_powers) return digits;
  std::size_t width = digits.size() - (n < 0 ? 1 : 0);
  if (width < detail::kPowerRenderMinDigits) return digits;
  if (auto power = detail::as_small_power(n)) {
    return std::string(n < 0 ? "-" : "") + std::to_string(power->first) + "^" +
           std::to_string(power->second);
  }
  return digits;
}

inline std::string render_rational(const Rational& q, const RenderOptions& opts = {}) {
  std::string out = render_integer(numer(q), opts);
  if (denom(q) != 1) out += "/" + render_integer(denom(q), opts);
  return out;
}

}  // namespace namedcalc
