#include <gtest/gtest.h>

#include "support.hpp"

using namespace namedcalc;
using testing_support::Gen;

namespace {

ExactScalar sqrt_of(long n) { return normalize_sqrt(Rational(n)); }
ExactScalar frac(long p, long q) { return ExactScalar(Rational(p, q)); }

void expect_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Random element of Q(sqrt 2, sqrt 3, sqrt 5, ...), at most three surds.
ExactScalar random_surd_sum(Gen& g) {
  static const long radicands[] = {1, 2, 3, 5, 6, 7, 10, 12, 18, 8};
  ExactScalar s;
  int terms = g.integer(1, 3);
  for (int i = 0; i < terms; ++i) s += ExactScalar(g.rational()) * sqrt_of(radicands[g.integer(0, 9)]);
  return s;
}

// Independent sign oracle: enclose every sqrt(d) between floor and ceiling
// of sqrt(d * N^2) / N for a large N, widening N until zero is excluded.
int oracle_sign(const ExactScalar& a) {
  if (a.is_zero()) return 0;
  for (Integer n = Integer(1) << 64;; n *= n) {
    Rational lo = 0;
    Rational hi = 0;
    for (const auto& [m, q] : a.terms()) {
      Integer r = isqrt(m.radicand * n * n);
      Rational below(r, n);
      Rational above = r * r == m.radicand * n * n ? below : Rational(r + 1, n);
      if (q > 0) {
        lo += q * below;
        hi += q * above;
      } else {
        lo += q * above;
        hi += q * below;
      }
    }
    if (lo > 0) return 1;
    if (hi < 0) return -1;
  }
}

}  // namespace

// ---------------------------------------------------------------- examples

TEST(NormalizeSqrt, ExtractsSquareFactor) {
  ExactScalar r = normalize_sqrt(12);
  EXPECT_EQ(r, ExactScalar(2) * ExactScalar::from_term(Monomial{3, 0, 0}, 1));
  EXPECT_EQ(render(r), "2*sqrt(3)");
}

TEST(NormalizeSqrt, PerfectSquareFraction) { EXPECT_EQ(normalize_sqrt(Rational(9, 4)), frac(3, 2)); }

TEST(NormalizeSqrt, HalfMinusHalfRootThreeRoundTrips) {
  ExactScalar x = (ExactScalar(1) - sqrt_of(3)) / ExactScalar(2);
  EXPECT_EQ(render(x), "1/2 - 1/2*sqrt(3)");
  EXPECT_EQ(parse_scalar(render(x)), x);
  EXPECT_TRUE(is_canonical(x));
}

TEST(NormalizeSqrt, NegativeRejected) {
  expect_code(ErrorCode::NegativeRadicand, [] { normalize_sqrt(-1); });
}

TEST(NormalizeSqrt, FractionRadicandIsRationalized) {
  // sqrt(1/2) = sqrt(2)/2
  EXPECT_EQ(normalize_sqrt(Rational(1, 2)), frac(1, 2) * sqrt_of(2));
}

TEST(Add, ConjugateSurdsCancel) {
  ExactScalar a = (ExactScalar(1) - sqrt_of(3)) / ExactScalar(2);
  ExactScalar b = (ExactScalar(1) + sqrt_of(3)) / ExactScalar(2);
  EXPECT_EQ(add(a, b), ExactScalar(1));
}

TEST(Add, LikeMonomialsMerge) { EXPECT_EQ(render(sqrt_of(2) + sqrt_of(2)), "2*sqrt(2)"); }

TEST(Add, ThirdPlusSixth) { EXPECT_EQ(frac(1, 3) + frac(1, 6), frac(1, 2)); }

TEST(Mul, SurdProductSimplifies) { EXPECT_EQ(sqrt_of(2) * sqrt_of(8), ExactScalar(4)); }

TEST(Mul, ConjugateProduct) {
  // (1 - sqrt3)(1 + sqrt3)/4 = (1 - 3)/4
  ExactScalar a = (ExactScalar(1) - sqrt_of(3)) / ExactScalar(2);
  ExactScalar b = (ExactScalar(1) + sqrt_of(3)) / ExactScalar(2);
  EXPECT_EQ(mul(a, b), frac(1 - 3, 4));
}

TEST(Mul, PiSquared) {
  ExactScalar p2 = ExactScalar::pi() * ExactScalar::pi();
  EXPECT_EQ(p2, ExactScalar::from_term(Monomial{1, 2, 0}, 1));
  EXPECT_EQ(render(p2), "pi^2");
}

TEST(Div, RationalizesSurdDenominator) {
  ExactScalar d = ExactScalar(1) + sqrt_of(3);
  ExactScalar q = div(ExactScalar(1), d);
  EXPECT_EQ(q * d, ExactScalar(1));
  EXPECT_EQ(q, (sqrt_of(3) - ExactScalar(1)) / ExactScalar(2));
  EXPECT_EQ(render(q), "-1/2 + 1/2*sqrt(3)");
}

TEST(Div, SeventyTwoOverTwentyFour) { EXPECT_EQ(div(ExactScalar(72), ExactScalar(24)), ExactScalar(3)); }

TEST(Div, ByPiGivesNegativeExponent) {
  ExactScalar q = div(ExactScalar(6), ExactScalar::pi());
  EXPECT_EQ(q, ExactScalar::from_term(Monomial{1, -1, 0}, 6));
  EXPECT_EQ(render(q), "6*pi^-1");
  EXPECT_EQ(parse_scalar(render(q)), q);
}

TEST(Div, ThreeRadicandDenominator) {
  ExactScalar d = ExactScalar(1) + sqrt_of(2) + sqrt_of(3) + sqrt_of(5);
  ExactScalar q = div(ExactScalar(1), d);
  EXPECT_EQ(q * d, ExactScalar(1));
  EXPECT_TRUE(is_canonical(q));
}

TEST(Div, SharedTranscendentalFactorDivides) {
  ExactScalar d = ExactScalar::pi() * (ExactScalar(1) + sqrt_of(2));
  EXPECT_EQ(div(d, d), ExactScalar(1));
}

TEST(Div, Errors) {
  expect_code(ErrorCode::DivisionByZero, [] { div(ExactScalar(1), ExactScalar(0)); });
  expect_code(ErrorCode::UnsupportedDenominator, [] { div(ExactScalar(1), ExactScalar(1) + ExactScalar::pi()); });
  expect_code(ErrorCode::UnsupportedDenominator, [] { div(ExactScalar(1), ExactScalar::e() + ExactScalar::pi()); });
}

TEST(Sign, Examples) {
  EXPECT_EQ(sign(ExactScalar(0)), 0);
  EXPECT_EQ(sign(ExactScalar(1) - sqrt_of(3)), -1);
  EXPECT_EQ(sign(ExactScalar(5) - ExactScalar(2) * sqrt_of(3)), 1);
  // 1.7 < sqrt 3 < 1.8, both endpoints rational
  EXPECT_EQ(sign(sqrt_of(3) - frac(17, 10)), 1);
  EXPECT_EQ(sign(sqrt_of(3) - frac(18, 10)), -1);
}

TEST(Sign, CloseCancellation) {
  // continued-fraction convergents of sqrt 2 sit within 1e-4 of it
  EXPECT_EQ(sign(sqrt_of(2) - frac(99, 70)), -1);
  EXPECT_EQ(sign(sqrt_of(2) - frac(140, 99)), 1);
}

TEST(Sign, TranscendentalRejected) {
  expect_code(ErrorCode::TranscendentalSign, [] { sign(ExactScalar::pi() - ExactScalar(3)); });
}

TEST(PowInt, TwoToThe2022) {
  ExactScalar p = pow_int(ExactScalar(2), 2022);
  Integer shifted = Integer(1) << 2022;
  EXPECT_EQ(p, ExactScalar(shifted));
  EXPECT_EQ(render(p), "2^2022");
  std::string digits = render(p, RenderOptions{true});
  EXPECT_EQ(digits.size(), 609U);
  EXPECT_EQ(digits, shifted.str());
}

TEST(PowInt, RootTwoSquared) { EXPECT_EQ(pow_int(sqrt_of(2), 2), ExactScalar(2)); }

TEST(PowInt, ZeroExponent) {
  EXPECT_EQ(pow_int(sqrt_of(7) + ExactScalar(3), 0), ExactScalar(1));
  EXPECT_EQ(pow_int(ExactScalar::pi(), 0), ExactScalar(1));
}

TEST(PowInt, NegativeExponent) {
  ExactScalar a = ExactScalar(1) + sqrt_of(2);
  EXPECT_EQ(pow_int(a, -2) * a * a, ExactScalar(1));
  expect_code(ErrorCode::DivisionByZero, [] { pow_int(ExactScalar(0), -1); });
}

TEST(Render, Forms) {
  EXPECT_EQ(render(ExactScalar(0)), "0");
  EXPECT_EQ(render(frac(-7, 3)), "-7/3");
  EXPECT_EQ(render(ExactScalar::pi() * ExactScalar::e()), "pi*e");
  EXPECT_EQ(render(ExactScalar(3) - sqrt_of(2) * ExactScalar::pi()), "3 - sqrt(2)*pi");
  EXPECT_EQ(render(ExactScalar(Integer(10) * ipow(Integer(10), 19))), "10^20");
  EXPECT_EQ(render(ExactScalar(Integer(12345))), "12345");
}

TEST(Parse, Rejections) {
  expect_code(ErrorCode::ParseError, [] { parse_scalar("1 +"); });
  expect_code(ErrorCode::ParseError, [] { parse_scalar("1.5"); });
  expect_code(ErrorCode::ParseError, [] { parse_scalar("sqrt(x)"); });
}

TEST(Parse, SquareFreeOnRead) {
  EXPECT_EQ(parse_scalar("sqrt(12)"), ExactScalar(2) * sqrt_of(3));
  EXPECT_EQ(parse_scalar("2^10"), ExactScalar(1024));
}

TEST(Radicand, TooLargeToFactorIsRejected) {
  // p^3 q^2 with both primes above the trial-division limit
  Integer p("1000000007");
  Integer q("998244353");
  expect_code(ErrorCode::RadicandTooLarge, [&] { normalize_sqrt(Rational(p * q * q * p * p)); });
}

// --------------------------------------------------------------- properties

TEST(ScalarProperties, FieldLawsAndCanonicalForm) {
  Gen g(20240101);
  int cases = 0;
  for (int i = 0; i < 10000; ++i) {
    ExactScalar a = random_surd_sum(g);
    ExactScalar b = random_surd_sum(g);
    ExactScalar c = random_surd_sum(g);
    ASSERT_TRUE(is_canonical(a) && is_canonical(b) && is_canonical(c));
    ASSERT_EQ(a + b, b + a);
    ASSERT_EQ(a * b, b * a);
    ASSERT_EQ((a + b) + c, a + (b + c));
    ASSERT_EQ((a * b) * c, a * (b * c));
    ASSERT_EQ(a * (b + c), a * b + a * c);
    ASSERT_TRUE((a + -a).is_zero());
    ASSERT_TRUE(is_canonical(a * b));
    if (!a.is_zero()) {
      ExactScalar inv = div(ExactScalar(1), a);
      ASSERT_TRUE(is_canonical(inv));
      ASSERT_EQ(a * inv, ExactScalar(1)) << render(a);
      ASSERT_EQ((b / a) * a, b);
    }
    ++cases;
  }
  EXPECT_GE(cases, 10000);
}

TEST(ScalarProperties, SignMatchesOracleAndIsMultiplicative) {
  Gen g(77);
  for (int i = 0; i < 3000; ++i) {
    ExactScalar a = random_surd_sum(g);
    ExactScalar b = random_surd_sum(g);
    ASSERT_EQ(sign(a), oracle_sign(a)) << render(a);
    ASSERT_EQ(sign(a) * sign(b), sign(a * b)) << render(a) << " ; " << render(b);
  }
}

TEST(ScalarProperties, TwoTermSignAgainstSquares) {
  // p + q sqrt d: same signs decide, else compare p^2 with q^2 d
  Gen g(5);
  for (int i = 0; i < 2000; ++i) {
    Rational p = g.rational(50, 7);
    Rational q = g.rational(50, 7);
    long d = std::vector<long>{2, 3, 5, 6, 7, 11, 13}[g.integer(0, 6)];
    int expected;
    if (q == 0) {
      expected = sign_of(p);
    } else if (p == 0 || sign_of(p) == sign_of(q)) {
      expected = sign_of(q);
    } else {
      Rational diff = p * p - q * q * d;
      expected = diff > 0 ? sign_of(p) : sign_of(q);
    }
    ASSERT_EQ(sign(ExactScalar(p) + ExactScalar(q) * sqrt_of(d)), expected);
  }
}

TEST(ScalarProperties, NormalizeSqrtSquaresBack) {
  Gen g(99);
  for (int i = 0; i < 2000; ++i) {
    Rational n(g.integer(0, 5000), g.integer(1, 500));
    ExactScalar r = normalize_sqrt(n);
    ASSERT_TRUE(is_canonical(r));
    ASSERT_EQ(r * r, ExactScalar(n));
    ASSERT_GE(sign(r), 0);
  }
}

TEST(ScalarProperties, AssociationOrderDoesNotMatter) {
  Gen g(31337);
  for (int i = 0; i < 1000; ++i) {
    std::vector<ExactScalar> xs;
    for (int k = 0; k < 5; ++k) xs.push_back(random_surd_sum(g));
    // ((x0 op x1) op x2) ... against x0 op (x1 op (x2 ...)) for + and *
    ExactScalar sum_left = xs[0];
    ExactScalar prod_left = xs[0];
    for (int k = 1; k < 5; ++k) {
      sum_left = sum_left + xs[k];
      prod_left = prod_left * xs[k];
    }
    ExactScalar sum_right = xs[4];
    ExactScalar prod_right = xs[4];
    for (int k = 3; k >= 0; --k) {
      sum_right = xs[k] + sum_right;
      prod_right = xs[k] * prod_right;
    }
    ASSERT_EQ(sum_left, sum_right);
    ExactScalar left = prod_left;
    ExactScalar right = prod_right;
    ASSERT_EQ(left, right);
  }
}

TEST(ScalarProperties, RenderParseRoundTrip) {
  Gen g(4);
  for (int i = 0; i < 2000; ++i) {
    ExactScalar a = random_surd_sum(g);
    if (g.coin()) a = a * pow_int(ExactScalar::pi(), g.integer(-2, 2));
    if (g.coin()) a = a + ExactScalar(g.rational()) * pow_int(ExactScalar::e(), g.integer(-2, 2));
    ASSERT_EQ(parse_scalar(render(a)), a) << render(a);
  }
}
