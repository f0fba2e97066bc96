#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "namedcalc/namedcalc.hpp"

namespace testing_support {

inline std::string sample_text(const std::string& name) {
  std::ifstream in(std::string(SAMPLES_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing sample " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline namedcalc::StepProgram sample(const std::string& name) { return namedcalc::parse(sample_text(name)); }

inline namedcalc::Quantity qty(const std::string& text, const namedcalc::UnitRegistry& reg) {
  return namedcalc::parse_quantity(text, reg);
}

// Small random rationals, the raw material of the property suites.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  namedcalc::Rational rational(int span = 20, int max_den = 9) {
    return namedcalc::Rational(integer(-span, span), integer(1, max_den));
  }

  namedcalc::Rational positive_rational(int span = 40, int max_den = 9) {
    return namedcalc::Rational(integer(1, span), integer(1, max_den));
  }

  bool coin() { return integer(0, 1) == 1; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testing_support
