#pragma once

// Named numbers: unit atoms, exchange-rate commensurability classes,
// dimension vectors, and quantity arithmetic that refuses to add
// incommensurable things.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "namedcalc/error.hpp"
#include "namedcalc/numeric.hpp"
#include "namedcalc/scalar.hpp"

namespace namedcalc {

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

/// Finite map key -> nonzero integer exponent.  UnitExpr keys are unit atoms,
/// Dimension keys are commensurability classes (named by their representative
/// atom).  The tag keeps the two from mixing.
template <class Tag>
class ExponentVector {
 public:
  using Map = std::map<std::string, int>;

  ExponentVector() = default;

  static ExponentVector atom(const std::string& name, int exponent = 1) {
    ExponentVector v;
    v.add(name, exponent);
    return v;
  }

  const Map& exponents() const { return exps_; }
  bool empty() const { return exps_.empty(); }
  bool dimensionless() const { return exps_.empty(); }

  int exponent(const std::string& key) const {
    auto it = exps_.find(key);
    return it == exps_.end() ? 0 : it->second;
  }

  void add(const std::string& key, int exponent) {
    if (exponent == 0) return;
    int& slot = exps_[key];
    slot += exponent;
    if (slot == 0) exps_.erase(key);
  }

  ExponentVector& operator*=(const ExponentVector& other) {
    for (const auto& [k, e] : other.exps_) add(k, e);
    return *this;
  }
  ExponentVector& operator/=(const ExponentVector& other) {
    for (const auto& [k, e] : other.exps_) add(k, -e);
    return *this;
  }
  friend ExponentVector operator*(ExponentVector a, const ExponentVector& b) { return a *= b; }
  friend ExponentVector operator/(ExponentVector a, const ExponentVector& b) { return a /= b; }

  ExponentVector pow(int k) const {
    ExponentVector r;
    if (k == 0) return r;
    for (const auto& [key, e] : exps_) r.exps_[key] = e * k;
    return r;
  }

  bool all_even() const {
    return std::all_of(exps_.begin(), exps_.end(), [](const auto& kv) { return kv.second % 2 == 0; });
  }

  ExponentVector halved() const {
    ExponentVector r;
    for (const auto& [key, e] : exps_) r.exps_[key] = e / 2;
    return r;
  }

  friend bool operator==(const ExponentVector&, const ExponentVector&) = default;
  friend bool operator<(const ExponentVector& a, const ExponentVector& b) { return a.exps_ < b.exps_; }

  /// `cherry/min`, `m/s^2`, `leg/head`; with no positive exponent, `s^-2`.
  std::string render() const {
    std::string num;
    std::vector<std::pair<std::string, int>> negatives;
    for (const auto& [k, e] : exps_) {
      if (e > 0) {
        if (!num.empty()) num += "*";
        num += k;
        if (e != 1) num += "^" + std::to_string(e);
      } else {
        negatives.emplace_back(k, e);
      }
    }
    if (num.empty()) {
      std::string out;
      for (const auto& [k, e] : negatives) {
        if (!out.empty()) out += "*";
        out += k + "^" + std::to_string(e);
      }
      return out;
    }
    for (const auto& [k, e] : negatives) {
      num += "/" + k;
      if (e != -1) num += "^" + std::to_string(-e);
    }
    return num;
  }

 private:
  Map exps_;
};

struct UnitTag {};
struct DimensionTag {};
using UnitExpr = ExponentVector<UnitTag>;
using Dimension = ExponentVector<DimensionTag>;

/// A magnitude paired with its unit.  The magnitude is an ExactScalar for
/// call-by-value and a rational function for call-by-name.
template <class Magnitude>
struct BasicQuantity {
  Magnitude magnitude;
  UnitExpr unit;

  friend bool operator==(const BasicQuantity&, const BasicQuantity&) = default;
};

using Quantity = BasicQuantity<ExactScalar>;

inline Quantity quantity(const ExactScalar& magnitude, const UnitExpr& unit = {}) {
  return Quantity{magnitude, unit};
}

inline std::string render(const Quantity& q, const RenderOptions& opts = {}) {
  std::string mag = render(q.magnitude, opts);
  if (q.magnitude.terms().size() > 1 && !q.unit.empty()) mag = "(" + mag + ")";
  if (q.unit.empty()) return mag;
  return mag + " " + q.unit.render();
}

// Magnitude hooks used by the generic quantity arithmetic.
inline ExactScalar scale_magnitude(const ExactScalar& m, const Rational& factor) {
  return m * ExactScalar(factor);
}
inline bool magnitude_is_zero(const ExactScalar& m) { return m.is_zero(); }

class UnitRegistry {
 public:
  struct Atom {
    std::string representative;
    Rational factor;  // one of this atom = factor * representative
    bool builtin = false;
    std::size_t order = 0;
  };

  static UnitRegistry empty() { return UnitRegistry{}; }

  /// SI base atoms plus `min` (1 min == 60 s).
  static UnitRegistry standard() {
    UnitRegistry reg;
    for (const char* name : {"s", "m", "kg", "A", "K", "mol", "cd", "min"}) {
      reg.insert_atom(name, /*builtin=*/true);
    }
    reg.merge("min", 1, "s", 60);
    return reg;
  }

  bool contains(const std::string& name) const { return atoms_.count(name) != 0; }
  const std::map<std::string, Atom>& atoms() const { return atoms_; }

  const Atom& atom(const std::string& name) const {
    auto it = atoms_.find(name);
    if (it == atoms_.end()) fail(ErrorCode::UnknownUnit, "unknown unit '" + name + "'");
    return it->second;
  }

  const std::string& class_of(const std::string& name) const { return atom(name).representative; }

  /// Declares a fresh atom in its own class.  Re-declaring a preloaded atom
  /// adopts it (keeping its rates); re-declaring a user atom is an error.
  UnitRegistry declare_unit(const std::string& name) const {
    if (!is_identifier(name)) fail(ErrorCode::InvalidRate, "'" + name + "' is not a unit name");
    UnitRegistry next = *this;
    if (auto it = next.atoms_.find(name); it != next.atoms_.end()) {
      if (!it->second.builtin) fail(ErrorCode::DuplicateUnit, "unit '" + name + "' already declared");
      it->second.builtin = false;
      return next;
    }
    next.insert_atom(name, false);
    return next;
  }

  /// `lhs == rhs`, e.g. 1 ducat == 5 piastre.  Both sides are positive
  /// rational amounts of a single atom.
  UnitRegistry declare_rate(const Quantity& lhs, const Quantity& rhs) const {
    auto [lhs_atom, lhs_amount] = rate_side(lhs);
    auto [rhs_atom, rhs_amount] = rate_side(rhs);
    UnitRegistry next = *this;
    next.merge(lhs_atom, lhs_amount, rhs_atom, rhs_amount);
    return next;
  }

  /// Drops an atom.  If it represented its class, the earliest-declared
  /// remaining member takes over and factors are rebased.
  UnitRegistry remove_unit(const std::string& name) const {
    const Atom removed = atom(name);
    UnitRegistry next = *this;
    next.atoms_.erase(name);
    if (removed.representative == name) {
      std::string heir;
      std::size_t best = 0;
      for (const auto& [n, a] : next.atoms_) {
        if (a.representative == name && (heir.empty() || a.order < best)) {
          heir = n;
          best = a.order;
        }
      }
      if (!heir.empty()) {
        Rational base = next.atoms_[heir].factor;
        for (auto& [n, a] : next.atoms_) {
          if (a.representative == name) {
            a.representative = heir;
            a.factor /= base;
          }
        }
      }
    }
    return next;
  }

  /// How many representative units one of `u` is, as a product over atoms.
  Rational factor(const UnitExpr& u) const {
    Rational f = 1;
    for (const auto& [name, e] : u.exponents()) f *= rpow(atom(name).factor, e);
    return f;
  }

  Dimension dimension_of(const UnitExpr& u) const {
    Dimension d;
    for (const auto& [name, e] : u.exponents()) d.add(class_of(name), e);
    return d;
  }

  bool commensurable(const UnitExpr& a, const UnitExpr& b) const {
    return dimension_of(a) == dimension_of(b);
  }

 private:
  static std::pair<std::string, Rational> rate_side(const Quantity& q) {
    const auto& exps = q.unit.exponents();
    if (exps.size() != 1 || exps.begin()->second != 1) {
      fail(ErrorCode::InvalidRate, "each side of a rate must be an amount of a single unit");
    }
    if (!q.magnitude.is_rational()) {
      fail(ErrorCode::NonRationalRate, "exchange rates must be rational, got " + render(q.magnitude));
    }
    Rational amount = q.magnitude.as_rational();
    if (amount <= 0) fail(ErrorCode::InvalidRate, "exchange rates must be positive");
    return {exps.begin()->first, amount};
  }

  void insert_atom(const std::string& name, bool builtin) {
    atoms_[name] = Atom{name, 1, builtin, next_order_++};
  }

  // lhs_amount lhs == rhs_amount rhs
  void merge(const std::string& lhs, const Rational& lhs_amount, const std::string& rhs,
             const Rational& rhs_amount) {
    const Atom& a = atom(lhs);
    const Atom& b = atom(rhs);
    if (a.representative == b.representative) {
      if (lhs_amount * a.factor != rhs_amount * b.factor) {
        fail(ErrorCode::InconsistentRate, "rate between '" + lhs + "' and '" + rhs +
                                              "' contradicts an earlier declaration");
      }
      return;
    }
    // the class whose representative is older survives
    bool lhs_survives = atom(a.representative).order < atom(b.representative).order;
    const std::string& keep_atom = lhs_survives ? lhs : rhs;
    const std::string& drop_atom = lhs_survives ? rhs : lhs;
    const Rational& keep_amount = lhs_survives ? lhs_amount : rhs_amount;
    const Rational& drop_amount = lhs_survives ? rhs_amount : lhs_amount;
    const std::string keep_rep = atom(keep_atom).representative;
    const std::string drop_rep = atom(drop_atom).representative;
    // drop_amount * f(drop) == keep_amount * f(keep) in the surviving class
    Rational drop_factor = keep_amount * atom(keep_atom).factor / drop_amount;
    Rational rebase = drop_factor / atom(drop_atom).factor;
    for (auto& [n, x] : atoms_) {
      if (x.representative == drop_rep) {
        x.representative = keep_rep;
        x.factor *= rebase;
      }
    }
  }

  std::map<std::string, Atom> atoms_;
  std::size_t next_order_ = 0;
};

// ------------------------------------------------------ quantity arithmetic

namespace detail {

// For every class touched by either unit, the finest atom (smallest factor,
// then name) that either operand uses.
inline std::map<std::string, std::string> common_atoms(const UnitRegistry& reg, const UnitExpr& a,
                                                       const UnitExpr& b) {
  std::map<std::string, std::string> chosen;
  auto consider = [&](const UnitExpr& u) {
    for (const auto& [name, e] : u.exponents()) {
      const auto& info = reg.atom(name);
      auto it = chosen.find(info.representative);
      if (it == chosen.end()) {
        chosen.emplace(info.representative, name);
        continue;
      }
      const auto& current = reg.atom(it->second);
      if (info.factor < current.factor || (info.factor == current.factor && name < it->second)) {
        it->second = name;
      }
    }
  };
  consider(a);
  consider(b);
  return chosen;
}

template <class M>
BasicQuantity<M> rewrite(const UnitRegistry& reg, const BasicQuantity<M>& q,
                         const std::map<std::string, std::string>& chosen) {
  UnitExpr unit;
  Rational scale = 1;
  for (const auto& [name, e] : q.unit.exponents()) {
    const auto& info = reg.atom(name);
    const std::string& target = chosen.at(info.representative);
    unit.add(target, e);
    if (target != name) scale *= rpow(info.factor / reg.atom(target).factor, e);
  }
  if (scale == 1) return BasicQuantity<M>{q.magnitude, unit};
  return BasicQuantity<M>{scale_magnitude(q.magnitude, scale), unit};
}

template <class M>
std::pair<BasicQuantity<M>, BasicQuantity<M>> align(const UnitRegistry& reg, const BasicQuantity<M>& a,
                                                    const BasicQuantity<M>& b) {
  auto chosen = common_atoms(reg, a.unit, b.unit);
  return {rewrite(reg, a, chosen), rewrite(reg, b, chosen)};
}

inline std::string unit_name(const UnitExpr& u) { return u.empty() ? "dimensionless" : u.render(); }

}  // namespace detail

/// Expresses q in `target`; units must be commensurable.
template <class M>
BasicQuantity<M> convert(const UnitRegistry& reg, const BasicQuantity<M>& q, const UnitExpr& target) {
  if (!reg.commensurable(q.unit, target)) {
    fail(ErrorCode::DimensionMismatch,
         "cannot convert " + detail::unit_name(q.unit) + " to " + detail::unit_name(target));
  }
  Rational scale = reg.factor(q.unit) / reg.factor(target);
  if (scale == 1) return BasicQuantity<M>{q.magnitude, target};
  return BasicQuantity<M>{scale_magnitude(q.magnitude, scale), target};
}

/// Normalizes same-class atoms inside one unit (m/cm becomes dimensionless).
template <class M>
BasicQuantity<M> simplify_units(const UnitRegistry& reg, const BasicQuantity<M>& q) {
  return detail::rewrite(reg, q, detail::common_atoms(reg, q.unit, {}));
}

template <class M>
void require_commensurable(const UnitRegistry& reg, const BasicQuantity<M>& a, const BasicQuantity<M>& b,
                           const char* verb) {
  if (!reg.commensurable(a.unit, b.unit)) {
    fail(ErrorCode::IncommensurableAddition, std::string("cannot ") + verb + " " +
                                                 detail::unit_name(a.unit) + " and " +
                                                 detail::unit_name(b.unit));
  }
}

template <class M>
BasicQuantity<M> q_add(const UnitRegistry& reg, const BasicQuantity<M>& a, const BasicQuantity<M>& b) {
  require_commensurable(reg, a, b, "add");
  auto [x, y] = detail::align(reg, a, b);
  return BasicQuantity<M>{x.magnitude + y.magnitude, x.unit};
}

template <class M>
BasicQuantity<M> q_sub(const UnitRegistry& reg, const BasicQuantity<M>& a, const BasicQuantity<M>& b) {
  require_commensurable(reg, a, b, "subtract");
  auto [x, y] = detail::align(reg, a, b);
  return BasicQuantity<M>{x.magnitude - y.magnitude, x.unit};
}

template <class M>
BasicQuantity<M> q_mul(const UnitRegistry& reg, const BasicQuantity<M>& a, const BasicQuantity<M>& b) {
  auto [x, y] = detail::align(reg, a, b);
  return BasicQuantity<M>{x.magnitude * y.magnitude, x.unit * y.unit};
}

template <class M>
BasicQuantity<M> q_div(const UnitRegistry& reg, const BasicQuantity<M>& a, const BasicQuantity<M>& b) {
  if (magnitude_is_zero(b.magnitude)) fail(ErrorCode::DivisionByZero, "division by a zero quantity");
  auto [x, y] = detail::align(reg, a, b);
  return BasicQuantity<M>{x.magnitude / y.magnitude, x.unit / y.unit};
}

template <class M>
BasicQuantity<M> q_neg(const BasicQuantity<M>& a) {
  return BasicQuantity<M>{-a.magnitude, a.unit};
}

inline Quantity q_pow(const UnitRegistry& reg, const Quantity& a, int k) {
  Quantity s = simplify_units(reg, a);
  return Quantity{pow_int(s.magnitude, k), s.unit.pow(k)};
}

/// Square root of a numeric quantity: even unit exponents, non-negative
/// rational magnitude.
inline Quantity q_sqrt(const UnitRegistry& reg, const Quantity& a) {
  Quantity s = simplify_units(reg, a);
  if (!s.unit.all_even()) {
    fail(ErrorCode::OddExponent, "square root of " + detail::unit_name(s.unit) + " is not a unit");
  }
  if (!s.magnitude.is_algebraic()) {
    fail(ErrorCode::NestedRadical, "square root of a value involving pi or e");
  }
  if (sign(s.magnitude) < 0) {
    fail(ErrorCode::NegativeRadicand, "square root of negative " + render(s.magnitude));
  }
  if (!s.magnitude.is_rational()) {
    fail(ErrorCode::NestedRadical, "square root of the surd " + render(s.magnitude));
  }
  return Quantity{normalize_sqrt(s.magnitude.as_rational()), s.unit.halved()};
}

inline Dimension dimension_of(const UnitRegistry& reg, const UnitExpr& u) { return reg.dimension_of(u); }

// ------------------------------------------------------- dimensional solver

/// Solves sum_i x_i * basis_i = target over Q.  The unique solution is
/// returned; inconsistent systems raise NoSolution and systems with a
/// positive-dimensional solution space raise Underdetermined.
inline std::vector<Rational> solve_dimensions(const Dimension& target, const std::vector<Dimension>& basis) {
  if (basis.empty()) fail(ErrorCode::NoSolution, "empty basis");
  std::vector<std::string> rows;
  auto collect = [&](const Dimension& d) {
    for (const auto& [k, e] : d.exponents()) {
      if (std::find(rows.begin(), rows.end(), k) == rows.end()) rows.push_back(k);
    }
  };
  collect(target);
  for (const auto& b : basis) collect(b);

  const std::size_t n = basis.size();
  const std::size_t m = rows.size();
  // augmented matrix m x (n+1)
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(n + 1));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r][c] = basis[c].exponent(rows[r]);
    a[r][n] = target.exponent(rows[r]);
  }

  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < m; ++col) {
    std::size_t pivot = row;
    while (pivot < m && a[pivot][col] == 0) ++pivot;
    if (pivot == m) continue;
    std::swap(a[pivot], a[row]);
    Rational lead = a[row][col];
    for (auto& v : a[row]) v /= lead;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == row || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[row][c];
    }
    pivot_cols.push_back(col);
    ++row;
  }
  for (std::size_t r = row; r < m; ++r) {
    if (a[r][n] != 0) fail(ErrorCode::NoSolution, "no combination of the basis has the target dimension");
  }
  if (pivot_cols.size() < n) {
    const auto nullity = static_cast<long>(n - pivot_cols.size());
    throw Error(ErrorCode::Underdetermined, "solution space has dimension " + std::to_string(nullity))
        .with_value(nullity);
  }
  std::vector<Rational> x(n);
  for (std::size_t r = 0; r < pivot_cols.size(); ++r) x[pivot_cols[r]] = a[r][n];
  return x;
}

}  // namespace namedcalc
