#pragma once

// Sparse multivariate polynomials over a fixed, ordered variable set.
//
// Coefficients are either `double` (used by the large LP pipeline) or the
// exact `Rational` (GMP mpq) used for small certificates and null-space
// computations. Every arithmetic result is returned in canonical form: no
// stored zero coefficients, terms kept in graded lexicographic order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <gmpxx.h>

#include "contagion/errors.hpp"

namespace contagion {

using Rational = mpq_class;

inline constexpr std::size_t kMaxArity = 24;

class VarSet {
 public:
  explicit VarSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() > kMaxArity) {
      throw UsageError("VarSet: at most " + std::to_string(kMaxArity) +
                       " variables supported");
    }
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
      if (n.empty()) throw UsageError("VarSet: empty variable name");
      if (!seen.insert(n).second) {
        throw UsageError("VarSet: duplicate variable '" + n + "'");
      }
    }
  }

  std::size_t arity() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  bool operator==(const VarSet&) const = default;

 private:
  std::vector<std::string> names_;
};

using VarSetPtr = std::shared_ptr<const VarSet>;

inline VarSetPtr make_varset(std::vector<std::string> names) {
  return std::make_shared<const VarSet>(std::move(names));
}

inline bool same_vars(const VarSetPtr& a, const VarSetPtr& b) {
  return a == b || (a && b && *a == *b);
}

/// Exponent vector indexed by VarSet position. Ordered graded-lex: total
/// degree first, then lexicographically on the exponents.
class Monomial {
 public:
  Monomial() = default;

  static Monomial variable(std::size_t index, unsigned power = 1) {
    Monomial m;
    m.set(index, power);
    return m;
  }

  static Monomial from_exponents(std::span<const int> exps) {
    if (exps.size() > kMaxArity) throw UsageError("Monomial: arity too large");
    Monomial m;
    for (std::size_t i = 0; i < exps.size(); ++i) {
      if (exps[i] < 0) throw UsageError("Monomial: negative exponent");
      m.set(i, static_cast<unsigned>(exps[i]));
    }
    return m;
  }

  unsigned operator[](std::size_t i) const { return exps_[i]; }
  unsigned degree() const noexcept { return degree_; }

  void set(std::size_t i, unsigned power) {
    if (i >= kMaxArity) throw UsageError("Monomial: variable index out of range");
    if (power > 255) throw UsageError("Monomial: exponent above 255");
    degree_ = static_cast<std::uint16_t>(degree_ - exps_[i] + power);
    exps_[i] = static_cast<std::uint8_t>(power);
  }

  std::vector<int> exponents(std::size_t arity) const {
    return {exps_.begin(), exps_.begin() + static_cast<std::ptrdiff_t>(arity)};
  }

  Monomial operator*(const Monomial& o) const {
    Monomial r;
    for (std::size_t i = 0; i < kMaxArity; ++i) {
      unsigned e = unsigned{exps_[i]} + o.exps_[i];
      if (e > 255) throw UsageError("Monomial: exponent overflow");
      r.exps_[i] = static_cast<std::uint8_t>(e);
    }
    r.degree_ = static_cast<std::uint16_t>(degree_ + o.degree_);
    return r;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.exps_ == b.exps_;
  }
  friend bool operator<(const Monomial& a, const Monomial& b) {
    if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
    return a.exps_ < b.exps_;
  }

  std::string to_string(const VarSet& vars) const {
    if (degree_ == 0) return "1";
    std::string s;
    for (std::size_t i = 0; i < vars.arity(); ++i) {
      if (exps_[i] == 0) continue;
      if (!s.empty()) s += "*";
      s += vars.name(i);
      if (exps_[i] > 1) s += "^" + std::to_string(exps_[i]);
    }
    return s;
  }

 private:
  std::array<std::uint8_t, kMaxArity> exps_{};
  std::uint16_t degree_ = 0;
};

template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<double> {
  static constexpr bool exact = false;
  /// Coefficients at or below this fraction of the largest magnitude are dropped.
  static constexpr double drop_tolerance = 1e-13;
  static double magnitude(double c) { return std::fabs(c); }
  static double to_double(double c) { return c; }
  static double from_double(double c) { return c; }
  static std::string to_string(double c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", c);
    return buf;
  }
};

template <>
struct CoeffTraits<Rational> {
  static constexpr bool exact = true;
  static double magnitude(const Rational& c) { return std::fabs(c.get_d()); }
  static double to_double(const Rational& c) { return c.get_d(); }
  static Rational from_double(double c) { return Rational(c); }
  static std::string to_string(const Rational& c) { return c.get_str(); }
};

template <class Coeff>
class Polynomial {
 public:
  using Traits = CoeffTraits<Coeff>;
  using Terms = std::map<Monomial, Coeff>;

  explicit Polynomial(VarSetPtr vars) : vars_(std::move(vars)) {
    if (!vars_) throw UsageError("Polynomial: null VarSet");
  }

  Polynomial(VarSetPtr vars, Terms terms) : Polynomial(std::move(vars)) {
    terms_ = std::move(terms);
    canonicalize();
  }

  static Polynomial constant(VarSetPtr vars, const Coeff& value) {
    Polynomial p(std::move(vars));
    p.terms_.emplace(Monomial{}, value);
    p.canonicalize();
    return p;
  }

  static Polynomial variable(VarSetPtr vars, std::size_t index) {
    if (index >= vars->arity()) throw UsageError("Polynomial: variable index out of range");
    Polynomial p(std::move(vars));
    p.terms_.emplace(Monomial::variable(index), Coeff(1));
    return p;
  }

  static Polynomial variable(VarSetPtr vars, std::string_view name) {
    auto idx = vars->index_of(name);
    if (!idx) throw UsageError("Polynomial: unknown variable '" + std::string(name) + "'");
    return variable(std::move(vars), *idx);
  }

  /// `value - x_i`, the upper-box generator shape.
  static Polynomial one_minus(VarSetPtr vars, std::size_t index) {
    return constant(vars, Coeff(1)) - variable(vars, index);
  }

  const VarSetPtr& vars() const noexcept { return vars_; }
  const Terms& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  unsigned degree() const {
    return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
  }

  Coeff coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  Coeff constant_term() const { return coefficient(Monomial{}); }

  Polynomial& operator+=(const Polynomial& o) {
    check_vars(o);
    for (const auto& [m, c] : o.terms_) terms_[m] += c;
    canonicalize();
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_vars(o);
    for (const auto& [m, c] : o.terms_) terms_[m] -= c;
    canonicalize();
    return *this;
  }

  Polynomial& operator*=(const Coeff& s) {
    for (auto& [m, c] : terms_) c *= s;
    canonicalize();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Coeff& s) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= Coeff(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_vars(b);
    Polynomial r(a.vars_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        r.terms_[ma * mb] += ca * cb;
      }
    }
    r.canonicalize();
    return r;
  }

  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  Polynomial pow(unsigned k) const {
    Polynomial r = constant(vars_, Coeff(1));
    for (unsigned i = 0; i < k; ++i) r *= *this;
    return r;
  }

  Coeff evaluate(std::span<const Coeff> point) const {
    if (point.size() != vars_->arity()) {
      throw UsageError("Polynomial::evaluate: point has wrong dimension");
    }
    Coeff sum(0);
    for (const auto& [m, c] : terms_) {
      Coeff t = c;
      for (std::size_t i = 0; i < point.size(); ++i) {
        for (unsigned e = 0; e < m[i]; ++e) t *= point[i];
      }
      sum += t;
    }
    return sum;
  }

  Coeff operator()(std::span<const Coeff> point) const { return evaluate(point); }

  /// Largest coefficient magnitude; 0 for the zero polynomial.
  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, Traits::magnitude(c));
    return m;
  }

  Polynomial canonical() const {
    Polynomial p = *this;
    p.canonicalize();
    return p;
  }

  /// Same polynomial re-expressed over another VarSet; variables are matched
  /// by name. Throws if a used variable is missing from the target.
  Polynomial rebase(VarSetPtr target) const {
    Polynomial r(target);
    for (const auto& [m, c] : terms_) {
      Monomial n;
      for (std::size_t i = 0; i < vars_->arity(); ++i) {
        if (m[i] == 0) continue;
        auto j = target->index_of(vars_->name(i));
        if (!j) throw UsageError("rebase: variable '" + vars_->name(i) + "' not in target");
        n.set(*j, m[i]);
      }
      r.terms_[n] += c;
    }
    r.canonicalize();
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += Traits::to_string(c);
      if (m.degree() > 0) s += "*" + m.to_string(*vars_);
    }
    return s;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return same_vars(a.vars_, b.vars_) && a.terms_ == b.terms_;
  }

 private:
  void check_vars(const Polynomial& o) const {
    if (!same_vars(vars_, o.vars_)) {
      throw UsageError("Polynomial: operands use different variable sets");
    }
  }

  void canonicalize() {
    if constexpr (Traits::exact) {
      std::erase_if(terms_, [](const auto& kv) { return kv.second == 0; });
    } else {
      const double cut = Traits::drop_tolerance * max_abs_coefficient();
      std::erase_if(terms_, [cut](const auto& kv) {
        return kv.second == 0.0 || std::fabs(kv.second) <= cut;
      });
    }
  }

  VarSetPtr vars_;
  Terms terms_;
};

using Poly = Polynomial<double>;
using ExactPoly = Polynomial<Rational>;

template <class To, class From>
Polynomial<To> convert(const Polynomial<From>& p) {
  typename Polynomial<To>::Terms terms;
  for (const auto& [m, c] : p.terms()) {
    if constexpr (std::is_same_v<To, From>) {
      terms.emplace(m, c);
    } else if constexpr (std::is_same_v<To, double>) {
      terms.emplace(m, CoeffTraits<From>::to_double(c));
    } else {
      terms.emplace(m, CoeffTraits<To>::from_double(CoeffTraits<From>::to_double(c)));
    }
  }
  return Polynomial<To>(p.vars(), std::move(terms));
}

/// Best rational approximation with denominator at most `max_den`
/// (continued fractions). Used to lift float LP solutions to exact form.
inline Rational rationalize(double x, long max_den = 1'000'000) {
  if (!std::isfinite(x)) throw UsageError("rationalize: non-finite value");
  const bool neg = x < 0;
  double v = std::fabs(x);
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(v);
    if (a > 1e15) break;
    const long ai = static_cast<long>(a);
    const long h2 = ai * h1 + h0;
    const long k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    const double frac = v - a;
    if (frac < 1e-15) break;
    v = 1.0 / frac;
  }
  Rational r(h1, k1);
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

}  // namespace contagion
