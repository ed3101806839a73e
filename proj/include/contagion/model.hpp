#pragma once

// Model classes for a directed dyad A -> B observed over T binary steps.
//
// Hidden traits are never represented: by convexity it suffices to work with
// a single point-mass choice of the conditional distributions, so every
// outcome probability becomes a polynomial f_AB(x) in the conditional
// parameters x, and the class is the image of the polytope K cut out by the
// affine generators g_i(x) >= 0.
//
// Variable layouts:
//   non-causal  a0 ap am b0 bp bm
//   delta-causal a0 ap am b0 b00 b01 b10 b11
// where a0 = P(A_1 = 0), ap = P(0 -> 1), am = P(1 -> 0) and
// b{b}{a} = P(B_t = 1 | B_{t-1} = b, A_{t-1} = a).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "contagion/errors.hpp"
#include "contagion/polynomial.hpp"

namespace contagion {

using BitSeq = std::vector<std::uint8_t>;

/// Sequence as an integer with the first element as the most significant bit.
inline std::size_t seq_to_index(std::span<const std::uint8_t> s) {
  std::size_t v = 0;
  for (auto bit : s) v = (v << 1) | (bit ? 1u : 0u);
  return v;
}

inline BitSeq index_to_seq(std::size_t v, int length) {
  BitSeq s(static_cast<std::size_t>(length));
  for (int i = length - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 1u);
    v >>= 1;
  }
  return s;
}

inline std::string seq_to_string(std::span<const std::uint8_t> s) {
  std::string r;
  for (auto b : s) r += b ? '1' : '0';
  return r;
}

inline BitSeq parse_bits(std::string_view text) {
  BitSeq s;
  for (char ch : text) {
    if (ch == '0' || ch == '1') {
      s.push_back(static_cast<std::uint8_t>(ch - '0'));
    } else if (ch != ',' && ch != ' ' && ch != '(' && ch != ')') {
      throw UsageError("parse_bits: unexpected character in '" + std::string(text) + "'");
    }
  }
  return s;
}

/// Joint outcome (A_{1:T}, B_{1:T}); the linear index is A's bits followed by B's.
struct OutcomeIndex {
  BitSeq a;
  BitSeq b;

  std::size_t linear() const {
    return (seq_to_index(a) << b.size()) | seq_to_index(b);
  }

  static OutcomeIndex from_linear(std::size_t index, int T) {
    const std::size_t mask = (std::size_t{1} << T) - 1;
    return {index_to_seq(index >> T, T), index_to_seq(index & mask, T)};
  }

  friend bool operator==(const OutcomeIndex&, const OutcomeIndex&) = default;
};

inline std::size_t outcome_count(int T) { return std::size_t{1} << (2 * T); }

struct TransitionCounts {
  int initial = 0;
  std::array<std::array<int, 2>, 2> F{};  // F[i][j] = #{t : Z_{t-1} = i, Z_t = j}

  int total() const { return F[0][0] + F[0][1] + F[1][0] + F[1][1]; }
  friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;
  friend auto operator<=>(const TransitionCounts&, const TransitionCounts&) = default;
};

inline TransitionCounts transition_counts(std::span<const std::uint8_t> seq) {
  if (seq.empty()) throw UsageError("transition_counts: empty sequence");
  TransitionCounts tc;
  tc.initial = seq[0] ? 1 : 0;
  for (std::size_t t = 1; t < seq.size(); ++t) {
    ++tc.F[seq[t - 1] ? 1 : 0][seq[t] ? 1 : 0];
  }
  return tc;
}

struct DeltaInterval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const DeltaInterval&, const DeltaInterval&) = default;
};

class ModelClass {
 public:
  static ModelClass non_causal(int T) {
    check_horizon(T);
    return ModelClass(T, std::nullopt,
                      make_varset({"a0", "ap", "am", "b0", "bp", "bm"}));
  }

  static ModelClass delta_causal(int T, double lo, double hi) {
    check_horizon(T);
    if (!(lo <= hi)) throw UsageError("delta_causal: require delta_lo <= delta_hi");
    if (lo < -1.0 || hi > 1.0) throw UsageError("delta_causal: delta must lie in [-1, 1]");
    return ModelClass(T, DeltaInterval{lo, hi},
                      make_varset({"a0", "ap", "am", "b0", "b00", "b01", "b10", "b11"}));
  }

  int horizon() const noexcept { return T_; }
  bool causal() const noexcept { return delta_.has_value(); }
  const std::optional<DeltaInterval>& delta() const noexcept { return delta_; }
  const VarSetPtr& vars() const noexcept { return vars_; }
  std::size_t outcomes() const { return outcome_count(T_); }

  std::string describe() const {
    if (!delta_) return "non-causal T=" + std::to_string(T_);
    return "delta-causal T=" + std::to_string(T_) + " delta=[" +
           std::to_string(delta_->lo) + "," + std::to_string(delta_->hi) + "]";
  }

  friend bool operator==(const ModelClass& x, const ModelClass& y) {
    return x.T_ == y.T_ && x.delta_ == y.delta_ && *x.vars_ == *y.vars_;
  }

 private:
  ModelClass(int T, std::optional<DeltaInterval> delta, VarSetPtr vars)
      : T_(T), delta_(delta), vars_(std::move(vars)) {}

  static void check_horizon(int T) {
    if (T < 2 || T > 8) throw UsageError("ModelClass: horizon T must be in [2, 8]");
  }

  int T_;
  std::optional<DeltaInterval> delta_;
  VarSetPtr vars_;
};

enum class Side { A, BNonCausal };

/// Markov-chain probability of `seq` given its own parameters, expanded:
/// x0^{1-s1} (1-x0)^{s1} xp^{F01} xm^{F10} (1-xp)^{F00} (1-xm)^{F11}.
template <class Coeff = double>
Polynomial<Coeff> marginal_poly(std::span<const std::uint8_t> seq, const VarSetPtr& vars,
                                Side side) {
  const char prefix = side == Side::A ? 'a' : 'b';
  auto var = [&](const char* suffix) {
    return Polynomial<Coeff>::variable(vars, std::string(1, prefix) + suffix);
  };
  const auto one = Polynomial<Coeff>::constant(vars, Coeff(1));
  const auto tc = transition_counts(seq);
  const auto x0 = var("0");
  Polynomial<Coeff> p = tc.initial ? one - x0 : x0;
  const auto xp = var("p");
  const auto xm = var("m");
  p *= xp.pow(tc.F[0][1]);
  p *= xm.pow(tc.F[1][0]);
  p *= (one - xp).pow(tc.F[0][0]);
  p *= (one - xm).pow(tc.F[1][1]);
  return p;
}

template <class Coeff = double>
Polynomial<Coeff> marginal_poly(std::span<const std::uint8_t> seq, const ModelClass& mc,
                                Side side) {
  if (static_cast<int>(seq.size()) != mc.horizon()) {
    throw UsageError("marginal_poly: sequence length differs from model horizon");
  }
  if (side == Side::BNonCausal && mc.causal()) {
    throw UsageError("marginal_poly: B-side marginal only exists for the non-causal class");
  }
  return marginal_poly<Coeff>(seq, mc.vars(), side);
}

/// f_AB(x): the probability of a joint outcome under one choice of conditionals.
template <class Coeff = double>
Polynomial<Coeff> joint_extreme_poly(const OutcomeIndex& o, const ModelClass& mc) {
  const auto T = static_cast<std::size_t>(mc.horizon());
  if (o.a.size() != T || o.b.size() != T) {
    throw UsageError("joint_extreme_poly: outcome length differs from model horizon");
  }
  const auto& vars = mc.vars();
  Polynomial<Coeff> qa = marginal_poly<Coeff>(o.a, vars, Side::A);
  if (!mc.causal()) return qa * marginal_poly<Coeff>(o.b, vars, Side::BNonCausal);

  const auto one = Polynomial<Coeff>::constant(vars, Coeff(1));
  const auto b0 = Polynomial<Coeff>::variable(vars, "b0");
  Polynomial<Coeff> qb = o.b[0] ? one - b0 : b0;
  for (std::size_t t = 1; t < T; ++t) {
    const std::string name = std::string("b") + char('0' + o.b[t - 1]) + char('0' + o.a[t - 1]);
    const auto beta = Polynomial<Coeff>::variable(vars, name);
    qb *= o.b[t] ? beta : one - beta;
  }
  return qa * qb;
}

/// All 2^{2T} extreme-point polynomials in linear-index order.
template <class Coeff = double>
std::vector<Polynomial<Coeff>> f_vector(const ModelClass& mc) {
  const int T = mc.horizon();
  std::vector<Polynomial<Coeff>> fs;
  fs.reserve(mc.outcomes());
  if (!mc.causal()) {
    const std::size_t n = std::size_t{1} << T;
    std::vector<Polynomial<Coeff>> qa, qb;
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = index_to_seq(i, T);
      qa.push_back(marginal_poly<Coeff>(s, mc.vars(), Side::A));
      qb.push_back(marginal_poly<Coeff>(s, mc.vars(), Side::BNonCausal));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) fs.push_back(qa[i] * qb[j]);
    return fs;
  }
  for (std::size_t k = 0; k < mc.outcomes(); ++k) {
    fs.push_back(joint_extreme_poly<Coeff>(OutcomeIndex::from_linear(k, T), mc));
  }
  return fs;
}

/// Affine generators g_i(x) >= 0 describing K. Box constraints come first
/// (x, 1 - x per variable), then for the delta-causal class, for b in {0,1},
/// b{b}1 - b{b}0 - delta_lo and delta_hi - (b{b}1 - b{b}0).
template <class Coeff = double>
std::vector<Polynomial<Coeff>> build_generators(const ModelClass& mc) {
  const auto& vars = mc.vars();
  std::vector<Polynomial<Coeff>> gens;
  for (std::size_t i = 0; i < vars->arity(); ++i) {
    gens.push_back(Polynomial<Coeff>::variable(vars, i));
    gens.push_back(Polynomial<Coeff>::one_minus(vars, i));
  }
  if (mc.causal()) {
    const auto& d = *mc.delta();
    if (d.lo > d.hi) throw UsageError("build_generators: delta_lo > delta_hi");
    const Coeff lo = CoeffTraits<Coeff>::from_double(d.lo);
    const Coeff hi = CoeffTraits<Coeff>::from_double(d.hi);
    for (const char* b : {"0", "1"}) {
      const auto effect = Polynomial<Coeff>::variable(vars, std::string("b") + b + "1") -
                          Polynomial<Coeff>::variable(vars, std::string("b") + b + "0");
      gens.push_back(effect - Polynomial<Coeff>::constant(vars, lo));
      gens.push_back(Polynomial<Coeff>::constant(vars, hi) - effect);
    }
  }
  return gens;
}

/// Random point of K. Box variables are uniform; for the delta-causal class
/// the treatment effect is drawn first, then the untreated probability
/// uniformly over the range that keeps both probabilities in [0, 1].
inline std::vector<double> sample_in_domain(const ModelClass& mc, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(mc.vars()->arity());
  if (!mc.causal()) {
    for (auto& v : x) v = unit(rng);
    return x;
  }
  const auto d = *mc.delta();
  for (std::size_t i = 0; i < 4; ++i) x[i] = unit(rng);
  for (std::size_t b = 0; b < 2; ++b) {
    const double eff = d.lo + (d.hi - d.lo) * unit(rng);
    const double lo = std::max(0.0, -eff);
    const double hi = std::min(1.0, 1.0 - eff);
    const double base = lo + (hi - lo) * unit(rng);
    x[4 + 2 * b] = base;
    x[5 + 2 * b] = std::clamp(base + eff, 0.0, 1.0);
  }
  return x;
}

/// Outcome probabilities at a parameter point, via the f-vector.
inline std::vector<double> distribution_at(std::span<const Poly> fs,
                                           std::span<const double> point) {
  std::vector<double> p;
  p.reserve(fs.size());
  for (const auto& f : fs) p.push_back(f.evaluate(point));
  return p;
}

}  // namespace contagion
