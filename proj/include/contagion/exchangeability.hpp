#pragma once

// Partial exchangeability (PE) classes and the joint equalities
// P(A, B) = P(A', B') implied by four dyad model variants:
//
//   1  independent mixtures of Markov chains for A and B (the non-causal class)
//   2  B_t depends on (B_{t-1}, A_{t-1}); A is a mixture of Markov chains
//   3  mixture of Markov chains on the paired symbol (A_t, B_t)
//   4  A_t depends on (A_{t-1}, B_{t-1}); B is a mixture of Markov chains
//
// An equality holds for every mixture in a variant iff the two outcomes have
// identical extreme-point polynomials, so classes are found by grouping
// outcomes with equal exact f polynomials.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "contagion/errors.hpp"
#include "contagion/model.hpp"
#include "contagion/polynomial.hpp"
#include "contagion/simulate.hpp"
#include "contagion/stats.hpp"

namespace contagion {

struct PEClass {
  std::uint8_t initial = 0;
  std::array<std::array<int, 2>, 2> F{};
  std::vector<BitSeq> members;
};

/// Partition of {0,1}^T by (initial symbol, transition counts). Classes are
/// ordered by their smallest member, members by binary value.
inline std::vector<PEClass> pe_classes(int T) {
  if (T < 1 || T > 16) throw UsageError("pe_classes: T must be in [1, 16]");
  std::map<std::pair<std::uint8_t, std::array<std::array<int, 2>, 2>>, std::size_t> index;
  std::vector<PEClass> classes;
  for (std::size_t v = 0; v < (std::size_t{1} << T); ++v) {
    auto seq = index_to_seq(v, T);
    const auto tc = transition_counts(seq);
    std::array<std::array<int, 2>, 2> F{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) F[i][j] = tc.F[i][j];
    const auto key = std::make_pair(static_cast<std::uint8_t>(tc.initial), F);
    auto [it, fresh] = index.emplace(key, classes.size());
    if (fresh) classes.push_back({key.first, F, {}});
    classes[it->second].members.push_back(std::move(seq));
  }
  return classes;
}

inline bool partially_exchangeable(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size()) return false;
  const auto a = transition_counts(x);
  const auto b = transition_counts(y);
  if (a.initial != b.initial) return false;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      if (a.F[i][j] != b.F[i][j]) return false;
  return true;
}

enum class ModelVariant { IndependentMixtures = 1, Influence = 2, JointChain = 3, ReverseInfluence = 4 };

inline ModelVariant variant_from_int(int v) {
  if (v < 1 || v > 4) throw UsageError("model variant must be 1, 2, 3 or 4");
  return static_cast<ModelVariant>(v);
}

inline std::string describe(ModelVariant v) {
  switch (v) {
    case ModelVariant::IndependentMixtures: return "1: independent mixtures";
    case ModelVariant::Influence: return "2: A -> B influence";
    case ModelVariant::JointChain: return "3: joint-chain mixture";
    case ModelVariant::ReverseInfluence: return "4: B -> A influence";
  }
  return "unknown";
}

/// Exact extreme-point polynomial for every outcome under a variant.
inline std::vector<ExactPoly> variant_f_vector(ModelVariant variant, int T) {
  switch (variant) {
    case ModelVariant::IndependentMixtures:
      return f_vector<Rational>(ModelClass::non_causal(T));
    case ModelVariant::Influence:
      return f_vector<Rational>(ModelClass::delta_causal(T, -1.0, 1.0));
    case ModelVariant::ReverseInfluence: {
      // Swap roles: f(A, B) under reverse influence is f(B, A) under influence.
      const auto fwd = f_vector<Rational>(ModelClass::delta_causal(T, -1.0, 1.0));
      std::vector<ExactPoly> out;
      out.reserve(fwd.size());
      for (std::size_t k = 0; k < fwd.size(); ++k) {
        const auto o = OutcomeIndex::from_linear(k, T);
        out.push_back(fwd[OutcomeIndex{o.b, o.a}.linear()]);
      }
      return out;
    }
    case ModelVariant::JointChain: {
      // pi_s for the initial pair and q_{s,s'} per pair transition, s = 2 A_t + B_t.
      std::vector<std::string> names;
      for (int s = 0; s < 4; ++s) names.push_back("pi" + std::to_string(s));
      for (int s = 0; s < 4; ++s)
        for (int u = 0; u < 4; ++u) names.push_back("q" + std::to_string(s) + std::to_string(u));
      const auto vars = make_varset(names);
      std::vector<ExactPoly> out;
      out.reserve(outcome_count(T));
      for (std::size_t k = 0; k < outcome_count(T); ++k) {
        const auto o = OutcomeIndex::from_linear(k, T);
        auto sym = [&](int t) { return 2 * o.a[t] + o.b[t]; };
        ExactPoly p = ExactPoly::variable(vars, static_cast<std::size_t>(sym(0)));
        for (int t = 1; t < T; ++t) {
          p = p * ExactPoly::variable(vars, static_cast<std::size_t>(4 + 4 * sym(t - 1) + sym(t)));
        }
        out.push_back(std::move(p));
      }
      return out;
    }
  }
  throw UsageError("unknown model variant");
}

/// Outcome classes with identical probability under every mixture of the
/// variant. Singletons are omitted; classes ordered by smallest member.
inline std::vector<std::vector<std::size_t>> jpe_classes(ModelVariant variant, int T) {
  if (T < 2) throw UsageError("jpe_classes: T must be at least 2");
  const auto fs = variant_f_vector(variant, T);
  std::map<ExactPoly::Terms, std::size_t> index;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    auto [it, fresh] = index.emplace(fs[k].terms(), groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(k);
  }
  std::vector<std::vector<std::size_t>> out;
  for (auto& g : groups)
    if (g.size() > 1) out.push_back(std::move(g));
  return out;
}

/// Every implied equality as a pair of linear outcome indices (first < second).
inline std::vector<std::pair<std::size_t, std::size_t>> jpe_equalities(ModelVariant variant, int T) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& g : jpe_classes(variant, T))
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = i + 1; j < g.size(); ++j) pairs.emplace_back(g[i], g[j]);
  return pairs;
}

inline bool implies_equality(ModelVariant variant, const OutcomeIndex& x, const OutcomeIndex& y) {
  const int T = static_cast<int>(x.a.size());
  const auto fs = variant_f_vector(variant, T);
  return fs[x.linear()] == fs[y.linear()];
}

struct PairTest {
  std::size_t first = 0;
  std::size_t second = 0;
  std::uint64_t count_first = 0;
  std::uint64_t count_second = 0;
  double p_value = 1.0;
};

struct JpeReport {
  ModelVariant variant = ModelVariant::IndependentMixtures;
  int T = 4;
  std::uint64_t M = 0;
  std::vector<PairTest> pairs;  // sorted by p-value, ascending
  double min_p = 1.0;
  double min_adjusted_p = 1.0;  // Bonferroni over all pairs
  double alpha = 0.05;
  bool reject = false;
};

/// Exact two-sided binomial test of each implied equality, conditioning on
/// the pair's total count.
inline JpeReport jpe_test(const EmpiricalDistribution& emp, ModelVariant variant, double alpha = 0.05) {
  JpeReport rep;
  rep.variant = variant;
  rep.T = emp.T;
  rep.M = emp.M();
  rep.alpha = alpha;
  for (const auto& [i, j] : jpe_equalities(variant, emp.T)) {
    PairTest pt{i, j, emp.counts[i], emp.counts[j], 1.0};
    pt.p_value = std::exp(sign_test_log_p(pt.count_first, pt.count_second));
    rep.pairs.push_back(pt);
  }
  std::stable_sort(rep.pairs.begin(), rep.pairs.end(),
                   [](const PairTest& a, const PairTest& b) { return a.p_value < b.p_value; });
  if (!rep.pairs.empty()) rep.min_p = rep.pairs.front().p_value;
  rep.min_adjusted_p = std::min(1.0, rep.min_p * static_cast<double>(rep.pairs.size()));
  rep.reject = rep.min_adjusted_p < alpha;
  return rep;
}

/// Difference vectors e_first - e_second for each equality, for span checks.
inline std::vector<std::vector<Rational>> equality_vectors(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t outcomes) {
  std::vector<std::vector<Rational>> vs;
  vs.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    std::vector<Rational> v(outcomes, Rational(0));
    v[i] = 1;
    v[j] = -1;
    vs.push_back(std::move(v));
  }
  return vs;
}

}  // namespace contagion
