#include <random>
#include <set>

#include <gtest/gtest.h>

#include "contagion/equality.hpp"
#include "contagion/exchangeability.hpp"

using namespace contagion;

namespace {

using Pair = std::pair<std::size_t, std::size_t>;

std::set<Pair> as_set(const std::vector<Pair>& v) { return {v.begin(), v.end()}; }

bool implied(ModelVariant v, const char* a, const char* b, const char* a2, const char* b2) {
  return implies_equality(v, {parse_bits(a), parse_bits(b)}, {parse_bits(a2), parse_bits(b2)});
}

// Pair symbol sequence s_t = 2 A_t + B_t: same start and same 4x4 transition counts.
bool joint_pe(const OutcomeIndex& x, const OutcomeIndex& y) {
  std::array<int, 16> fx{}, fy{};
  auto sym = [](const OutcomeIndex& o, std::size_t t) { return 2 * o.a[t] + o.b[t]; };
  if (sym(x, 0) != sym(y, 0)) return false;
  for (std::size_t t = 1; t < x.a.size(); ++t) {
    ++fx[4 * sym(x, t - 1) + sym(x, t)];
    ++fy[4 * sym(y, t - 1) + sym(y, t)];
  }
  return fx == fy;
}

std::set<Pair> brute_pairs(int T, auto&& same) {
  std::set<Pair> out;
  for (std::size_t i = 0; i < outcome_count(T); ++i)
    for (std::size_t j = i + 1; j < outcome_count(T); ++j)
      if (same(OutcomeIndex::from_linear(i, T), OutcomeIndex::from_linear(j, T))) out.emplace(i, j);
  return out;
}

}  // namespace

TEST(PartialExchangeability, ExampleSequences) {
  EXPECT_TRUE(partially_exchangeable(parse_bits("0010"), parse_bits("0100")));
  EXPECT_FALSE(partially_exchangeable(parse_bits("0010"), parse_bits("0001")));
  EXPECT_FALSE(partially_exchangeable(parse_bits("0010"), parse_bits("001")));
  const auto classes = pe_classes(4);
  EXPECT_EQ(classes.size(), 14u);
  for (const auto& c : classes) {
    if (c.members.front() == parse_bits("1000")) {
      EXPECT_EQ(c.members.size(), 1u);
    }
  }
  std::size_t total = 0;
  for (const auto& c : classes) total += c.members.size();
  EXPECT_EQ(total, 16u);
}

TEST(PartialExchangeability, ShortSequencesAreSingletons) {
  const auto classes = pe_classes(2);
  EXPECT_EQ(classes.size(), 4u);
  for (const auto& c : classes) EXPECT_EQ(c.members.size(), 1u);
  EXPECT_THROW(pe_classes(0), UsageError);
}

TEST(JointExchangeability, ReferenceTable) {
  // w = 1000, x = 0010, y = 0100, z = 0001
  using V = ModelVariant;
  const std::array<V, 4> all{V::IndependentMixtures, V::Influence, V::JointChain, V::ReverseInfluence};
  const std::array<std::array<bool, 4>, 4> expected{{
      {true, true, true, true},
      {true, false, false, true},
      {true, false, false, false},
      {true, true, false, false},
  }};
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_EQ(implied(all[m], "0010", "0010", "0100", "0100"), expected[0][m]) << describe(all[m]);
    EXPECT_EQ(implied(all[m], "1000", "0010", "1000", "0100"), expected[1][m]) << describe(all[m]);
    EXPECT_EQ(implied(all[m], "0010", "0010", "0010", "0100"), expected[2][m]) << describe(all[m]);
    EXPECT_EQ(implied(all[m], "0001", "0010", "0001", "0100"), expected[3][m]) << describe(all[m]);
  }
}

TEST(JointExchangeability, IndependentMixturesUseTheProductRule) {
  for (int T : {2, 3, 4}) {
    const auto expect = brute_pairs(T, [](const OutcomeIndex& x, const OutcomeIndex& y) {
      return partially_exchangeable(x.a, y.a) && partially_exchangeable(x.b, y.b);
    });
    EXPECT_EQ(as_set(jpe_equalities(ModelVariant::IndependentMixtures, T)), expect) << "T=" << T;
  }
}

TEST(JointExchangeability, JointChainMatchesPairAlphabetExchangeability) {
  for (int T : {2, 3, 4}) {
    EXPECT_EQ(as_set(jpe_equalities(ModelVariant::JointChain, T)), brute_pairs(T, joint_pe)) << "T=" << T;
  }
}

TEST(JointExchangeability, ReverseInfluenceIsTheMirrorImage) {
  const int T = 4;
  std::set<Pair> mirrored;
  for (const auto& [i, j] : jpe_equalities(ModelVariant::Influence, T)) {
    const auto x = OutcomeIndex::from_linear(i, T), y = OutcomeIndex::from_linear(j, T);
    const std::size_t a = OutcomeIndex{x.b, x.a}.linear(), b = OutcomeIndex{y.b, y.a}.linear();
    mirrored.emplace(std::min(a, b), std::max(a, b));
  }
  EXPECT_EQ(as_set(jpe_equalities(ModelVariant::ReverseInfluence, T)), mirrored);
}

TEST(JointExchangeability, VariantsAreNested) {
  const auto v1 = as_set(jpe_equalities(ModelVariant::IndependentMixtures, 4));
  for (auto v : {ModelVariant::Influence, ModelVariant::JointChain, ModelVariant::ReverseInfluence}) {
    for (const auto& p : jpe_equalities(v, 4)) EXPECT_TRUE(v1.count(p)) << describe(v);
  }
}

TEST(JointExchangeability, EqualitiesSpanTheEqualitySpaces) {
  const auto v1 = equality_vectors(jpe_equalities(ModelVariant::IndependentMixtures, 4), 256);
  EXPECT_EQ(v1.size(), 72u);
  EXPECT_EQ(span_dimension(v1, 256), 60u);
  const auto v2 = equality_vectors(jpe_equalities(ModelVariant::Influence, 4), 256);
  EXPECT_EQ(span_dimension(v2, 256), 20u);
  auto joined = shared_causal_equality_space<Rational>(4).basis;
  joined.insert(joined.end(), v2.begin(), v2.end());
  EXPECT_EQ(span_dimension(joined, 256), 28u);
}

TEST(JpeTest, ZeroCountsNeverReject) {
  EmpiricalDistribution emp(4);
  const auto rep = jpe_test(emp, ModelVariant::IndependentMixtures);
  EXPECT_EQ(rep.min_p, 1.0);
  EXPECT_FALSE(rep.reject);
  EXPECT_EQ(rep.pairs.size(), 72u);
}

TEST(JpeTest, NullDataRarelyRejects) {
  const auto mc = ModelClass::non_causal(4);
  const auto fs = f_vector(mc);
  std::mt19937_64 rng(17);
  int rejected = 0;
  const int trials = 100;
  for (int k = 0; k < trials; ++k) {
    const auto p = distribution_at(fs, sample_in_domain(mc, rng));
    rejected += jpe_test(sample_counts(p, 4, 10000, 1000 + k), ModelVariant::IndependentMixtures).reject;
  }
  EXPECT_LE(rejected, trials * 5 / 100);
}

TEST(JpeTest, DelayedInfluenceBreaksIndependentMixtures) {
  const auto p = exact_distribution<double>({InfluenceKind::Delayed, 0.5, 4});
  const auto rep = jpe_test(sample_counts(p, 4, 400000, 3), ModelVariant::IndependentMixtures);
  EXPECT_TRUE(rep.reject);
  EXPECT_LT(rep.min_adjusted_p, 1e-6);
  for (std::size_t k = 1; k < rep.pairs.size(); ++k) EXPECT_LE(rep.pairs[k - 1].p_value, rep.pairs[k].p_value);
  // The influence model itself satisfies its own equalities.
  EXPECT_FALSE(jpe_test(sample_counts(p, 4, 400000, 4), ModelVariant::Influence, 0.001).reject);
}

TEST(Variants, ParseAndDescribe) {
  EXPECT_EQ(variant_from_int(3), ModelVariant::JointChain);
  EXPECT_THROW(variant_from_int(5), UsageError);
  EXPECT_EQ(variant_f_vector(ModelVariant::JointChain, 3).size(), 64u);
}
