#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "contagion/equality.hpp"
#include "contagion/handelman.hpp"
#include "contagion/simulate.hpp"
#include "contagion/stats.hpp"

using namespace contagion;

namespace {

// Direct log-sum-exp over the binomial upper tail in long double.
long double direct_log_tail(std::uint64_t k, std::uint64_t n) {
  std::vector<long double> terms;
  long double peak = -INFINITY;
  for (std::uint64_t j = k; j <= n; ++j) {
    const long double t = std::lgamma((long double)n + 1) - std::lgamma((long double)j + 1) -
                          std::lgamma((long double)(n - j) + 1) - (long double)n * std::log(2.0L);
    terms.push_back(t);
    peak = std::max(peak, t);
  }
  long double s = 0;
  for (auto t : terms) s += std::exp(t - peak);
  return peak + std::log(s);
}

EmpiricalDistribution counts_for(const Observable& c, std::uint64_t plus, std::uint64_t minus) {
  EmpiricalDistribution emp(4);
  for (std::size_t k = 0; k < c.values.size(); ++k) {
    if (c.values[k] == 1.0 && plus) {
      emp.counts[k] = plus;
      plus = 0;
    } else if (c.values[k] == -1.0 && minus) {
      emp.counts[k] = minus;
      minus = 0;
    }
  }
  emp.counts[0] += 1000;  // c1 is zero on 00000000
  return emp;
}

}  // namespace

TEST(SignTest, SmallCasesAreExact) {
  EXPECT_NEAR(std::exp(sign_test_log_p(9, 1)), 22.0 / 1024.0, 1e-15);
  EXPECT_NEAR(std::exp(sign_test_log_p(9, 1, Alternative::Greater)), 11.0 / 1024.0, 1e-15);
  EXPECT_NEAR(std::exp(sign_test_log_p(9, 1, Alternative::Less)), 1023.0 / 1024.0, 1e-13);
  EXPECT_NEAR(std::exp(sign_test_log_p(3, 3)), 1.0, 1e-15);
  EXPECT_EQ(sign_test_log_p(0, 0), 0.0);
}

TEST(SignTest, MatchesDirectSummation) {
  for (auto [plus, minus] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{
           {1499, 1493}, {20006, 19871}, {600, 400}, {5200, 4800}, {30, 70}}) {
    const auto n = plus + minus;
    const long double expect = std::min(0.0L, std::log(2.0L) + direct_log_tail(std::max(plus, minus), n));
    EXPECT_NEAR(sign_test_log_p(plus, minus), (double)expect, 1e-9) << plus << "," << minus;
  }
}

TEST(SignTest, ExtremeImbalanceStaysFinite) {
  const double lp = sign_test_log_p(62400, 37600);
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_NEAR(lp, (double)(std::log(2.0L) + direct_log_tail(62400, 100000)), 1e-6);
  // Hoeffding: P(X - n/2 >= t) <= exp(-2 t^2 / n).
  EXPECT_LT(lp, std::log(2.0) - 2.0 * 12400.0 * 12400.0 / 100000.0);
  EXPECT_LT(lp / std::log(10.0), -1300.0);
}

TEST(SignTest, ObservableVerdicts) {
  const auto c1 = canned_c1();
  const auto balanced = binomial_sign_test(counts_for(c1, 500, 500), c1.values);
  EXPECT_EQ(balanced.p_value, 1.0);
  EXPECT_FALSE(balanced.reject);
  const auto skewed = binomial_sign_test(counts_for(c1, 700, 300), c1.values);
  EXPECT_TRUE(skewed.reject);
  EXPECT_EQ(skewed.n_plus, 700u);
  EXPECT_EQ(skewed.n_minus, 300u);
  const auto empty = binomial_sign_test(counts_for(c1, 0, 0), c1.values);
  EXPECT_TRUE(empty.degenerate);
  EXPECT_FALSE(empty.reject);
  std::vector<double> bad(256, 0.5);
  EXPECT_THROW(binomial_sign_test(counts_for(c1, 1, 1), bad), UsageError);
}

TEST(SignTest, NullCalibration) {
  const auto mc = ModelClass::non_causal(4);
  const auto fs = f_vector(mc);
  const auto c1 = canned_c1(), c2 = canned_c2();
  std::mt19937_64 rng(5);
  int rejected = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    const auto emp = sample_counts(distribution_at(fs, sample_in_domain(mc, rng)), 4, 10000, 500 + r);
    rejected += binomial_sign_test(emp, c1.values).reject;
    rejected += binomial_sign_test(emp, c2.values).reject;
  }
  EXPECT_LE(rejected, 2 * runs * 5 / 100);
}

TEST(Hoeffding, BoundIsClampedAndDecreasing) {
  EXPECT_EQ(hoeffding_log_p(0.0, 1000), 0.0);
  EXPECT_LT(hoeffding_log_p(0.1, 10000), hoeffding_log_p(0.05, 10000));
}

TEST(Threshold, InverseRootM) {
  EXPECT_NEAR(sampling_threshold(400000), 0.00158, 5e-6);
  EXPECT_DOUBLE_EQ(sampling_threshold(10000), 0.01);
  EXPECT_THROW(sampling_threshold(0), UsageError);
}

TEST(Threshold, MonteCarloMatchesTheory) {
  const std::vector<double> u(256, 1.0 / 256);
  const std::uint64_t M = 10000;
  const double mc = calibrate_threshold(u, M, 200, 1);
  const double theory = std::sqrt((1.0 - 1.0 / 256) / M);
  EXPECT_NEAR(mc, theory, 0.2 * theory);
  EXPECT_LE(mc, sampling_threshold(M));
}

TEST(Distance, VerdictRule) {
  Certificate cert;
  cert.c.assign(256, 0.0);
  cert.c[0] = 1.0;
  cert.gamma = 0.01;
  EXPECT_TRUE(distance_verdict(cert, 400000).reject);   // 0.01 > 3 * 0.00158
  EXPECT_FALSE(distance_verdict(cert, 10000).reject);   // 0.01 < 3 * 0.01
  EXPECT_TRUE(distance_verdict(cert, 10000, 0.5).reject);
  cert.gamma = 0.0;
  EXPECT_FALSE(distance_verdict(cert, 400000).reject);
  EXPECT_THROW(distance_verdict(cert, 400000, 0.0), UsageError);
  cert.gamma = 0.05;
  cert.c.assign(256, 0.0);
  EXPECT_FALSE(distance_verdict(cert, 400000).reject);
}

TEST(Distance, NullCalibration) {
  const auto mc = ModelClass::non_causal(4);
  const auto fs = f_vector(mc);
  std::mt19937_64 rng(6);
  int rejected = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    const auto emp = sample_counts(distribution_at(fs, sample_in_domain(mc, rng)), 4, 10000, 900 + r);
    rejected += distance_verdict(find_witness(emp.frequencies(), mc, 1), emp).reject;
  }
  EXPECT_LE(rejected, runs * 5 / 100);
}

TEST(Distance, PowerAgainstDelayedInfluence) {
  const auto mc = ModelClass::non_causal(4);
  const auto p = exact_distribution<double>({InfluenceKind::Delayed, 0.5, 4});
  int rejected = 0;
  const int runs = 100;
  for (int r = 0; r < runs; ++r) {
    const auto emp = sample_counts(p, 4, 400000, 40 + r);
    rejected += distance_verdict(find_witness(emp.frequencies(), mc, 0), emp).reject;
  }
  EXPECT_GE(rejected, runs * 99 / 100);
}
