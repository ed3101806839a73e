#pragma once

// Decision rules: exact sign tests for {0, +1, -1}-valued observables and the
// Euclidean-distance rule for optimized witnesses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "contagion/errors.hpp"
#include "contagion/handelman.hpp"
#include "contagion/simulate.hpp"

namespace contagion {

enum class Alternative { TwoSided, Greater, Less };

inline const char* to_string(Alternative a) {
  switch (a) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
  }
  return "unknown";
}

/// Natural log of P(X >= k) for X ~ Binomial(n, 1/2).
inline double log_upper_tail_half(std::uint64_t k, std::uint64_t n) {
  if (k == 0) return 0.0;
  if (k > n) return -kInf;
  const double log_half_n = -static_cast<double>(n) * std::log(2.0);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  auto term = [&](std::uint64_t j) {
    return lg_n1 - std::lgamma(static_cast<double>(j) + 1.0) -
           std::lgamma(static_cast<double>(n - j) + 1.0) + log_half_n;
  };
  // The largest term is at max(k, n/2); terms past the mode only shrink.
  const double peak = term(std::max(k, n / 2));
  double s = 0.0;
  for (std::uint64_t j = k; j <= n; ++j) {
    const double t = term(j) - peak;
    if (t < -745.0 && j > n / 2) break;
    s += std::exp(t);
  }
  return std::min(0.0, peak + std::log(s));
}

/// log p for an exact sign test of n_plus heads against n_minus tails.
inline double sign_test_log_p(std::uint64_t n_plus, std::uint64_t n_minus,
                              Alternative alt = Alternative::TwoSided) {
  const std::uint64_t n = n_plus + n_minus;
  if (n == 0) return 0.0;
  switch (alt) {
    case Alternative::Greater: return log_upper_tail_half(n_plus, n);
    case Alternative::Less: return log_upper_tail_half(n_minus, n);
    case Alternative::TwoSided: {
      const double one_tail = log_upper_tail_half(std::max(n_plus, n_minus), n);
      return std::min(0.0, std::log(2.0) + one_tail);
    }
  }
  return 0.0;
}

struct TestVerdict {
  std::string test;
  std::string model;
  double statistic = 0.0;
  // sign test
  std::uint64_t n_plus = 0;
  std::uint64_t n_minus = 0;
  double p_value = 1.0;
  double log10_p = 0.0;
  bool degenerate = false;
  std::string alternative;
  // distance rule
  double ratio = 0.0;
  double threshold = 0.0;
  double multiple = 0.0;
  bool reject = false;
};

/// Exact sign test of <c> = 0 for an observable with entries in {0, +1, -1}.
inline TestVerdict binomial_sign_test(const EmpiricalDistribution& emp, std::span<const double> c,
                                      Alternative alt = Alternative::TwoSided, double alpha = 0.01) {
  if (c.size() != emp.counts.size()) throw UsageError("binomial_sign_test: observable size mismatch");
  TestVerdict v;
  v.test = "binomial-sign";
  v.model = "non-causal T=" + std::to_string(emp.T);
  v.alternative = to_string(alt);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 1.0) v.n_plus += emp.counts[i];
    else if (c[i] == -1.0) v.n_minus += emp.counts[i];
    else if (c[i] != 0.0) throw UsageError("binomial_sign_test: observable entries must be 0 or +-1");
  }
  const std::uint64_t M = emp.M();
  v.statistic = M ? (static_cast<double>(v.n_plus) - static_cast<double>(v.n_minus)) / static_cast<double>(M) : 0.0;
  v.degenerate = v.n_plus + v.n_minus == 0;
  const double lp = sign_test_log_p(v.n_plus, v.n_minus, alt);
  v.log10_p = lp / std::log(10.0);
  v.p_value = std::exp(lp);
  v.reject = !v.degenerate && v.p_value < alpha;
  return v;
}

/// Hoeffding tail bound for the mean of a [-1, 1]-valued pre-registered
/// observable: P(|mean| >= t) <= 2 exp(-M t^2 / 2).
inline double hoeffding_log_p(double mean, std::uint64_t M) {
  return std::min(0.0, std::log(2.0) - static_cast<double>(M) * mean * mean / 2.0);
}

/// Scale of the Euclidean distance between an M-sample empirical frequency
/// vector and its source: 1/sqrt(M) (an upper bound on sqrt((1 - sum p^2)/M)).
inline double sampling_threshold(std::uint64_t M, std::size_t outcomes = 0) {
  (void)outcomes;
  if (M == 0) throw UsageError("sampling_threshold: M must be positive");
  return 1.0 / std::sqrt(static_cast<double>(M));
}

/// Mean Euclidean distance between `reference` and M-sample empirical
/// frequencies drawn from it, averaged over `runs` draws.
inline double calibrate_threshold(std::span<const double> reference, std::uint64_t M, int runs,
                                  std::uint64_t seed) {
  if (M == 0 || runs <= 0) throw UsageError("calibrate_threshold: M and runs must be positive");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(reference.size());
  double total = 0.0;
  for (int r = 0; r < runs; ++r) {
    // Sequential conditional binomials give an exact multinomial draw.
    std::uint64_t left = M;
    double mass = 1.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (left == 0 || mass <= 0.0) {
        counts[i] = 0;
        continue;
      }
      const double q = std::clamp(reference[i] / mass, 0.0, 1.0);
      std::binomial_distribution<std::uint64_t> bin(left, q);
      counts[i] = i + 1 == reference.size() ? left : bin(rng);
      left -= counts[i];
      mass -= reference[i];
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      const double e = static_cast<double>(counts[i]) / static_cast<double>(M) - reference[i];
      d2 += e * e;
    }
    total += std::sqrt(d2);
  }
  return total / runs;
}

/// gamma/|c|_2 lower-bounds the distance from the data to every member of the
/// certified class; reject when it exceeds `multiple` sampling thresholds.
inline TestVerdict distance_verdict(const Certificate& cert, std::uint64_t M, double multiple = 3.0) {
  if (multiple <= 0.0) throw UsageError("distance_verdict: multiple must be positive");
  TestVerdict v;
  v.test = "distance";
  v.model = cert.model().describe();
  const double norm = cert.c_norm();
  v.ratio = norm > 0.0 ? cert.gamma / norm : 0.0;
  v.statistic = cert.gamma;
  v.threshold = sampling_threshold(M);
  v.multiple = multiple;
  v.reject = cert.gamma > 0.0 && v.ratio > multiple * v.threshold;
  return v;
}

inline TestVerdict distance_verdict(const Certificate& cert, const EmpiricalDistribution& emp,
                                    double multiple = 3.0) {
  if (cert.c.size() != emp.counts.size()) throw UsageError("distance_verdict: certificate/data size mismatch");
  return distance_verdict(cert, emp.M(), multiple);
}

}  // namespace contagion
