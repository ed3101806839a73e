#include <random>

#include <gtest/gtest.h>

#include "contagion/handelman.hpp"
#include "contagion/simulate.hpp"

using namespace contagion;

namespace {

std::vector<double> delayed(double delta, int T = 4) {
  return exact_distribution<double>({InfluenceKind::Delayed, delta, T});
}

std::vector<double> uniform(int T) { return std::vector<double>(outcome_count(T), 1.0 / outcome_count(T)); }

double expectation_of(const std::vector<double>& c, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * p[i];
  return s;
}

}  // namespace

TEST(HandelmanBasis, SizesFollowStarsAndBars) {
  const auto mc = ModelClass::non_causal(4);
  EXPECT_EQ(enumerate_basis(mc, 0).size(), 1u);
  EXPECT_EQ(enumerate_basis(mc, 1).size(), 13u);
  EXPECT_EQ(enumerate_basis(mc, 2).size(), 91u);
  EXPECT_DOUBLE_EQ(binomial_count(21, 9), 293930.0);
  EXPECT_EQ(enumerate_basis(ModelClass::delta_causal(4, -1, 1), 2).size(), 231u);
}

TEST(HandelmanBasis, ProductsMatchExponents) {
  const auto basis = enumerate_basis(ModelClass::non_causal(3), 2);
  for (const auto& p : basis.products()) {
    EXPECT_EQ(handelman_product(basis.generators(), p.exponents), p.poly);
  }
}

TEST(HandelmanBasis, BudgetIsEnforced) {
  const auto gens = build_generators(ModelClass::non_causal(4));
  EXPECT_THROW(HandelmanBasis<double>(gens, 6, 1024), ResourceError);
  EXPECT_THROW(HandelmanBasis<double>(gens, -1), UsageError);
  EXPECT_NO_THROW(HandelmanBasis<double>(gens, 1, 1 << 20));
}

TEST(SequenceBound, OneThirdWithExactIdentity) {
  const auto bp = sequence_bound_problem(parse_bits("001"));
  EXPECT_EQ(bp.target.vars()->arity(), 2u);
  const auto cert = find_bound(bp, 3);
  EXPECT_EQ(cert.lp.cols, 36u);
  EXPECT_NEAR(cert.gamma, 1.0 / 3.0, 1e-9);
  EXPECT_LT(bound_residual(cert), 1e-9);
  EXPECT_TRUE(exact_bound_residual(cert).is_zero());
  EXPECT_EQ(rationalize(cert.gamma), Rational(1, 3));
}

TEST(SequenceBound, BoundHoldsPointwise) {
  const auto bp = sequence_bound_problem(parse_bits("001"));
  const auto cert = find_bound(bp, 3);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const std::vector<double> x{u(rng), u(rng)};
    EXPECT_LE(bp.target.evaluate(x), cert.gamma + 1e-12);
  }
}

TEST(Witness, UniformDataHasNoSeparation) {
  for (const auto& mc : {ModelClass::non_causal(3), ModelClass::delta_causal(3, -0.5, 0.5)}) {
    const auto cert = find_witness(uniform(3), mc, 2);
    EXPECT_NEAR(cert.gamma, 0.0, 1e-9) << mc.describe();
  }
}

TEST(Witness, DegreeZeroDirectionIsConstantOnTheModel) {
  const auto mc = ModelClass::non_causal(4);
  const auto p = delayed(0.5);
  const auto cert = find_witness(p, mc, 0);
  ASSERT_GT(cert.gamma, 0.0);
  const auto fs = f_vector(mc);
  std::mt19937_64 rng(2);
  const double first = expectation_of(cert.c, distribution_at(fs, sample_in_domain(mc, rng)));
  for (int k = 0; k < 200; ++k) {
    const double v = expectation_of(cert.c, distribution_at(fs, sample_in_domain(mc, rng)));
    EXPECT_NEAR(v, first, 1e-9);
  }
}

TEST(Witness, InfluenceSeparatesAtDegreeFour) {
  const auto p = delayed(0.5);
  const auto cert = find_witness(p, ModelClass::non_causal(4), 4);
  EXPECT_NEAR(cert.gamma, 0.21875, 1e-7);
  const auto rep = validate_certificate(cert, p);
  EXPECT_TRUE(rep.valid);
  EXPECT_GT(rep.min_slack, -1e-8);
}

TEST(Witness, GammaIsMonotoneInDegree) {
  const auto p = delayed(0.3, 3);
  const auto mc = ModelClass::non_causal(3);
  double last = -1.0;
  for (int d = 0; d <= 4; ++d) {
    const double g = find_witness(p, mc, d).gamma;
    EXPECT_GE(g, last - 1e-9) << "d=" << d;
    last = g;
  }
}

TEST(Witness, CausalClassWithWideIntervalAcceptsInfluence) {
  const auto p = delayed(0.5, 3);
  const auto cert = find_witness(p, ModelClass::delta_causal(3, 0.0, 1.0), 2);
  EXPECT_NEAR(cert.gamma, 0.0, 1e-8);
}

TEST(Validation, TamperingIsDetected) {
  const auto p = delayed(0.5);
  auto cert = find_witness(p, ModelClass::non_causal(4), 1);
  ASSERT_GT(cert.gamma, 0.0);
  ASSERT_TRUE(validate_certificate(cert, p).valid);

  auto bumped = cert;
  bumped.gamma += 0.05;
  EXPECT_FALSE(validate_certificate(bumped, p).valid);

  auto flipped = cert;
  ASSERT_FALSE(flipped.lambdas.empty());
  flipped.lambdas.front().value = -1.0;
  const auto rep = validate_certificate(flipped, p);
  EXPECT_FALSE(rep.valid);
  EXPECT_FALSE(rep.signs_ok);

  auto shifted = cert;
  shifted.c[7] += 0.25;
  EXPECT_FALSE(validate_certificate(shifted, p).valid);
}

TEST(Validation, SizeMismatchIsAUsageError) {
  const auto p = delayed(0.5, 3);
  const auto cert = find_witness(p, ModelClass::non_causal(3), 1);
  EXPECT_THROW(validate_certificate(cert, delayed(0.5, 4)), UsageError);
}

TEST(Witness, RejectsInvalidDistribution) {
  auto p = uniform(3);
  p[0] += 0.5;
  EXPECT_THROW(find_witness(p, ModelClass::non_causal(3), 1), UsageError);
}
