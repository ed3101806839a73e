#include <random>

#include <gtest/gtest.h>

#include "contagion/polynomial.hpp"

using namespace contagion;

namespace {

VarSetPtr xyz() { return make_varset({"x", "y", "z"}); }

Poly random_poly(const VarSetPtr& v, std::mt19937_64& rng, int terms, int max_exp) {
  std::uniform_int_distribution<int> e(0, max_exp);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  Poly::Terms t;
  for (int i = 0; i < terms; ++i) {
    std::vector<int> ex(v->arity());
    for (auto& k : ex) k = e(rng);
    t[Monomial::from_exponents(ex)] += c(rng);
  }
  return Poly(v, t);
}

}  // namespace

TEST(VarSet, RejectsDuplicatesAndFindsNames) {
  EXPECT_THROW(make_varset({"a", "a"}), UsageError);
  const auto v = xyz();
  EXPECT_EQ(v->index_of("y"), 1u);
  EXPECT_FALSE(v->index_of("w").has_value());
}

TEST(Monomial, GradedOrderPutsLowerDegreeFirst) {
  const auto x2 = Monomial::variable(0, 2);
  const auto yz = Monomial::variable(1) * Monomial::variable(2);
  const auto x = Monomial::variable(0);
  EXPECT_LT(Monomial{}, x);
  EXPECT_LT(x, x2);
  EXPECT_EQ(x2.degree(), 2u);
  EXPECT_EQ(yz.degree(), 2u);
  EXPECT_TRUE(x2 < yz || yz < x2);
}

TEST(Monomial, ExponentOverflowIsAnError) {
  EXPECT_THROW(Monomial::variable(0, 200) * Monomial::variable(0, 100), UsageError);
  EXPECT_THROW(Monomial::variable(kMaxArity), UsageError);
}

TEST(Polynomial, OneMinusSquaredExpands) {
  const auto v = xyz();
  const auto p = Poly::one_minus(v, 0).pow(2);
  EXPECT_EQ(p.size(), 3u);
  EXPECT_DOUBLE_EQ(p.coefficient(Monomial{}), 1.0);
  EXPECT_DOUBLE_EQ(p.coefficient(Monomial::variable(0)), -2.0);
  EXPECT_DOUBLE_EQ(p.coefficient(Monomial::variable(0, 2)), 1.0);
}

TEST(Polynomial, CancellationLeavesZero) {
  const auto v = xyz();
  const auto x = Poly::variable(v, "x");
  EXPECT_TRUE((x - x).is_zero());
  const auto e = ExactPoly::variable(v, "x");
  EXPECT_TRUE((e * e - e.pow(2)).is_zero());
}

TEST(Polynomial, MixedVariableSetsAreRejected) {
  const auto a = Poly::variable(xyz(), 0);
  const auto b = Poly::variable(make_varset({"u"}), 0);
  EXPECT_THROW(a + b, UsageError);
}

TEST(Polynomial, RingAxiomsHoldOnRandomInputs) {
  std::mt19937_64 rng(11);
  const auto v = xyz();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_poly(v, rng, 5, 3);
    const auto q = random_poly(v, rng, 5, 3);
    const auto r = random_poly(v, rng, 5, 3);
    const std::vector<double> pt{u(rng), u(rng), u(rng)};
    const double lhs = ((p + q) * r).evaluate(pt);
    const double rhs = (p * r + q * r).evaluate(pt);
    EXPECT_NEAR(lhs, rhs, 1e-9 * (1.0 + std::fabs(lhs)));
    EXPECT_NEAR((p * q).evaluate(pt), p.evaluate(pt) * q.evaluate(pt), 1e-9);
  }
}

TEST(Polynomial, EvaluateMatchesDirectFormula) {
  const auto v = xyz();
  const auto x = Poly::variable(v, "x"), y = Poly::variable(v, "y"), z = Poly::variable(v, "z");
  const auto p = x * y * 3.0 - z.pow(3) + Poly::constant(v, 0.5);
  const std::vector<double> pt{0.2, -1.5, 0.7};
  EXPECT_NEAR(p.evaluate(pt), 3 * 0.2 * -1.5 - 0.343 + 0.5, 1e-15);
  EXPECT_THROW(p.evaluate(std::vector<double>{1.0}), UsageError);
}

TEST(Polynomial, RebaseMatchesByName) {
  const auto v = xyz();
  const auto w = make_varset({"z", "x"});
  const auto p = Poly::variable(v, "x") * Poly::variable(v, "z");
  const auto q = p.rebase(w);
  EXPECT_DOUBLE_EQ(q.evaluate(std::vector<double>{2.0, 3.0}), 6.0);
  EXPECT_THROW(Poly::variable(v, "y").rebase(w), UsageError);
}

TEST(Polynomial, ExactAndFloatAgree) {
  std::mt19937_64 rng(5);
  const auto v = xyz();
  const auto p = random_poly(v, rng, 6, 2);
  const auto e = convert<Rational>(p);
  const auto back = convert<double>(e);
  EXPECT_EQ(back, p);
}

TEST(Rationalize, RecoversSmallFractions) {
  EXPECT_EQ(rationalize(1.0 / 3.0), Rational(1, 3));
  EXPECT_EQ(rationalize(-7.0 / 16.0), Rational(-7, 16));
  EXPECT_EQ(rationalize(0.0), Rational(0));
  EXPECT_EQ(rationalize(0.333333333333), Rational(1, 3));
  EXPECT_THROW(rationalize(std::nan("")), UsageError);
}
