// Upper bound on P(A = 001) over mixtures of Markov chains, with its
// algebraic certificate checked in exact arithmetic.

#include <cstdio>

#include "contagion/contagion.hpp"

using namespace contagion;

int main() {
  const auto problem = sequence_bound_problem(parse_bits("001"));
  const auto cert = find_bound(problem, 3);
  std::printf("bound %.12f from %zu LP columns\n", cert.gamma, cert.lp.cols);
  for (const auto& lt : cert.lambdas) {
    std::printf("  %.12f *", lt.value);
    for (int k : lt.exponents) std::printf(" %d", k);
    std::printf("\n");
  }
  const auto residual = exact_bound_residual(cert);
  std::printf("exact residual is %s\n", residual.is_zero() ? "zero" : residual.to_string().c_str());
  return residual.is_zero() ? 0 : 1;
}
