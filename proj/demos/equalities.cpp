// Dimensions of the equality spaces and how much of them the joint
// partial exchangeability rules explain.

#include <cstdio>

#include "contagion/contagion.hpp"

using namespace contagion;

int main() {
  for (int T : {2, 3, 4}) {
    const auto space = equality_space<Rational>(ModelClass::non_causal(T));
    const auto pairs = jpe_equalities(ModelVariant::IndependentMixtures, T);
    const auto jpe_dim = span_dimension(equality_vectors(pairs, outcome_count(T)), outcome_count(T));
    std::printf("T=%d non-causal: null space %zu, JPE equalities %zu spanning %zu\n", T, space.dimension(),
                pairs.size(), jpe_dim);
  }
  const auto shared = shared_causal_equality_space<Rational>(4);
  const auto pairs = jpe_equalities(ModelVariant::Influence, 4);
  std::printf("T=4 delta-causal: shared space %zu, influence-variant equalities span %zu\n", shared.dimension(),
              span_dimension(equality_vectors(pairs, 256), 256));
}
