// Witness separating the delayed-influence model from the non-causal class,
// as a function of the Handelman degree.

#include <cstdio>
#include <cstdlib>

#include "contagion/contagion.hpp"

using namespace contagion;

int main(int argc, char** argv) {
  const double delta = argc > 1 ? std::atof(argv[1]) : 0.5;
  const int d_max = argc > 2 ? std::atoi(argv[2]) : 3;
  const auto p = exact_distribution({InfluenceKind::Delayed, delta, 4});
  const auto mc = ModelClass::non_causal(4);
  for (int d = 0; d <= d_max; ++d) {
    const auto cert = find_witness(p, mc, d);
    const auto rep = validate_certificate(cert, p);
    std::printf("d_max=%d gamma=%.10f |c|=%.4f lambdas=%zu valid=%s\n", d, cert.gamma, cert.c_norm(),
                cert.lambdas.size(), rep.valid ? "yes" : "no");
  }
  std::printf("<c1> = %.6f, <c2> = %.6f\n", expectation(canned_c1(), p), expectation(canned_c2(), p));
}
