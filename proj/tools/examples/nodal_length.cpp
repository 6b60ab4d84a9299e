// Expected nodal length of a random boundary-adapted wave, three ways.
#include <cstdio>
#include <cstdlib>

#include "arw/arw.hpp"

int main(int argc, char** argv) {
  const arw::u64 n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 65;
  const auto set = arw::enumerate_lattice_set(n);
  const auto kr = arw::kac_rice_expected_length(set);
  const auto mc = arw::monte_carlo_expected_length(arw::WaveKind::BoundaryAdapted, set, 200, 40.0, 1, 4);
  std::printf("n=%llu N=%zu\n", (unsigned long long)n, set.size());
  std::printf("leading term     %.5f\n", kr.leading);
  std::printf("kac-rice         %.5f (predicted correction %.5f)\n", kr.total, kr.correction_pred);
  std::printf("monte carlo      %.5f +- %.5f over %zu samples\n", mc.mean, mc.stderr_, mc.lengths.size());
}
