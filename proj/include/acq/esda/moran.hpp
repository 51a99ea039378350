#pragma once

#include <cstdint>
#include <span>

#include "acq/weights/contiguity.hpp"

namespace acq::esda {

/// Moran's I with the general n / S0 scaling. Throws NumericalError for a
/// constant x or all-zero weights.
double morans_i(std::span<const double> x, const weights::ContiguityWeights& w);

struct MoranResult {
  double I = 0.0;
  double expected = 0.0;  // -1 / (n - 1)
  double p_perm = 1.0;
  int permutations = 0;
  std::uint64_t seed = 0;
};

/// Total-randomization permutation test, two-sided around E[I]. Replicate r
/// draws from its own stream seeded by (seed, r).
MoranResult morans_permutation(std::span<const double> x, const weights::ContiguityWeights& w,
                               int permutations = 999, std::uint64_t seed = 12345);

}  // namespace acq::esda
