#include "acq/esda/moran.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "acq/error.hpp"

namespace acq::esda {

namespace {

std::vector<double> centred(std::span<const double> x, const weights::ContiguityWeights& w) {
  if (x.size() != w.n()) throw ConfigError("Moran's I input length does not match the weights");
  if (x.size() < 2) throw DataError("Moran's I needs at least two units");
  double mean = 0.0, scale = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("Moran's I input has a non-finite value");
    mean += v;
    scale = std::max(scale, std::abs(v));
  }
  mean /= static_cast<double>(x.size());
  std::vector<double> z(x.size());
  double m2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = x[i] - mean;
    m2 += z[i] * z[i];
  }
  if (!(m2 > static_cast<double>(x.size()) * std::pow(1e-12 * scale, 2)))
    throw NumericalError("Moran's I is undefined for a constant variable");
  if (!(w.s0() > 0.0)) throw NumericalError("Moran's I is undefined for all-zero weights");
  return z;
}

double statistic(std::span<const double> z, const weights::ContiguityWeights& w) {
  double num = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto nb = w.neighbors(i);
    const auto ws = w.row_weights(i);
    double lag = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) lag += ws[k] * z[nb[k]];
    num += z[i] * lag;
    m2 += z[i] * z[i];
  }
  return static_cast<double>(z.size()) / w.s0() * num / m2;
}

}  // namespace

double morans_i(std::span<const double> x, const weights::ContiguityWeights& w) {
  return statistic(centred(x, w), w);
}

MoranResult morans_permutation(std::span<const double> x, const weights::ContiguityWeights& w,
                               int permutations, std::uint64_t seed) {
  if (permutations < 99) throw ConfigError("Moran permutation test needs at least 99 permutations");
  const auto z = centred(x, w);
  MoranResult out;
  out.I = statistic(z, w);
  out.expected = -1.0 / static_cast<double>(x.size() - 1);
  out.permutations = permutations;
  out.seed = seed;

  const double observed = std::abs(out.I - out.expected) * (1.0 - 1e-12);
  int extreme = 0;
  std::vector<double> shuffled(z.size());
  for (int r = 0; r < permutations; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::copy(z.begin(), z.end(), shuffled.begin());
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (std::abs(statistic(shuffled, w) - out.expected) >= observed) ++extreme;
  }
  out.p_perm = static_cast<double>(1 + extreme) / static_cast<double>(permutations + 1);
  return out;
}

}  // namespace acq::esda
