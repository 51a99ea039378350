#pragma once

#include <span>
#include <string>
#include <vector>

#include "acq/weights/contiguity.hpp"

namespace acq::esda {

enum class HotspotClass { Hot, Cold, NotSignificant };

const char* to_string(HotspotClass c);

struct GStarResult {
  std::vector<double> z;  // NaN where the variance term vanishes
  std::vector<HotspotClass> cls;
  double threshold = 1.96;
  std::vector<std::string> warnings;
};

/// Standardized Getis-Ord G*_i for every unit. The weights are used as
/// given; the usual form is binary with w_ii = 1 (see weights::with_self).
/// s_x is the population standard deviation of x.
GStarResult getis_ord_gstar(std::span<const double> x, const weights::ContiguityWeights& w,
                            double threshold = 1.96);

}  // namespace acq::esda
