#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acq/esda/gstar.hpp"
#include "acq/esda/spearman.hpp"

namespace acq::esda {

struct VariableProfile {
  std::string name;
  int n = 0;  // non-missing values among the class members
  std::optional<double> mean;
  std::optional<double> sd;  // sample SD, n - 1 divisor
};

struct HotspotProfile {
  HotspotClass cls = HotspotClass::Hot;
  int units = 0;
  bool empty = true;
  std::vector<VariableProfile> variables;
};

/// Mean, SD, min and max over the non-missing values of each column.
struct SummaryStatistics {
  std::string name;
  int n = 0;
  std::optional<double> mean;
  std::optional<double> sd;  // n - 1 divisor
  std::optional<double> min;
  std::optional<double> max;
};

std::vector<SummaryStatistics> summarize(std::span<const NamedColumn> variables);

HotspotProfile hotspot_profile(const GStarResult& gstar, std::span<const NamedColumn> variables,
                               HotspotClass cls = HotspotClass::Hot);

}  // namespace acq::esda
