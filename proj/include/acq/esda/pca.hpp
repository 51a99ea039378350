#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acq/esda/spearman.hpp"
#include "acq/ingest/blockgroup.hpp"

namespace acq::esda {

struct DeprivationIndex {
  std::vector<std::optional<double>> score;  // missing where any indicator is missing
  std::vector<std::string> indicators;       // indicators kept in the fit
  std::vector<double> loadings;              // unit norm, first loading positive
  double eigenvalue = 0.0;
  double explained_share = 0.0;  // eigenvalue / number of kept indicators
  std::size_t fitted_units = 0;
  std::vector<std::string> warnings;
};

/// First principal component of the standardized indicators (correlation
/// matrix, n - 1 divisor). Constant indicators are dropped with a warning.
/// The first kept indicator fixes the sign. Needs 5 complete units.
DeprivationIndex deprivation_pca(std::span<const NamedColumn> indicators);

/// poverty, unemployment, no_diploma and snap, in that order.
std::vector<NamedColumn> deprivation_indicators(std::span<const ingest::BlockGroup> blockgroups);

}  // namespace acq::esda
