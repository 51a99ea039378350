#pragma once

#include <span>
#include <string>
#include <vector>

#include "acq/geo/units.hpp"
#include "acq/parcels/parcel.hpp"

namespace acq::parcels {

/// Large multiunit housing rules.
///
/// A parcel is selected when its land-use code is listed and either
///  (a) it has at least `unit_threshold` units, or
///  (b) it belongs to a qualifying cluster: listed parcels with more than
///      `cluster_min_units` units, chained together by boundary gaps
///      under `cluster_gap_ft`, with at least two members and at least
///      `unit_threshold` units combined.
struct SelectionRules {
  std::vector<int> codes{8830, 8899};
  int unit_threshold = 24;
  int cluster_min_units = 10;
  double cluster_gap_ft = 30.0;
};

struct ParcelCluster {
  std::vector<std::string> members;  // parcel ids, ascending
  int total_units = 0;
  bool qualifies = false;
};

struct Selection {
  /// Indices into the input span, ordered by parcel id.
  std::vector<std::size_t> selected;
  /// Multi-member clusters of cluster candidates, ordered by first member id.
  std::vector<ParcelCluster> clusters;
  std::size_t by_size = 0;     // selected through rule (a)
  std::size_t by_cluster = 0;  // selected only through rule (b)
};

Selection select_multiunit(std::span<const Parcel> parcels, const SelectionRules& rules = {},
                           geo::LinearUnits units = {});

/// Copies of the selected parcels, in selection order.
std::vector<Parcel> selected_parcels(std::span<const Parcel> parcels, const Selection& selection);

}  // namespace acq::parcels
