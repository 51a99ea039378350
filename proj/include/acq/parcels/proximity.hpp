#pragma once

#include <optional>
#include <span>
#include <vector>

#include "acq/geo/spatial_index.hpp"
#include "acq/geo/units.hpp"
#include "acq/ingest/crime.hpp"
#include "acq/ingest/rates.hpp"
#include "acq/parcels/parcel.hpp"

namespace acq::parcels {

/// Number of parcels whose rep_point is within `radius` (input units,
/// inclusive) of each centroid.
std::vector<int> qmi_parc(std::span<const geo::Point> centroids, std::span<const Parcel> selected,
                          double radius);

struct DistanceSummary {
  ingest::CrimeType type = ingest::CrimeType::Burglary;
  ingest::Window window = ingest::Window::All;
  int crimes = 0;
  int within = 0;                        // distance <= radius
  std::optional<double> share_within;    // within / crimes
  std::optional<double> median_miles;    // midpoint median
};

struct CrimeParcelDistances {
  std::vector<double> distance;            // per crime, input units
  std::vector<DistanceSummary> summaries;  // type-major, then All/Day/Night

  const DistanceSummary& summary(ingest::CrimeType t, ingest::Window w) const {
    return summaries[ingest::index_of(t) * 3 + ingest::index_of(w)];
  }
};

/// Distance from every crime to the nearest selected parcel footprint (0
/// when inside one), summarised by type and reporting window. Throws
/// DataError when no parcels are selected.
CrimeParcelDistances crime_parcel_distances(std::span<const ingest::CrimeRecord> crimes,
                                            std::span<const Parcel> selected,
                                            const ingest::NightWindows& windows,
                                            geo::LinearUnits units = {},
                                            double radius_miles = 0.25);

/// Share of a regular sample grid inside `boundary` lying within `radius` of
/// a selected parcel. Grid points sit at cell centres of a `grid_step`
/// lattice anchored at the boundary's lower-left bounding corner.
double coverage_fraction(const geo::PolygonGeom& boundary, std::span<const Parcel> selected,
                         double radius, double grid_step);

/// Bin i covers [i * width, (i + 1) * width).
struct Histogram {
  double bin_width = 1.0;
  std::vector<int> counts;

  int total() const;
};

struct ParcelHistograms {
  Histogram distance_miles;  // parcel rep_point to CBD
  Histogram units;
};

ParcelHistograms parcel_histograms(std::span<const Parcel> selected, geo::Point cbd,
                                   geo::LinearUnits units = {}, double unit_bin_width = 10.0,
                                   double distance_bin_miles = 0.5);

/// Midpoint median; nullopt for empty input.
std::optional<double> median(std::vector<double> values);

}  // namespace acq::parcels
