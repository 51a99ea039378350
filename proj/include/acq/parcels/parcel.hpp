#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "acq/geo/geometry.hpp"
#include "acq/ingest/crime.hpp"

namespace acq::parcels {

/// Land parcel from the property assessment roll.
struct Parcel {
  std::string id;
  geo::PolygonGeom geometry;
  int landuse_code = 0;
  int units = 0;          // dwelling units
  geo::Point rep_point;   // polygon centroid
};

/// Throws DataError for a negative unit count.
Parcel make_parcel(std::string id, geo::PolygonGeom geometry, int landuse_code, int units);

struct ParcelFields {
  std::string id = "id";
  std::string landuse_code = "landuse_code";
  std::string units = "units";
  /// CSV only: WKT POLYGON/MULTIPOLYGON column.
  std::string geometry = "geometry";
};

struct ParcelLoad {
  std::vector<Parcel> parcels;
  std::vector<ingest::RowIssue> rejected;  // line or feature number + reason
};

ParcelLoad load_parcels_geojson(const nlohmann::json& feature_collection, const ParcelFields& f = {});
ParcelLoad load_parcels_csv(std::istream& in, const ParcelFields& f = {});
/// Dispatches on extension: .csv -> CSV with WKT, anything else -> GeoJSON.
ParcelLoad load_parcels(const std::filesystem::path& path, const ParcelFields& f = {});

nlohmann::json parcels_to_geojson(std::span<const Parcel> parcels, const ParcelFields& f = {});

}  // namespace acq::parcels
