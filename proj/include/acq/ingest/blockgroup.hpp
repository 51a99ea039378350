#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acq/geo/geometry.hpp"
#include "acq/geo/units.hpp"

namespace acq::ingest {

/// Census block group: geometry plus the socioeconomic attributes used by
/// every statistic. Percentages are on a 0-100 scale.
struct BlockGroup {
  std::string id;
  geo::PolygonGeom geometry;
  double pop = 0.0;
  std::optional<double> percrent;
  std::optional<double> percwhite;
  std::optional<double> percvac;
  std::optional<double> popdens;  // residents per square mile
  std::optional<double> medy;     // median household income, dollars
  std::optional<double> poverty;
  std::optional<double> unemployment;
  std::optional<double> no_diploma;
  std::optional<double> snap;
  geo::Point centroid;
};

/// GeoJSON property names for each attribute.
struct BlockGroupFields {
  std::string id = "id";
  std::string pop = "pop";
  std::string percrent = "percrent";
  std::string percwhite = "percwhite";
  std::string percvac = "percvac";
  std::string popdens = "popdens";
  std::string medy = "medy";
  std::string poverty = "poverty";
  std::string unemployment = "unemployment";
  std::string no_diploma = "no_diploma";
  std::string snap = "snap";
};

struct BlockGroupLoad {
  std::vector<BlockGroup> blockgroups;  // sorted by id
  std::vector<std::string> warnings;
};

/// Reads a FeatureCollection. Attribute values may be numbers, numeric
/// strings or null. popdens is derived from pop and polygon area when the
/// property is absent. Duplicate ids and out-of-range attributes throw DataError.
BlockGroupLoad load_blockgroups(const nlohmann::json& feature_collection,
                                const BlockGroupFields& fields = {},
                                geo::LinearUnits units = {});

/// The inverse of load_blockgroups, for round trips and generated fixtures.
nlohmann::json blockgroups_to_geojson(const std::vector<BlockGroup>& bgs,
                                      const BlockGroupFields& fields = {});

/// Block group with only a population; the centroid is computed here.
BlockGroup make_blockgroup(std::string id, geo::PolygonGeom geometry, double pop);

}  // namespace acq::ingest
