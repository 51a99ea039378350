#pragma once

#include <string_view>

#include <json.hpp>

#include "acq/geo/geometry.hpp"

namespace acq::geo {

/// GeoJSON Polygon or MultiPolygon -> PolygonGeom. Coordinates are taken as
/// planar projected values. Throws GeometryError on anything else.
PolygonGeom polygon_from_geojson(const nlohmann::json& geometry);

/// GeoJSON Point -> Point.
Point point_from_geojson(const nlohmann::json& geometry);

/// Polygon when single-part, MultiPolygon otherwise.
nlohmann::json to_geojson(const PolygonGeom& g);
nlohmann::json to_geojson(Point p);

/// WKT POLYGON / MULTIPOLYGON (2D only).
PolygonGeom polygon_from_wkt(std::string_view wkt);

}  // namespace acq::geo
