#include "acq/parcels/parcel.hpp"

#include <cmath>
#include <fstream>

#include "acq/error.hpp"
#include "acq/geo/geometry_io.hpp"
#include "acq/ingest/csv.hpp"

namespace acq::parcels {

using nlohmann::json;

Parcel make_parcel(std::string id, geo::PolygonGeom geometry, int landuse_code, int units) {
  if (units < 0) throw DataError("parcel " + id + " has a negative unit count");
  const auto rep = geo::polygon_centroid(geometry);
  return Parcel{std::move(id), std::move(geometry), landuse_code, units, rep};
}

namespace {

std::optional<long long> integer_value(const json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<long long>(d);
    return std::nullopt;
  }
  if (v.is_string()) return ingest::parse_int(v.get<std::string>());
  return std::nullopt;
}

std::string id_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError("parcel id must be a string or integer");
}

}  // namespace

ParcelLoad load_parcels_geojson(const json& fc, const ParcelFields& f) {
  if (!fc.is_object() || fc.value("type", "") != "FeatureCollection" || !fc.contains("features"))
    throw DataError("parcels must be a GeoJSON FeatureCollection");
  ParcelLoad out;
  std::size_t number = 0;
  for (const auto& feature : fc.at("features")) {
    ++number;
    const auto& props = feature.at("properties");
    if (!props.contains(f.id)) {
      out.rejected.push_back({number, "missing id"});
      continue;
    }
    const std::string id = id_value(props.at(f.id));
    const auto code = props.contains(f.landuse_code) ? integer_value(props.at(f.landuse_code))
                                                     : std::nullopt;
    const auto units = props.contains(f.units) ? integer_value(props.at(f.units)) : std::nullopt;
    if (!code || !units || *units < 0) {
      out.rejected.push_back({number, "parcel " + id + ": missing or invalid land use or units"});
      continue;
    }
    try {
      out.parcels.push_back(make_parcel(id, geo::polygon_from_geojson(feature.at("geometry")),
                                        static_cast<int>(*code), static_cast<int>(*units)));
    } catch (const GeometryError& e) {
      out.rejected.push_back({number, "parcel " + id + ": " + e.what()});
    }
  }
  return out;
}

ParcelLoad load_parcels_csv(std::istream& in, const ParcelFields& f) {
  ingest::CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw DataError("parcel CSV is empty");
  const ingest::CsvHeader header(row);
  const auto c_id = header.require(f.id);
  const auto c_code = header.require(f.landuse_code);
  const auto c_units = header.require(f.units);
  const auto c_geom = header.require(f.geometry);
  const auto width = std::max({c_id, c_code, c_units, c_geom}) + 1;
  ParcelLoad out;
  while (reader.next(row)) {
    if (row.size() < width) {
      out.rejected.push_back({reader.line(), "too few fields"});
      continue;
    }
    const auto code = ingest::parse_int(row[c_code]);
    const auto units = ingest::parse_int(row[c_units]);
    if (!code || !units || *units < 0) {
      out.rejected.push_back({reader.line(), "missing or invalid land use or units"});
      continue;
    }
    try {
      out.parcels.push_back(make_parcel(row[c_id], geo::polygon_from_wkt(row[c_geom]),
                                        static_cast<int>(*code), static_cast<int>(*units)));
    } catch (const GeometryError& e) {
      out.rejected.push_back({reader.line(), e.what()});
    }
  }
  return out;
}

ParcelLoad load_parcels(const std::filesystem::path& path, const ParcelFields& f) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parcel file " + path.string());
  if (path.extension() == ".csv") return load_parcels_csv(in, f);
  json fc;
  try {
    fc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("parcel file " + path.string() + ": " + e.what());
  }
  return load_parcels_geojson(fc, f);
}

json parcels_to_geojson(std::span<const Parcel> parcels, const ParcelFields& f) {
  json features = json::array();
  for (const auto& p : parcels) {
    json props;
    props[f.id] = p.id;
    props[f.landuse_code] = p.landuse_code;
    props[f.units] = p.units;
    features.push_back(
        {{"type", "Feature"}, {"properties", props}, {"geometry", geo::to_geojson(p.geometry)}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace acq::parcels
