#include "acq/ingest/blockgroup.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "acq/error.hpp"
#include "acq/geo/geometry_io.hpp"
#include "acq/ingest/csv.hpp"

namespace acq::ingest {

using nlohmann::json;

namespace {

std::optional<double> number_property(const json& props, const std::string& key,
                                      const std::string& id) {
  if (key.empty() || !props.contains(key)) return std::nullopt;
  const auto& v = props.at(key);
  if (v.is_null()) return std::nullopt;
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.empty()) return std::nullopt;
    if (auto d = parse_double(s)) return d;
  }
  throw DataError("block group " + id + ": property '" + key + "' is not numeric");
}

std::string id_property(const json& props, const std::string& key, std::size_t feature) {
  if (!props.contains(key))
    throw DataError("block group feature " + std::to_string(feature) + " has no '" + key + "'");
  const auto& v = props.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError("block group id must be a string or integer");
}

void check_percent(const std::optional<double>& v, const char* name, const std::string& id) {
  if (v && (*v < 0.0 || *v > 100.0))
    throw DataError("block group " + id + ": " + name + " outside [0, 100]");
}

}  // namespace

BlockGroup make_blockgroup(std::string id, geo::PolygonGeom geometry, double pop) {
  const auto c = geo::polygon_centroid(geometry);
  return BlockGroup{std::move(id), std::move(geometry), pop, {}, {}, {}, {}, {}, {}, {}, {}, {}, c};
}

BlockGroupLoad load_blockgroups(const json& fc, const BlockGroupFields& f, geo::LinearUnits units) {
  if (!fc.is_object() || fc.value("type", "") != "FeatureCollection" || !fc.contains("features"))
    throw DataError("block groups must be a GeoJSON FeatureCollection");
  BlockGroupLoad out;
  std::size_t index = 0;
  for (const auto& feature : fc.at("features")) {
    const json props = feature.contains("properties") && feature.at("properties").is_object()
                           ? feature.at("properties")
                           : json::object();
    const std::string id = id_property(props, f.id, index++);
    geo::PolygonGeom geom = [&] {
      try {
        return geo::polygon_from_geojson(feature.at("geometry"));
      } catch (const GeometryError& e) {
        throw GeometryError("block group " + id + ": " + e.what());
      }
    }();
    const auto pop = number_property(props, f.pop, id);
    if (!pop) throw DataError("block group " + id + " has no population");
    if (*pop < 0) throw DataError("block group " + id + " has negative population");
    BlockGroup bg = make_blockgroup(id, std::move(geom), *pop);
    bg.percrent = number_property(props, f.percrent, id);
    bg.percwhite = number_property(props, f.percwhite, id);
    bg.percvac = number_property(props, f.percvac, id);
    bg.popdens = number_property(props, f.popdens, id);
    bg.medy = number_property(props, f.medy, id);
    bg.poverty = number_property(props, f.poverty, id);
    bg.unemployment = number_property(props, f.unemployment, id);
    bg.no_diploma = number_property(props, f.no_diploma, id);
    bg.snap = number_property(props, f.snap, id);
    check_percent(bg.percrent, "percrent", id);
    check_percent(bg.percwhite, "percwhite", id);
    check_percent(bg.percvac, "percvac", id);
    check_percent(bg.poverty, "poverty", id);
    check_percent(bg.unemployment, "unemployment", id);
    check_percent(bg.no_diploma, "no_diploma", id);
    check_percent(bg.snap, "snap", id);
    if (bg.medy && !(*bg.medy > 0.0))
      throw DataError("block group " + id + ": medy must be positive");
    if (!bg.popdens) bg.popdens = bg.pop / units.to_square_miles(bg.geometry.area());
    out.blockgroups.push_back(std::move(bg));
  }
  std::sort(out.blockgroups.begin(), out.blockgroups.end(),
            [](const BlockGroup& a, const BlockGroup& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.blockgroups.size(); ++i)
    if (out.blockgroups[i].id == out.blockgroups[i - 1].id)
      throw DataError("duplicate block group id " + out.blockgroups[i].id);
  for (const auto& bg : out.blockgroups)
    if (bg.pop == 0.0)
      out.warnings.push_back("block group " + bg.id + " has zero population");
  return out;
}

json blockgroups_to_geojson(const std::vector<BlockGroup>& bgs, const BlockGroupFields& f) {
  json features = json::array();
  for (const auto& bg : bgs) {
    json props;
    props[f.id] = bg.id;
    props[f.pop] = bg.pop;
    auto put = [&](const std::string& key, const std::optional<double>& v) {
      props[key] = v ? json(*v) : json(nullptr);
    };
    put(f.percrent, bg.percrent);
    put(f.percwhite, bg.percwhite);
    put(f.percvac, bg.percvac);
    put(f.popdens, bg.popdens);
    put(f.medy, bg.medy);
    put(f.poverty, bg.poverty);
    put(f.unemployment, bg.unemployment);
    put(f.no_diploma, bg.no_diploma);
    put(f.snap, bg.snap);
    features.push_back(
        {{"type", "Feature"}, {"properties", props}, {"geometry", geo::to_geojson(bg.geometry)}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace acq::ingest
