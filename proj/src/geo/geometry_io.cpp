#include "acq/geo/geometry_io.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "acq/error.hpp"

namespace acq::geo {

namespace {

using nlohmann::json;

Point point_from_position(const json& pos) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
    throw GeometryError("position must be an array of at least two numbers");
  return {pos[0].get<double>(), pos[1].get<double>()};
}

Ring ring_from_json(const json& coords) {
  if (!coords.is_array()) throw GeometryError("ring must be an array of positions");
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pos : coords) ring.push_back(point_from_position(pos));
  return ring;
}

PolygonPart part_from_json(const json& rings) {
  if (!rings.is_array() || rings.empty()) throw GeometryError("polygon needs at least one ring");
  PolygonPart part;
  part.exterior = ring_from_json(rings[0]);
  for (std::size_t i = 1; i < rings.size(); ++i) part.holes.push_back(ring_from_json(rings[i]));
  return part;
}

json ring_to_json(const Ring& ring) {
  json out = json::array();
  for (const auto& p : ring) out.push_back({p.x, p.y});
  return out;
}

json part_to_json(const PolygonPart& part) {
  json rings = json::array();
  rings.push_back(ring_to_json(part.exterior));
  for (const auto& hole : part.holes) rings.push_back(ring_to_json(hole));
  return rings;
}

class WktReader {
 public:
  explicit WktReader(std::string_view text) : text_(text) {}

  PolygonGeom read() {
    const std::string tag = keyword();
    std::vector<PolygonPart> parts;
    if (tag == "POLYGON") {
      parts.push_back(polygon());
    } else if (tag == "MULTIPOLYGON") {
      expect('(');
      do parts.push_back(polygon());
      while (accept(','));
      expect(')');
    } else {
      throw GeometryError("unsupported WKT type '" + tag + "'");
    }
    skip_space();
    if (pos_ != text_.size()) throw GeometryError("trailing characters in WKT");
    return PolygonGeom(std::move(parts));
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string keyword() {
    skip_space();
    std::string word;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
      word.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(text_[pos_++]))));
    return word;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw GeometryError(std::string("malformed WKT, expected '") + c + "'");
  }

  double number() {
    skip_space();
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    const auto [end, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
    if (ec != std::errc()) throw GeometryError("malformed WKT coordinate");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  Ring ring() {
    expect('(');
    Ring r;
    do {
      const double x = number();
      const double y = number();
      r.push_back({x, y});
    } while (accept(','));
    expect(')');
    return r;
  }

  PolygonPart polygon() {
    expect('(');
    PolygonPart part;
    part.exterior = ring();
    while (accept(',')) part.holes.push_back(ring());
    expect(')');
    return part;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

PolygonGeom polygon_from_geojson(const json& geometry) {
  if (!geometry.is_object() || !geometry.contains("type"))
    throw GeometryError("geometry object without a type");
  const auto type = geometry.at("type").get<std::string>();
  const auto& coords = geometry.at("coordinates");
  if (type == "Polygon") return PolygonGeom({part_from_json(coords)});
  if (type == "MultiPolygon") {
    std::vector<PolygonPart> parts;
    for (const auto& poly : coords) parts.push_back(part_from_json(poly));
    return PolygonGeom(std::move(parts));
  }
  throw GeometryError("expected Polygon or MultiPolygon, got " + type);
}

Point point_from_geojson(const json& geometry) {
  if (!geometry.is_object() || geometry.value("type", "") != "Point")
    throw GeometryError("expected a Point geometry");
  return point_from_position(geometry.at("coordinates"));
}

json to_geojson(const PolygonGeom& g) {
  if (g.parts().size() == 1)
    return {{"type", "Polygon"}, {"coordinates", part_to_json(g.parts().front())}};
  json polys = json::array();
  for (const auto& part : g.parts()) polys.push_back(part_to_json(part));
  return {{"type", "MultiPolygon"}, {"coordinates", polys}};
}

json to_geojson(Point p) { return {{"type", "Point"}, {"coordinates", {p.x, p.y}}}; }

PolygonGeom polygon_from_wkt(std::string_view wkt) { return WktReader(wkt).read(); }

}  // namespace acq::geo
