#include "acq/geo/geometry.hpp"

#include <algorithm>

#include "acq/error.hpp"

namespace acq::geo {

void Box::expand(Point p) {
  min_x = std::min(min_x, p.x);
  min_y = std::min(min_y, p.y);
  max_x = std::max(max_x, p.x);
  max_y = std::max(max_y, p.y);
}

void Box::expand(const Box& other) {
  min_x = std::min(min_x, other.min_x);
  min_y = std::min(min_y, other.min_y);
  max_x = std::max(max_x, other.max_x);
  max_y = std::max(max_y, other.max_y);
}

Box Box::inflated(double margin) const {
  return {min_x - margin, min_y - margin, max_x + margin, max_y + margin};
}

bool Box::intersects(const Box& other) const {
  return min_x <= other.max_x && other.min_x <= max_x && min_y <= other.max_y &&
         other.min_y <= max_y;
}

bool Box::contains(Point p) const {
  return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
}

double Box::distance_to(Point p) const {
  const double dx = std::max({min_x - p.x, 0.0, p.x - max_x});
  const double dy = std::max({min_y - p.y, 0.0, p.y - max_y});
  return std::hypot(dx, dy);
}

double signed_ring_area(const Ring& ring) {
  if (ring.size() < 2) return 0.0;
  // Shift to the first vertex to limit cancellation with large projected
  // coordinates.
  const Point o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double x0 = ring[i].x - o.x, y0 = ring[i].y - o.y;
    const double x1 = ring[i + 1].x - o.x, y1 = ring[i + 1].y - o.y;
    twice += x0 * y1 - x1 * y0;
  }
  return twice / 2.0;
}

namespace {

void validate_ring(const Ring& ring, const char* role) {
  auto fail = [&](const std::string& why) {
    throw GeometryError(std::string(role) + " ring " + why);
  };
  if (ring.size() < 4) fail("has fewer than 4 vertices");
  for (const auto& p : ring)
    if (!is_finite(p)) fail("has a non-finite coordinate");
  if (!(ring.front() == ring.back())) fail("is not closed");
  if (signed_ring_area(ring) == 0.0) fail("has zero area");
}

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool within_segment_box(Point p, Point a, Point b) {
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

bool on_segment(Point p, Point a, Point b) {
  return cross(a, b, p) == 0.0 && within_segment_box(p, a, b);
}

int sign(double v) { return (v > 0) - (v < 0); }

bool segments_intersect(Point a0, Point a1, Point b0, Point b1) {
  const int d1 = sign(cross(b0, b1, a0));
  const int d2 = sign(cross(b0, b1, a1));
  const int d3 = sign(cross(a0, a1, b0));
  const int d4 = sign(cross(a0, a1, b1));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && within_segment_box(a0, b0, b1)) return true;
  if (d2 == 0 && within_segment_box(a1, b0, b1)) return true;
  if (d3 == 0 && within_segment_box(b0, a0, a1)) return true;
  if (d4 == 0 && within_segment_box(b1, a0, a1)) return true;
  return false;
}

// 0 = outside, 1 = inside, 2 = on the ring.
int ring_location(Point p, const Ring& ring) {
  bool inside = false;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point a = ring[i], b = ring[i + 1];
    if (on_segment(p, a, b)) return 2;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside ? 1 : 0;
}

bool in_part(Point p, const PolygonPart& part) {
  const int ext = ring_location(p, part.exterior);
  if (ext == 0) return false;
  if (ext == 2) return true;
  for (const auto& hole : part.holes) {
    const int h = ring_location(p, hole);
    if (h == 2) return true;
    if (h == 1) return false;
  }
  return true;
}

Box segment_box(Point a, Point b) {
  Box box;
  box.expand(a);
  box.expand(b);
  return box;
}

struct Segment {
  Point a, b;
  Box box;
};

std::vector<Segment> segments_near(const PolygonGeom& g, const Box& region) {
  std::vector<Segment> out;
  g.for_each_segment([&](Point a, Point b) {
    Box box = segment_box(a, b);
    if (box.intersects(region)) out.push_back({a, b, box});
  });
  return out;
}

}  // namespace

PolygonGeom::PolygonGeom(std::vector<PolygonPart> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw GeometryError("polygon has no parts");
  for (const auto& part : parts_) {
    validate_ring(part.exterior, "exterior");
    for (const auto& hole : part.holes) validate_ring(hole, "interior");
    double part_area = std::abs(signed_ring_area(part.exterior));
    for (const auto& hole : part.holes) part_area -= std::abs(signed_ring_area(hole));
    area_ += part_area;
    for (const auto& p : part.exterior) bounds_.expand(p);
  }
  if (!(area_ > 0.0)) throw GeometryError("polygon has non-positive area");
}

PolygonGeom::PolygonGeom(Ring exterior, std::vector<Ring> holes)
    : PolygonGeom(std::vector<PolygonPart>{PolygonPart{std::move(exterior), std::move(holes)}}) {}

PolygonGeom PolygonGeom::rectangle(double x0, double y0, double x1, double y1) {
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  return PolygonGeom(Ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}});
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, Point{a.x + t * dx, a.y + t * dy});
}

double segment_segment_distance(Point a0, Point a1, Point b0, Point b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

bool point_in_polygon(Point p, const PolygonGeom& g) {
  if (!g.bounds().contains(p)) return false;
  for (const auto& part : g.parts())
    if (in_part(p, part)) return true;
  return false;
}

double point_to_boundary_distance(Point p, const PolygonGeom& g) {
  double best = std::numeric_limits<double>::infinity();
  g.for_each_segment(
      [&](Point a, Point b) { best = std::min(best, point_segment_distance(p, a, b)); });
  return best;
}

double point_to_polygon_distance(Point p, const PolygonGeom& g) {
  if (point_in_polygon(p, g)) return 0.0;
  return point_to_boundary_distance(p, g);
}

Point polygon_centroid(const PolygonGeom& g) {
  const Point o{g.bounds().min_x, g.bounds().min_y};
  double area = 0.0, mx = 0.0, my = 0.0;
  auto accumulate = [&](const Ring& ring, bool hole) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const double x0 = ring[i].x - o.x, y0 = ring[i].y - o.y;
      const double x1 = ring[i + 1].x - o.x, y1 = ring[i + 1].y - o.y;
      const double c = x0 * y1 - x1 * y0;
      a += c;
      cx += (x0 + x1) * c;
      cy += (y0 + y1) * c;
    }
    // Orient so exteriors add and holes subtract regardless of winding.
    const double s = ((a > 0) == !hole) ? 1.0 : -1.0;
    area += s * a / 2.0;
    mx += s * cx / 6.0;
    my += s * cy / 6.0;
  };
  for (const auto& part : g.parts()) {
    accumulate(part.exterior, false);
    for (const auto& hole : part.holes) accumulate(hole, true);
  }
  if (area == 0.0) throw GeometryError("centroid of zero-area polygon");
  return {o.x + mx / area, o.y + my / area};
}

double boundary_distance(const PolygonGeom& a, const PolygonGeom& b) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<Segment> bs = segments_near(b, b.bounds());
  a.for_each_segment([&](Point a0, Point a1) {
    if (best == 0.0) return;
    const Box abox = segment_box(a0, a1);
    for (const auto& s : bs) {
      if (std::isfinite(best) && !abox.inflated(best).intersects(s.box)) continue;
      best = std::min(best, segment_segment_distance(a0, a1, s.a, s.b));
      if (best == 0.0) return;
    }
  });
  return best;
}

double polygon_distance(const PolygonGeom& a, const PolygonGeom& b) {
  if (point_in_polygon(a.parts().front().exterior.front(), b) ||
      point_in_polygon(b.parts().front().exterior.front(), a))
    return 0.0;
  return boundary_distance(a, b);
}

bool polygons_touch(const PolygonGeom& a, const PolygonGeom& b, double tol) {
  if (!a.bounds().inflated(tol).intersects(b.bounds())) return false;
  // Only boundary pieces near the other footprint can be within tol.
  const auto as = segments_near(a, b.bounds().inflated(tol));
  const auto bs = segments_near(b, a.bounds().inflated(tol));
  for (const auto& sa : as) {
    const Box region = sa.box.inflated(tol);
    for (const auto& sb : bs) {
      if (!region.intersects(sb.box)) continue;
      if (segment_segment_distance(sa.a, sa.b, sb.a, sb.b) <= tol) return true;
    }
  }
  return point_in_polygon(a.parts().front().exterior.front(), b) ||
         point_in_polygon(b.parts().front().exterior.front(), a);
}

}  // namespace acq::geo
