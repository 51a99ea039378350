#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace acq::geo {

/// A location in the projected planar CRS shared by every input layer.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned bounding box. A default-constructed box is empty.
struct Box {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  bool empty() const { return min_x > max_x || min_y > max_y; }
  void expand(Point p);
  void expand(const Box& other);
  Box inflated(double margin) const;
  bool intersects(const Box& other) const;
  bool contains(Point p) const;
  /// Euclidean distance from p to the box (0 inside).
  double distance_to(Point p) const;
  Point center() const { return {(min_x + max_x) / 2, (min_y + max_y) / 2}; }
};

/// Closed ring: first vertex equals last.
using Ring = std::vector<Point>;

struct PolygonPart {
  Ring exterior;
  std::vector<Ring> holes;
};

/// Validated (multi)polygon. Immutable once constructed.
///
/// Every ring must be closed, hold at least four vertices (three distinct
/// corners plus the closing repeat), contain only finite coordinates and
/// enclose a nonzero area. Construction throws GeometryError otherwise.
class PolygonGeom {
 public:
  explicit PolygonGeom(std::vector<PolygonPart> parts);
  explicit PolygonGeom(Ring exterior, std::vector<Ring> holes = {});

  /// Axis-aligned rectangle, counter-clockwise.
  static PolygonGeom rectangle(double x0, double y0, double x1, double y1);

  const std::vector<PolygonPart>& parts() const { return parts_; }
  const Box& bounds() const { return bounds_; }
  /// Exterior area minus hole area, summed over parts.
  double area() const { return area_; }

  /// Calls f(a, b) for every boundary segment of every ring.
  template <typename F>
  void for_each_segment(F&& f) const {
    for (const auto& part : parts_) {
      visit_ring(part.exterior, f);
      for (const auto& hole : part.holes) visit_ring(hole, f);
    }
  }

  template <typename F>
  void for_each_vertex(F&& f) const {
    for (const auto& part : parts_) {
      for (std::size_t i = 0; i + 1 < part.exterior.size(); ++i) f(part.exterior[i]);
      for (const auto& hole : part.holes)
        for (std::size_t i = 0; i + 1 < hole.size(); ++i) f(hole[i]);
    }
  }

 private:
  template <typename F>
  static void visit_ring(const Ring& ring, F& f) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) f(ring[i], ring[i + 1]);
  }

  std::vector<PolygonPart> parts_;
  Box bounds_;
  double area_ = 0.0;
};

/// Signed shoelace area; positive for counter-clockwise rings.
double signed_ring_area(const Ring& ring);

double point_segment_distance(Point p, Point a, Point b);
double segment_segment_distance(Point a0, Point a1, Point b0, Point b1);

/// Inside-or-on-boundary test (even-odd rule, holes excluded).
bool point_in_polygon(Point p, const PolygonGeom& g);

/// 0 when p is inside or on the boundary, otherwise the distance to the
/// closest boundary segment.
double point_to_polygon_distance(Point p, const PolygonGeom& g);

/// Distance from p to the nearest boundary segment, regardless of containment.
double point_to_boundary_distance(Point p, const PolygonGeom& g);

/// Area-weighted centroid (holes subtract, parts combine by area).
Point polygon_centroid(const PolygonGeom& g);

/// Minimum distance between the two boundaries; 0 when they meet or cross.
double boundary_distance(const PolygonGeom& a, const PolygonGeom& b);

/// Gap between two footprints: 0 if they overlap or touch, otherwise the
/// boundary-to-boundary distance.
double polygon_distance(const PolygonGeom& a, const PolygonGeom& b);

/// Queen-style contact: the footprints are within tol of each other,
/// so shared edges and single shared corners both count.
bool polygons_touch(const PolygonGeom& a, const PolygonGeom& b, double tol);

}  // namespace acq::geo
