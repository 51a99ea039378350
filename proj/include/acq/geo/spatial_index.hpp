#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "acq/geo/geometry.hpp"

namespace acq::geo {

/// Bulk-loaded (sort-tile-recursive) R-tree over points and polygons.
///
/// Distances to polygon items are point_to_polygon_distance, so a point
/// inside a polygon is at distance 0 from it. Results never depend on the
/// order items were supplied in.
class SpatialIndex {
 public:
  using Id = std::int64_t;
  using Geometry = std::variant<Point, PolygonGeom>;

  struct Item {
    Id id;
    Geometry geometry;
  };

  struct Hit {
    Id id;
    double distance;
  };

  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<Item> items, std::size_t node_capacity = 16);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  /// Globally closest item; ties go to the smallest id. Throws on an empty index.
  Hit nearest(Point p) const;

  /// Ids of all items at distance <= radius, ascending.
  std::vector<Id> within_radius(Point p, double radius) const;

  /// Ids of all items whose bounding box intersects `box`, ascending.
  std::vector<Id> query_box(const Box& box) const;

 private:
  struct Node {
    Box box;
    std::uint32_t first = 0;  // child node index, or item slot for leaves
    std::uint32_t count = 0;
    bool leaf = true;
  };

  double item_distance(std::size_t slot, Point p) const;
  template <typename Visit>
  void search(const Box& region, Visit&& visit) const;

  std::vector<Item> items_;
  std::vector<Box> item_boxes_;
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

Box bounds_of(const SpatialIndex::Geometry& g);

}  // namespace acq::geo
