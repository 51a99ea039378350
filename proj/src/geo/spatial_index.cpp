#include "acq/geo/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <tuple>

#include "acq/error.hpp"

namespace acq::geo {

Box bounds_of(const SpatialIndex::Geometry& g) {
  if (const auto* p = std::get_if<Point>(&g)) {
    Box b;
    b.expand(*p);
    return b;
  }
  return std::get<PolygonGeom>(g).bounds();
}

SpatialIndex::SpatialIndex(std::vector<Item> items, std::size_t node_capacity)
    : items_(std::move(items)) {
  if (node_capacity < 2) node_capacity = 2;
  // Canonical slot order makes the tree shape independent of input order.
  std::sort(items_.begin(), items_.end(),
            [](const Item& a, const Item& b) { return a.id < b.id; });
  item_boxes_.reserve(items_.size());
  for (const auto& it : items_) item_boxes_.push_back(bounds_of(it.geometry));
  if (items_.empty()) return;

  // Leaf level: sort-tile-recursive packing of item slots.
  std::vector<std::uint32_t> order(items_.size());
  std::iota(order.begin(), order.end(), 0u);

  auto pack = [&](std::vector<std::uint32_t>& ids, const auto& box_of) {
    const std::size_t n = ids.size();
    const std::size_t groups = (n + node_capacity - 1) / node_capacity;
    const auto slabs = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(groups))));
    const std::size_t per_slab = slabs * node_capacity;
    std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
      return box_of(a).center().x < box_of(b).center().x;
    });
    for (std::size_t s = 0; s < n; s += per_slab) {
      auto end = ids.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + per_slab));
      std::stable_sort(ids.begin() + static_cast<std::ptrdiff_t>(s), end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         return box_of(a).center().y < box_of(b).center().y;
                       });
    }
  };

  pack(order, [&](std::uint32_t s) -> const Box& { return item_boxes_[s]; });
  {
    std::vector<Item> sorted_items;
    std::vector<Box> sorted_boxes;
    sorted_items.reserve(items_.size());
    for (auto s : order) {
      sorted_items.push_back(std::move(items_[s]));
      sorted_boxes.push_back(item_boxes_[s]);
    }
    items_ = std::move(sorted_items);
    item_boxes_ = std::move(sorted_boxes);
  }

  std::vector<std::uint32_t> level;
  for (std::size_t s = 0; s < items_.size(); s += node_capacity) {
    Node node;
    node.leaf = true;
    node.first = static_cast<std::uint32_t>(s);
    node.count = static_cast<std::uint32_t>(std::min(node_capacity, items_.size() - s));
    for (std::size_t k = s; k < s + node.count; ++k) node.box.expand(item_boxes_[k]);
    level.push_back(static_cast<std::uint32_t>(nodes_.size()));
    nodes_.push_back(node);
  }

  while (level.size() > 1) {
    pack(level, [&](std::uint32_t id) -> const Box& { return nodes_[id].box; });
    // Children of one parent must be contiguous in nodes_, so copy them.
    std::vector<std::uint32_t> next;
    for (std::size_t s = 0; s < level.size(); s += node_capacity) {
      const std::size_t count = std::min(node_capacity, level.size() - s);
      Node parent;
      parent.leaf = false;
      parent.first = static_cast<std::uint32_t>(nodes_.size());
      parent.count = static_cast<std::uint32_t>(count);
      for (std::size_t k = 0; k < count; ++k) {
        Node child = nodes_[level[s + k]];
        parent.box.expand(child.box);
        nodes_.push_back(child);
      }
      next.push_back(static_cast<std::uint32_t>(nodes_.size()));
      nodes_.push_back(parent);
    }
    level = std::move(next);
  }
  root_ = level.front();
}

double SpatialIndex::item_distance(std::size_t slot, Point p) const {
  const auto& g = items_[slot].geometry;
  if (const auto* q = std::get_if<Point>(&g)) return distance(p, *q);
  return point_to_polygon_distance(p, std::get<PolygonGeom>(g));
}

template <typename Visit>
void SpatialIndex::search(const Box& region, Visit&& visit) const {
  if (items_.empty()) return;
  std::vector<std::uint32_t> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!node.box.intersects(region)) continue;
    for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
      if (node.leaf) {
        if (item_boxes_[k].intersects(region)) visit(static_cast<std::size_t>(k));
      } else {
        stack.push_back(k);
      }
    }
  }
}

SpatialIndex::Hit SpatialIndex::nearest(Point p) const {
  if (items_.empty()) throw DataError("nearest() on an empty spatial index");
  // Best-first search. At equal keys nodes are expanded before items are
  // settled, and items settle in id order, which yields the smallest-id tie.
  using Entry = std::tuple<double, int, Id, std::uint32_t>;  // key, kind, id, ref
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.emplace(nodes_[root_].box.distance_to(p), 0, 0, root_);
  while (!queue.empty()) {
    const auto [key, kind, id, ref] = queue.top();
    queue.pop();
    if (kind == 2) return {id, key};
    if (kind == 1) {
      queue.emplace(item_distance(ref, p), 2, id, ref);
      continue;
    }
    const Node& node = nodes_[ref];
    for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
      if (node.leaf)
        queue.emplace(item_boxes_[k].distance_to(p), 1, items_[k].id, k);
      else
        queue.emplace(nodes_[k].box.distance_to(p), 0, 0, k);
    }
  }
  throw DataError("nearest() found no item");
}

std::vector<SpatialIndex::Id> SpatialIndex::within_radius(Point p, double radius) const {
  Box region;
  region.expand(p);
  region = region.inflated(radius);
  std::vector<Id> out;
  search(region, [&](std::size_t slot) {
    if (item_distance(slot, p) <= radius) out.push_back(items_[slot].id);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SpatialIndex::Id> SpatialIndex::query_box(const Box& box) const {
  std::vector<Id> out;
  search(box, [&](std::size_t slot) { out.push_back(items_[slot].id); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace acq::geo
