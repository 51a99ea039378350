#include "acq/parcels/selection.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "acq/geo/spatial_index.hpp"

namespace acq::parcels {

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace

Selection select_multiunit(std::span<const Parcel> parcels, const SelectionRules& rules,
                           geo::LinearUnits units) {
  auto listed = [&](const Parcel& p) {
    return std::find(rules.codes.begin(), rules.codes.end(), p.landuse_code) != rules.codes.end();
  };

  std::vector<char> selected(parcels.size(), 0);
  Selection out;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    if (!listed(parcels[i])) continue;
    if (parcels[i].units >= rules.unit_threshold) selected[i] = 1;
    if (parcels[i].units > rules.cluster_min_units) candidates.push_back(i);
  }
  out.by_size = static_cast<std::size_t>(std::count(selected.begin(), selected.end(), 1));

  // Candidates in id order so union-find roots never depend on input order.
  std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return parcels[a].id < parcels[b].id || (parcels[a].id == parcels[b].id && a < b);
  });

  const double gap = units.from_feet(rules.cluster_gap_ft);
  std::vector<geo::SpatialIndex::Item> items;
  items.reserve(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    geo::Box b = parcels[candidates[k]].geometry.bounds();
    items.push_back({static_cast<geo::SpatialIndex::Id>(k),
                     geo::PolygonGeom::rectangle(b.min_x, b.min_y, b.max_x, b.max_y)});
  }
  const geo::SpatialIndex index(std::move(items));

  DisjointSet sets(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& pk = parcels[candidates[k]];
    for (auto other : index.query_box(pk.geometry.bounds().inflated(gap))) {
      const auto m = static_cast<std::size_t>(other);
      if (m <= k) continue;
      if (geo::polygon_distance(pk.geometry, parcels[candidates[m]].geometry) < gap)
        sets.unite(k, m);
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;  // root -> candidate positions
  for (std::size_t k = 0; k < candidates.size(); ++k) groups[sets.find(k)].push_back(k);
  for (const auto& [root, members] : groups) {
    if (members.size() < 2) continue;
    ParcelCluster cluster;
    for (auto k : members) {
      cluster.members.push_back(parcels[candidates[k]].id);
      cluster.total_units += parcels[candidates[k]].units;
    }
    cluster.qualifies = cluster.total_units >= rules.unit_threshold;
    if (cluster.qualifies)
      for (auto k : members)
        if (!selected[candidates[k]]) {
          selected[candidates[k]] = 1;
          ++out.by_cluster;
        }
    out.clusters.push_back(std::move(cluster));
  }
  std::sort(out.clusters.begin(), out.clusters.end(),
            [](const ParcelCluster& a, const ParcelCluster& b) { return a.members < b.members; });

  for (std::size_t i = 0; i < parcels.size(); ++i)
    if (selected[i]) out.selected.push_back(i);
  std::stable_sort(out.selected.begin(), out.selected.end(),
                   [&](std::size_t a, std::size_t b) { return parcels[a].id < parcels[b].id; });
  return out;
}

std::vector<Parcel> selected_parcels(std::span<const Parcel> parcels, const Selection& selection) {
  std::vector<Parcel> out;
  out.reserve(selection.selected.size());
  for (auto i : selection.selected) out.push_back(parcels[i]);
  return out;
}

}  // namespace acq::parcels
