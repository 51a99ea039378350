#include "acq/parcels/proximity.hpp"

#include <algorithm>
#include <cmath>

#include "acq/error.hpp"

namespace acq::parcels {

using ingest::CrimeType;
using ingest::Window;

namespace {

geo::SpatialIndex footprint_index(std::span<const Parcel> parcels) {
  std::vector<geo::SpatialIndex::Item> items;
  items.reserve(parcels.size());
  for (std::size_t i = 0; i < parcels.size(); ++i)
    items.push_back({static_cast<geo::SpatialIndex::Id>(i), parcels[i].geometry});
  return geo::SpatialIndex(std::move(items));
}

std::size_t bin_of(double value, double width) {
  // Values that land on a bin edge up to rounding belong to the upper bin.
  const double b = std::floor(value / width + 1e-9);
  return b <= 0.0 ? 0 : static_cast<std::size_t>(b);
}

void add_to(Histogram& h, double value) {
  const auto b = bin_of(value, h.bin_width);
  if (h.counts.size() <= b) h.counts.resize(b + 1, 0);
  ++h.counts[b];
}

}  // namespace

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::vector<int> qmi_parc(std::span<const geo::Point> centroids, std::span<const Parcel> selected,
                          double radius) {
  std::vector<geo::SpatialIndex::Item> items;
  items.reserve(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i)
    items.push_back({static_cast<geo::SpatialIndex::Id>(i), selected[i].rep_point});
  const geo::SpatialIndex index(std::move(items));
  std::vector<int> out;
  out.reserve(centroids.size());
  for (const auto& c : centroids)
    out.push_back(static_cast<int>(index.within_radius(c, radius).size()));
  return out;
}

CrimeParcelDistances crime_parcel_distances(std::span<const ingest::CrimeRecord> crimes,
                                            std::span<const Parcel> selected,
                                            const ingest::NightWindows& windows,
                                            geo::LinearUnits units, double radius_miles) {
  if (selected.empty()) throw DataError("crime-to-parcel distances need at least one parcel");
  const auto index = footprint_index(selected);
  const double radius = units.from_miles(radius_miles);

  CrimeParcelDistances out;
  out.distance.reserve(crimes.size());
  std::array<std::array<std::vector<double>, 3>, 4> miles;
  for (const auto& rec : crimes) {
    const double d = index.nearest(rec.location).distance;
    out.distance.push_back(d);
    const auto period = ingest::classify_daynight(rec, windows) == ingest::Period::Night
                            ? Window::Night
                            : Window::Day;
    auto& by_window = miles[ingest::index_of(rec.type)];
    by_window[ingest::index_of(Window::All)].push_back(d);
    by_window[ingest::index_of(period)].push_back(d);
  }
  for (auto t : ingest::kCrimeTypes)
    for (auto w : ingest::kWindows) {
      const auto& ds = miles[ingest::index_of(t)][ingest::index_of(w)];
      DistanceSummary s;
      s.type = t;
      s.window = w;
      s.crimes = static_cast<int>(ds.size());
      s.within = static_cast<int>(std::count_if(ds.begin(), ds.end(), [&](double d) { return d <= radius; }));
      if (s.crimes > 0) s.share_within = static_cast<double>(s.within) / s.crimes;
      if (auto m = median(ds)) s.median_miles = units.to_miles(*m);
      out.summaries.push_back(s);
    }
  return out;
}

double coverage_fraction(const geo::PolygonGeom& boundary, std::span<const Parcel> selected,
                         double radius, double grid_step) {
  if (!(grid_step > 0.0)) throw ConfigError("coverage grid step must be positive");
  const geo::Box box = boundary.bounds();
  const auto cols = static_cast<std::size_t>(std::floor((box.max_x - box.min_x) / grid_step));
  const auto rows = static_cast<std::size_t>(std::floor((box.max_y - box.min_y) / grid_step));
  if (cols == 0 || rows == 0) return 0.0;
  const geo::SpatialIndex index = footprint_index(selected);

  std::size_t inside = 0, covered = 0;
  std::vector<char> in_row(cols);
  std::vector<double> xs;
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = box.min_y + (static_cast<double>(r) + 0.5) * grid_step;
    std::fill(in_row.begin(), in_row.end(), 0);
    // Scanline even-odd fill per part; parts are unioned.
    for (const auto& part : boundary.parts()) {
      xs.clear();
      auto crossings = [&](const geo::Ring& ring) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
          const auto a = ring[i], b = ring[i + 1];
          if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
      };
      crossings(part.exterior);
      for (const auto& hole : part.holes) crossings(hole);
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        const double c0 = std::ceil((xs[k] - box.min_x) / grid_step - 0.5);
        const double c1 = std::floor((xs[k + 1] - box.min_x) / grid_step - 0.5);
        for (double c = std::max(c0, 0.0); c <= c1 && c < static_cast<double>(cols); c += 1.0)
          in_row[static_cast<std::size_t>(c)] = 1;
      }
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!in_row[c]) continue;
      ++inside;
      if (index.empty()) continue;
      const geo::Point p{box.min_x + (static_cast<double>(c) + 0.5) * grid_step, y};
      if (index.nearest(p).distance <= radius) ++covered;
    }
  }
  return inside == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(inside);
}

int Histogram::total() const {
  int t = 0;
  for (int c : counts) t += c;
  return t;
}

ParcelHistograms parcel_histograms(std::span<const Parcel> selected, geo::Point cbd,
                                   geo::LinearUnits units, double unit_bin_width,
                                   double distance_bin_miles) {
  if (!(unit_bin_width > 0.0) || !(distance_bin_miles > 0.0))
    throw ConfigError("histogram bin widths must be positive");
  ParcelHistograms out;
  out.distance_miles.bin_width = distance_bin_miles;
  out.units.bin_width = unit_bin_width;
  for (const auto& p : selected) {
    add_to(out.distance_miles, units.to_miles(geo::distance(p.rep_point, cbd)));
    add_to(out.units, p.units);
  }
  return out;
}

}  // namespace acq::parcels
