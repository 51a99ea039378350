#include "acq/ingest/rates.hpp"

#include <cctype>
#include <cmath>

#include "acq/error.hpp"
#include "acq/ingest/csv.hpp"

namespace acq::ingest {

std::string_view to_string(Window w) {
  switch (w) {
    case Window::All: return "All";
    case Window::Day: return "Day";
    case Window::Night: return "Night";
  }
  return "?";
}

std::optional<Window> parse_window(std::string_view s) {
  std::string k;
  for (char c : s) k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (k == "all") return Window::All;
  if (k == "day") return Window::Day;
  if (k == "night") return Window::Night;
  return std::nullopt;
}

BlockGroupLocator::BlockGroupLocator(std::span<const BlockGroup> blockgroups) {
  std::vector<geo::SpatialIndex::Item> items;
  items.reserve(blockgroups.size());
  for (std::size_t i = 0; i < blockgroups.size(); ++i)
    items.push_back({static_cast<geo::SpatialIndex::Id>(i), blockgroups[i].geometry});
  index_ = geo::SpatialIndex(std::move(items));
}

std::optional<std::size_t> BlockGroupLocator::locate(geo::Point p) const {
  const auto hits = index_.within_radius(p, 0.0);
  if (hits.empty()) return std::nullopt;
  return static_cast<std::size_t>(hits.front());
}

BlockGroupRates assign_and_rate(std::span<const CrimeRecord> crimes,
                                std::span<const BlockGroup> blockgroups,
                                std::span<const geo::Point> licenses, geo::Point cbd,
                                const RateOptions& options) {
  const std::size_t n = blockgroups.size();
  BlockGroupRates out;
  out.ids.reserve(n);
  out.excluded.resize(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    out.ids.push_back(blockgroups[i].id);
    if (i > 0 && !(blockgroups[i - 1].id < blockgroups[i].id))
      throw DataError("block groups must be sorted by unique id");
  }
  for (auto& tc : out.by_type) {
    for (auto& c : tc.count) c.assign(n, 0);
    for (auto& r : tc.rate) r.assign(n, std::nullopt);
  }
  out.license_count.assign(n, 0);

  const BlockGroupLocator locator(blockgroups);
  for (const auto& rec : crimes) {
    const auto at = locator.locate(rec.location);
    if (!at) {
      ++out.unassigned[index_of(rec.type)];
      continue;
    }
    auto& tc = out.by_type[index_of(rec.type)];
    ++tc.count[index_of(Window::All)][*at];
    const auto w = classify_daynight(rec, options.windows) == Period::Night ? Window::Night : Window::Day;
    ++tc.count[index_of(w)][*at];
  }
  for (const auto& p : licenses) {
    if (const auto at = locator.locate(p)) ++out.license_count[*at];
    else ++out.unassigned_licenses;
  }

  out.liqdens.assign(n, std::nullopt);
  out.lnmedy.assign(n, std::nullopt);
  out.lndistcbd.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& bg = blockgroups[i];
    if (bg.medy) out.lnmedy[i] = std::log(*bg.medy);
    const double miles = options.units.to_miles(geo::distance(bg.centroid, cbd));
    if (miles > 0.0) out.lndistcbd[i] = std::log(miles);
    else out.warnings.push_back("block group " + bg.id + " centroid coincides with the CBD");
    if (!(bg.pop > 0.0)) {
      out.excluded[i] = true;
      out.warnings.push_back("block group " + bg.id + " has zero population; rates excluded");
      continue;
    }
    const double per_thousand = 1000.0 / bg.pop;
    for (auto& tc : out.by_type)
      for (std::size_t w = 0; w < 3; ++w) tc.rate[w][i] = tc.count[w][i] * per_thousand;
    out.liqdens[i] = out.license_count[i] * per_thousand;
  }
  for (auto t : kCrimeTypes)
    if (out.unassigned[index_of(t)] > 0)
      out.warnings.push_back(std::to_string(out.unassigned[index_of(t)]) + " " +
                             std::string(to_string(t)) + " records fall outside every block group");
  return out;
}

LicenseParse parse_licenses(std::istream& in, const std::string& x_column,
                            const std::string& y_column) {
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row)) throw DataError("license CSV is empty");
  const CsvHeader header(row);
  const auto cx = header.require(x_column);
  const auto cy = header.require(y_column);
  LicenseParse out;
  while (reader.next(row)) {
    const double x = row.size() > cx ? parse_double(row[cx]).value_or(NAN) : NAN;
    const double y = row.size() > cy ? parse_double(row[cy]).value_or(NAN) : NAN;
    if (!std::isfinite(x) || !std::isfinite(y)) {
      out.rejected.push_back({reader.line(), "missing or invalid coordinates"});
      continue;
    }
    out.points.push_back({x, y});
  }
  return out;
}

}  // namespace acq::ingest
