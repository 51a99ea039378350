#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acq/geo/spatial_index.hpp"
#include "acq/geo/units.hpp"
#include "acq/ingest/blockgroup.hpp"
#include "acq/ingest/crime.hpp"

namespace acq::ingest {

/// Reporting window for tables: whole day, daytime only, night only.
enum class Window { All = 0, Day = 1, Night = 2 };
inline constexpr std::array<Window, 3> kWindows = {Window::All, Window::Day, Window::Night};
std::string_view to_string(Window w);
std::optional<Window> parse_window(std::string_view s);
inline constexpr std::size_t index_of(Window w) { return static_cast<std::size_t>(w); }

/// Point -> block group lookup. A point on a shared boundary goes to the
/// block group that sorts first.
class BlockGroupLocator {
 public:
  explicit BlockGroupLocator(std::span<const BlockGroup> blockgroups);
  std::optional<std::size_t> locate(geo::Point p) const;

 private:
  geo::SpatialIndex index_;
};

struct TypeCounts {
  std::array<std::vector<int>, 3> count;                    // by Window
  std::array<std::vector<std::optional<double>>, 3> rate;   // per 1,000 residents
};

/// Per block group crime counts and rates plus the derived covariates.
struct BlockGroupRates {
  std::vector<std::string> ids;
  /// Zero-population block groups: no rates, excluded from statistics.
  std::vector<bool> excluded;
  std::array<TypeCounts, 4> by_type;
  std::vector<int> license_count;
  std::vector<std::optional<double>> liqdens;    // licenses per 1,000 residents
  std::vector<std::optional<double>> lnmedy;     // ln(median income)
  std::vector<std::optional<double>> lndistcbd;  // ln(centroid-to-CBD miles)
  std::array<int, 4> unassigned{};               // crimes outside every polygon
  int unassigned_licenses = 0;
  std::vector<std::string> warnings;

  std::size_t size() const { return ids.size(); }
  const std::vector<int>& count(CrimeType t, Window w) const {
    return by_type[index_of(t)].count[index_of(w)];
  }
  const std::vector<std::optional<double>>& rate(CrimeType t, Window w) const {
    return by_type[index_of(t)].rate[index_of(w)];
  }
};

struct RateOptions {
  NightWindows windows;
  geo::LinearUnits units;
};

/// Assigns crimes and licenses to block groups and normalises per 1,000
/// residents. Block groups must already be sorted by id.
BlockGroupRates assign_and_rate(std::span<const CrimeRecord> crimes,
                                std::span<const BlockGroup> blockgroups,
                                std::span<const geo::Point> licenses, geo::Point cbd,
                                const RateOptions& options = {});

/// License points from a CSV with x/y columns. Rows with bad coordinates are
/// reported, not fatal.
struct LicenseParse {
  std::vector<geo::Point> points;
  std::vector<RowIssue> rejected;
};
LicenseParse parse_licenses(std::istream& in, const std::string& x_column = "x",
                            const std::string& y_column = "y");

}  // namespace acq::ingest
