#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acq/geo/units.hpp"
#include "acq/ingest/crime.hpp"
#include "acq/parcels/selection.hpp"

namespace acq::pipeline {

struct RunConfig {
  std::filesystem::path crimes;
  std::filesystem::path blockgroups;
  std::filesystem::path parcels;
  std::filesystem::path licenses;
  std::filesystem::path boundary;  // optional; coverage is skipped without it
  std::optional<double> cbd_x;
  std::optional<double> cbd_y;
  double feet_per_unit = 1.0;
  /// Overrides such as "robbery=21:00-03:00", applied in order.
  std::vector<std::string> night_windows;
  parcels::SelectionRules rules;
  double radius_miles = 0.25;
  double coverage_step_ft = 100.0;
  double gstar_z = 1.96;
  int permutations = 999;
  std::optional<std::uint64_t> seed;
  bool drop_islands = false;
  std::optional<std::uint64_t> synth_seed;  // provenance of generated inputs
  std::filesystem::path out = "out";

  geo::LinearUnits units() const { return {feet_per_unit}; }
  /// Throws ConfigError on a malformed override.
  ingest::NightWindows windows() const;
  /// Throws ConfigError when either coordinate is unset.
  geo::Point cbd() const;
};

/// Applies the keys present in `j`. Relative paths resolve against `base`.
/// Unknown keys throw ConfigError.
void apply_json(RunConfig& cfg, const nlohmann::json& j, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& file);

/// Value checks that need no file access.
void validate(const RunConfig& cfg);
/// Throws ConfigError when a required input is unset or unreadable.
void require_input(const std::filesystem::path& p, const std::string& what);

/// Every parameter except the output directory.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace acq::pipeline
