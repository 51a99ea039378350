#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "acq/pipeline/config.hpp"
#include "acq/pipeline/frame.hpp"
#include "acq/pipeline/stages.hpp"
#include "acq/pipeline/workspace.hpp"

namespace acq::pipeline {

/// The ten tables and figures, in output order.
inline const std::vector<std::string> kTables{
    "table1_counts.csv",      "table2_distances.csv",     "table3_moran.csv",          "table4_summary.csv",
    "table5_hotspot_profiles.csv", "table6_correlations.csv", "table7_night_diffs.csv", "table8_regressions.csv",
    "fig2_histograms.csv",    "fig3_parcel_histograms.csv"};

/// Every file in a complete artifact bundle.
std::vector<std::string> bundle_files();

/// Display text for a full-precision cell: rounded to the precision printed
/// for that table and metric. Empty stays empty.
std::string display(std::string_view table, std::string_view metric, std::string_view value);

/// Copy of a cached table with a "display" column after "value".
Frame with_display(const Frame& f, std::string_view table);

/// Writes one cached table, with display column, into `out_dir`.
void export_table(const Workspace& ws, const std::string& table, const std::filesystem::path& out_dir);

/// Re-renders the bundle from the cache; every stage must be fresh.
void render_report(const RunConfig& cfg, Workspace& ws, const StageKeys& keys);

/// Manifest for the current cache state. `failure` is null on success.
nlohmann::json build_manifest(const RunConfig& cfg, const Workspace& ws, const StageKeys& keys,
                              const std::vector<std::string>& completed, const nlohmann::json& failure);

/// Every stage in order, then the report. On a fatal error the manifest
/// lists the completed stages and the error is rethrown.
void run_pipeline(const RunConfig& cfg);

}  // namespace acq::pipeline
