#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acq/ingest/crime.hpp"
#include "acq/ingest/rates.hpp"
#include "acq/pipeline/config.hpp"
#include "acq/pipeline/frame.hpp"
#include "acq/pipeline/workspace.hpp"

namespace acq::pipeline {

enum class Stage { Ingest, Parcels, Weights, Moran, Hotspots, Correlate, Regress };

inline constexpr std::array<Stage, 7> kStages = {Stage::Ingest,   Stage::Parcels,   Stage::Weights, Stage::Moran,
                                                 Stage::Hotspots, Stage::Correlate, Stage::Regress};

/// Subcommand name: ingest, select-parcels, weights, moran, hotspots, correlate, regress.
std::string_view stage_name(Stage s);
std::vector<Stage> upstream(Stage s);
/// Cache files a stage writes.
std::vector<std::string> stage_files(Stage s);

struct InputHash {
  std::string path;
  std::optional<std::string> sha256;  // nullopt when unset or unreadable
};

/// Cache key per stage: a hash over the stage's inputs, its parameters and
/// the keys of its upstream stages.
struct StageKeys {
  std::map<std::string, InputHash> inputs;
  std::array<std::string, kStages.size()> key;

  const std::string& operator[](Stage s) const { return key[static_cast<std::size_t>(s)]; }
};

StageKeys stage_keys(const RunConfig& cfg);

/// Checks the upstream stages are fresh, computes the stage and records it
/// in the workspace. Returns the stage warnings.
std::vector<std::string> run_stage(Stage s, const RunConfig& cfg, Workspace& ws, const StageKeys& keys);

/// "BURG_all", "ROB_night", ...
std::string cell_name(ingest::CrimeType t, ingest::Window w);

/// Moran's I for the chosen cells, computed from the cache without recording
/// anything. One row per cell.
Frame moran_cells(const RunConfig& cfg, const Workspace& ws, const StageKeys& keys,
                  std::optional<ingest::CrimeType> type, std::optional<ingest::Window> window);

}  // namespace acq::pipeline
