#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "acq/error.hpp"
#include "acq/pipeline/config.hpp"
#include "acq/pipeline/report.hpp"
#include "acq/pipeline/stages.hpp"
#include "acq/pipeline/workspace.hpp"
#include "acq/synth/city.hpp"

namespace {

using acq::pipeline::RunConfig;
using acq::pipeline::Stage;

struct Flags {
  std::string config;
  std::string crimes, blockgroups, parcels, licenses, boundary, out;
  double cbd_x = 0, cbd_y = 0, feet_per_unit = 1, cluster_gap_ft = 30, radius_miles = 0.25, coverage_step_ft = 100,
         gstar_z = 1.96;
  int unit_threshold = 24, cluster_min_units = 10, permutations = 999;
  std::uint64_t seed = 0;
  std::vector<std::string> night_windows;
  std::vector<int> landuse_codes;
  bool drop_islands = false;
};

void add_run_options(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration; flags override it");
  app->add_option("--crimes", f.crimes, "crime CSV (type, datetime, x, y)");
  app->add_option("--blockgroups", f.blockgroups, "block-group GeoJSON");
  app->add_option("--parcels", f.parcels, "parcel GeoJSON, or CSV with a WKT geometry column");
  app->add_option("--licenses", f.licenses, "liquor-license CSV (x, y)");
  app->add_option("--boundary", f.boundary, "city boundary GeoJSON");
  app->add_option("--cbd-x", f.cbd_x, "CBD x coordinate");
  app->add_option("--cbd-y", f.cbd_y, "CBD y coordinate");
  app->add_option("--feet-per-unit", f.feet_per_unit, "feet per coordinate unit");
  app->add_option("--night-window", f.night_windows, "night window override, e.g. robbery=21:00-03:00");
  app->add_option("--landuse-codes", f.landuse_codes, "land-use codes eligible for selection");
  app->add_option("--unit-threshold", f.unit_threshold, "units for a parcel, or cluster, to qualify");
  app->add_option("--cluster-min-units", f.cluster_min_units, "units above which a parcel may join a cluster");
  app->add_option("--cluster-gap-ft", f.cluster_gap_ft, "largest gap between clustered parcels");
  app->add_option("--radius-miles", f.radius_miles, "proximity radius");
  app->add_option("--coverage-step-ft", f.coverage_step_ft, "grid step of the coverage estimate");
  app->add_option("--gstar-z", f.gstar_z, "G* significance threshold");
  app->add_option("--permutations", f.permutations, "Moran permutations (0 disables the test)");
  app->add_option("--seed", f.seed, "permutation seed");
  app->add_flag("--drop-islands", f.drop_islands, "drop block groups without neighbors from regressions");
  app->add_option("--out", f.out, "output directory (default out)");
}

bool given(const CLI::App* app, const std::string& name) {
  const auto* opt = app->get_option_no_throw(name);
  return opt && opt->count() > 0;
}

RunConfig build_config(const CLI::App* app, const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : acq::pipeline::load_config(f.config);
  if (given(app, "--crimes")) cfg.crimes = f.crimes;
  if (given(app, "--blockgroups")) cfg.blockgroups = f.blockgroups;
  if (given(app, "--parcels")) cfg.parcels = f.parcels;
  if (given(app, "--licenses")) cfg.licenses = f.licenses;
  if (given(app, "--boundary")) cfg.boundary = f.boundary;
  if (given(app, "--out")) cfg.out = f.out;
  if (given(app, "--cbd-x")) cfg.cbd_x = f.cbd_x;
  if (given(app, "--cbd-y")) cfg.cbd_y = f.cbd_y;
  if (given(app, "--feet-per-unit")) cfg.feet_per_unit = f.feet_per_unit;
  if (given(app, "--night-window"))
    cfg.night_windows.insert(cfg.night_windows.end(), f.night_windows.begin(), f.night_windows.end());
  if (given(app, "--landuse-codes")) cfg.rules.codes = f.landuse_codes;
  if (given(app, "--unit-threshold")) cfg.rules.unit_threshold = f.unit_threshold;
  if (given(app, "--cluster-min-units")) cfg.rules.cluster_min_units = f.cluster_min_units;
  if (given(app, "--cluster-gap-ft")) cfg.rules.cluster_gap_ft = f.cluster_gap_ft;
  if (given(app, "--radius-miles")) cfg.radius_miles = f.radius_miles;
  if (given(app, "--coverage-step-ft")) cfg.coverage_step_ft = f.coverage_step_ft;
  if (given(app, "--gstar-z")) cfg.gstar_z = f.gstar_z;
  if (given(app, "--permutations")) cfg.permutations = f.permutations;
  if (given(app, "--seed")) cfg.seed = f.seed;
  if (given(app, "--drop-islands")) cfg.drop_islands = f.drop_islands;
  return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void run_stage_command(Stage s, const RunConfig& cfg) {
  acq::pipeline::Workspace ws(cfg.out);
  const auto keys = acq::pipeline::stage_keys(cfg);
  print_warnings(acq::pipeline::run_stage(s, cfg, ws, keys));
  for (const auto& f : acq::pipeline::stage_files(s))
    if (f.starts_with("table") || f.starts_with("fig")) {
      acq::pipeline::export_table(ws, f, cfg.out);
      std::cout << (cfg.out / f).string() << '\n';
    }
  if (s == Stage::Weights) {
    for (const char* f : {"weights.txt", "islands.csv"}) {
      acq::pipeline::write_file(cfg.out / f, acq::pipeline::read_file(ws.file(f)));
      std::cout << (cfg.out / f).string() << '\n';
    }
    const auto summary = ws.summary("weights");
    std::cout << "units " << summary["units"] << ", links " << summary["links"] << ", islands " << summary["islands"]
              << '\n';
  }
  if (s == Stage::Ingest) {
    const auto summary = ws.summary("ingest");
    std::cout << "crimes parsed " << summary["crimes_parsed"] << ", rejected " << summary["crimes_rejected"].size()
              << "; licenses parsed " << summary["licenses_parsed"] << ", rejected "
              << summary["licenses_rejected"].size() << "; block groups " << summary["blockgroups"] << " ("
              << summary["blockgroups_excluded"] << " excluded)\n";
    for (const auto& r : summary["crimes_rejected"])
      std::cout << "  crimes line " << r["line"] << ": " << r["reason"].get<std::string>() << '\n';
  }
}

int exit_code(acq::ErrorKind k) {
  switch (k) {
    case acq::ErrorKind::Config: return 2;
    case acq::ErrorKind::Data: return 3;
    case acq::ErrorKind::Numerical: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial analysis of acquisitive crime around multiunit housing"};
  app.require_subcommand(1);
  Flags flags;

  std::vector<std::pair<CLI::App*, Stage>> stage_commands;
  const std::vector<std::tuple<const char*, Stage, const char*>> stage_defs{
      {"ingest-check", Stage::Ingest, "parse inputs, assign crimes to block groups, compute rates"},
      {"select-parcels", Stage::Parcels, "select large multiunit parcels and measure crime proximity"},
      {"weights", Stage::Weights, "build Queen contiguity weights and report islands"},
      {"moran", Stage::Moran, "global Moran's I for each crime rate"},
      {"hotspots", Stage::Hotspots, "Getis-Ord G* hot spots and their profiles"},
      {"correlate", Stage::Correlate, "summary statistics and Spearman correlations"},
      {"regress", Stage::Regress, "spatial lag regressions"}};
  std::string moran_crime, moran_window;
  for (const auto& [name, stage, help] : stage_defs) {
    auto* sub = app.add_subcommand(name, help);
    add_run_options(sub, flags);
    if (stage == Stage::Moran) {
      sub->add_option("--crime", moran_crime, "restrict to one crime type");
      sub->add_option("--window", moran_window, "restrict to all, day or night");
    }
    stage_commands.emplace_back(sub, stage);
  }
  auto* report = app.add_subcommand("report", "re-render tables and layers from the cache");
  add_run_options(report, flags);
  auto* run = app.add_subcommand("run", "run every stage and write the artifact bundle");
  add_run_options(run, flags);

  acq::synth::SynthConfig synth_cfg;
  std::string synth_out = "synth_city";
  auto* synth = app.add_subcommand("synth", "generate a synthetic city with known parameters");
  synth->add_option("--out", synth_out, "directory for the generated inputs");
  synth->add_option("--seed", synth_cfg.seed, "generator seed");
  synth->add_option("--rows", synth_cfg.rows, "grid rows");
  synth->add_option("--cols", synth_cfg.cols, "grid columns");
  synth->add_option("--cell-size", synth_cfg.cell_size, "cell side in feet");
  synth->add_option("--rho", synth_cfg.rho, "true spatial lag parameter");
  synth->add_option("--beta", synth_cfg.beta, "true coefficients: constant then the seven regressors");
  synth->add_option("--noise-sd", synth_cfg.noise_sd, "error standard deviation");
  synth->add_option("--parcel-density", synth_cfg.parcel_density, "mean parcels per cell");
  synth->add_option("--license-density", synth_cfg.license_density, "mean liquor licenses per cell");
  synth->add_option("--cluster-pair-rate", synth_cfg.cluster_pair_rate, "chance of a 12-unit parcel pair per cell");
  std::vector<double> night_share, intensity;
  synth->add_option("--night-share", night_share, "night share per crime type (4 values)")->expected(4);
  synth->add_option("--intensity", intensity, "rate multiplier per crime type (4 values)")->expected(4);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      if (!night_share.empty()) std::copy(night_share.begin(), night_share.end(), synth_cfg.night_share.begin());
      if (!intensity.empty()) std::copy(intensity.begin(), intensity.end(), synth_cfg.intensity.begin());
      const auto city = acq::synth::make_city(synth_cfg);
      const auto files = acq::synth::write_city(city, synth_out);
      std::cout << files.config.string() << '\n';
      return 0;
    }
    if (run->parsed()) {
      const auto cfg = build_config(run, flags);
      acq::pipeline::run_pipeline(cfg);
      std::cout << (cfg.out / "run_manifest.json").string() << '\n';
      return 0;
    }
    if (report->parsed()) {
      const auto cfg = build_config(report, flags);
      acq::pipeline::validate(cfg);
      acq::pipeline::Workspace ws(cfg.out);
      acq::pipeline::render_report(cfg, ws, acq::pipeline::stage_keys(cfg));
      std::cout << (cfg.out / "run_manifest.json").string() << '\n';
      return 0;
    }
    for (const auto& [sub, stage] : stage_commands) {
      if (!sub->parsed()) continue;
      const auto cfg = build_config(sub, flags);
      if (stage == Stage::Moran && (!moran_crime.empty() || !moran_window.empty())) {
        std::optional<acq::ingest::CrimeType> type;
        std::optional<acq::ingest::Window> window;
        if (!moran_crime.empty()) {
          type = acq::ingest::parse_crime_type(moran_crime);
          if (!type) throw acq::ConfigError("unknown crime type '" + moran_crime + "'");
        }
        if (!moran_window.empty()) {
          window = acq::ingest::parse_window(moran_window);
          if (!window) throw acq::ConfigError("unknown window '" + moran_window + "'");
        }
        acq::pipeline::Workspace ws(cfg.out);
        const auto frame = acq::pipeline::moran_cells(cfg, ws, acq::pipeline::stage_keys(cfg), type, window);
        frame.save(cfg.out / "moran.csv");
        frame.write_csv(std::cout);
        return 0;
      }
      run_stage_command(stage, cfg);
      return 0;
    }
  } catch (const acq::Error& e) {
    std::cerr << "acqspatial: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "acqspatial: malformed JSON: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "acqspatial: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "acqspatial: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
