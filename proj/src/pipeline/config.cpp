#include "acq/pipeline/config.hpp"

#include <cmath>
#include <fstream>

#include "acq/error.hpp"

namespace acq::pipeline {

namespace {

std::filesystem::path resolve(const std::string& s, const std::filesystem::path& base) {
  std::filesystem::path p(s);
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

template <typename T>
T get(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

ingest::NightWindows RunConfig::windows() const {
  ingest::NightWindows w;
  for (const auto& o : night_windows) w.apply_override(o);
  return w;
}

geo::Point RunConfig::cbd() const {
  if (!cbd_x || !cbd_y) throw ConfigError("the CBD point needs both --cbd-x and --cbd-y");
  return {*cbd_x, *cbd_y};
}

void apply_json(RunConfig& cfg, const nlohmann::json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "crimes") cfg.crimes = resolve(get<std::string>(v, key), base);
    else if (key == "blockgroups") cfg.blockgroups = resolve(get<std::string>(v, key), base);
    else if (key == "parcels") cfg.parcels = resolve(get<std::string>(v, key), base);
    else if (key == "licenses") cfg.licenses = resolve(get<std::string>(v, key), base);
    else if (key == "boundary") cfg.boundary = resolve(get<std::string>(v, key), base);
    else if (key == "out") cfg.out = resolve(get<std::string>(v, key), base);
    else if (key == "cbd_x") cfg.cbd_x = get<double>(v, key);
    else if (key == "cbd_y") cfg.cbd_y = get<double>(v, key);
    else if (key == "feet_per_unit") cfg.feet_per_unit = get<double>(v, key);
    else if (key == "night_windows") {
      cfg.night_windows.clear();
      if (v.is_object())
        for (const auto& [type, window] : v.items()) cfg.night_windows.push_back(type + "=" + get<std::string>(window, key));
      else
        cfg.night_windows = get<std::vector<std::string>>(v, key);
    } else if (key == "landuse_codes") cfg.rules.codes = get<std::vector<int>>(v, key);
    else if (key == "unit_threshold") cfg.rules.unit_threshold = get<int>(v, key);
    else if (key == "cluster_min_units") cfg.rules.cluster_min_units = get<int>(v, key);
    else if (key == "cluster_gap_ft") cfg.rules.cluster_gap_ft = get<double>(v, key);
    else if (key == "radius_miles") cfg.radius_miles = get<double>(v, key);
    else if (key == "coverage_step_ft") cfg.coverage_step_ft = get<double>(v, key);
    else if (key == "gstar_z") cfg.gstar_z = get<double>(v, key);
    else if (key == "permutations") cfg.permutations = get<int>(v, key);
    else if (key == "seed") cfg.seed = get<std::uint64_t>(v, key);
    else if (key == "synth_seed") cfg.synth_seed = get<std::uint64_t>(v, key);
    else if (key == "drop_islands") cfg.drop_islands = get<bool>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + file.string() + ": " + e.what());
  }
  RunConfig cfg;
  apply_json(cfg, j, file.parent_path());
  return cfg;
}

void validate(const RunConfig& cfg) {
  auto positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(cfg.feet_per_unit, "feet_per_unit");
  positive(cfg.radius_miles, "radius_miles");
  positive(cfg.coverage_step_ft, "coverage_step_ft");
  positive(cfg.gstar_z, "gstar_z");
  if (cfg.rules.unit_threshold < 1) throw ConfigError("unit_threshold must be at least 1");
  if (cfg.rules.cluster_min_units < 0) throw ConfigError("cluster_min_units must be non-negative");
  if (!(cfg.rules.cluster_gap_ft >= 0.0)) throw ConfigError("cluster_gap_ft must be non-negative");
  if (cfg.rules.codes.empty()) throw ConfigError("landuse_codes must not be empty");
  if (cfg.permutations != 0 && cfg.permutations < 99)
    throw ConfigError("permutations must be 0 or at least 99");
  if (cfg.permutations > 0 && !cfg.seed) throw ConfigError("a seed is required when permutations > 0");
  cfg.windows();
  cfg.cbd();
}

void require_input(const std::filesystem::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError("no " + what + " input given");
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read " + what + " input " + p.string());
}

nlohmann::json to_json(const RunConfig& cfg) {
  const auto w = cfg.windows();
  nlohmann::json windows = nlohmann::json::object();
  for (auto t : ingest::kCrimeTypes) windows[std::string(ingest::to_string(t))] = w[t].to_string();
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"inputs",
           {{"crimes", cfg.crimes.generic_string()},
            {"blockgroups", cfg.blockgroups.generic_string()},
            {"parcels", cfg.parcels.generic_string()},
            {"licenses", cfg.licenses.generic_string()},
            {"boundary", cfg.boundary.empty() ? nlohmann::json(nullptr) : nlohmann::json(cfg.boundary.generic_string())}}},
          {"cbd", {{"x", opt(cfg.cbd_x)}, {"y", opt(cfg.cbd_y)}}},
          {"feet_per_unit", cfg.feet_per_unit},
          {"night_windows", windows},
          {"landuse_codes", cfg.rules.codes},
          {"unit_threshold", cfg.rules.unit_threshold},
          {"cluster_min_units", cfg.rules.cluster_min_units},
          {"cluster_gap_ft", cfg.rules.cluster_gap_ft},
          {"radius_miles", cfg.radius_miles},
          {"coverage_step_ft", cfg.coverage_step_ft},
          {"gstar_z", cfg.gstar_z},
          {"permutations", cfg.permutations},
          {"seed", opt(cfg.seed)},
          {"synth_seed", opt(cfg.synth_seed)},
          {"drop_islands", cfg.drop_islands}};
}

}  // namespace acq::pipeline
